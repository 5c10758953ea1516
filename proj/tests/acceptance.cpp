// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fails. Tolerances and time budgets are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "elboforge/conjugate.hpp"
#include "elboforge/dsl.hpp"
#include "elboforge/elbo.hpp"
#include "elboforge/verify.hpp"
#include "elboforge/zoo.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"

using namespace elboforge;
using namespace elboforge::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

GraphicalModel load(const std::string& name) {
  std::ifstream in(std::string(ELBOFORGE_MODELS_DIR) + "/" + name);
  if (!in.good()) throw std::runtime_error("missing model file " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model({ss.str(), name});
}

const QPrimeSelection& selection_for(const std::vector<QPrimeSelection>& sels,
                                     const std::vector<int>& chosen) {
  for (const auto& s : sels)
    if (s.chosen == chosen) return s;
  throw std::runtime_error("selection not enumerated");
}

std::multiset<std::string> recon_multiset(const GraphicalModel& m, const ElboExpression& e) {
  std::multiset<std::string> out;
  for (int fi : e.reconstruction_terms) out.insert(factor_signature(m.generative[fi], 'p'));
  return out;
}

std::multiset<std::string> ratio_multiset(const GraphicalModel& m, const ElboExpression& e) {
  std::multiset<std::string> out;
  for (const auto& rt : e.ratio_terms)
    out.insert(factor_signature(m.guides[rt.q_index], 'q') + "/" +
               factor_signature(m.generative[rt.p_index], 'p') + "/" +
               (rt.tag == RatioTag::ProperKl ? "kl" : "ratio"));
  return out;
}

// 1. VAE ELBO reproduction -------------------------------------------------
Outcome vae_reproduction() {
  Outcome o;
  GraphicalModel m = load("vae.model");
  std::vector<QPrimeSelection> sels = enumerate_qprime(m);
  ElboExpression e = derive(m, selection_for(sels, {0}));

  o.expect(e.sampling_measure.size() == 1 && e.sampling_measure[0].is_guide &&
               factor_signature(m.guides[0], 'q') == "q(z|x)",
           "expectation is not over q(z|x)");
  o.expect(recon_multiset(m, e) == std::multiset<std::string>{"p(x|z)"},
           "reconstruction term is not exactly E log p(x|z)");
  o.expect(ratio_multiset(m, e) == std::multiset<std::string>{"q(z|x)/p(z)/kl"},
           "ratio term is not exactly KL(q(z|x)||p(z))");
  o.detail = render(m, e, FormulaSyntax::Text);
  return o;
}

// 2. Latplan reproduction --------------------------------------------------
Outcome latplan_reproduction() {
  Outcome o;
  GraphicalModel m = load("latplan.model");
  std::vector<QPrimeSelection> sels = enumerate_qprime(m);

  const QPrimeSelection& q1 = selection_for(sels, {0, 2});  // q(z0|x0), q(a|x0,x1)
  FactorPartition part1 = partition(m, q1);
  std::multiset<std::string> p2sigs;
  for (int fi : part1.p2) p2sigs.insert(factor_signature(m.generative[fi], 'p'));
  o.expect(p2sigs == std::multiset<std::string>{"p(z1|z0,a)"}, "Q'1 P2 mismatch");
  ElboExpression e1 = derive(m, q1);
  o.expect(recon_multiset(m, e1) == std::multiset<std::string>{"p(x0|z0)", "p(x1|z1)"},
           "Q'1 reconstruction mismatch");
  o.expect(ratio_multiset(m, e1) == std::multiset<std::string>{"q(z0|x0)/p(z0)/kl",
                                                               "q(a|x0,x1)/p(a|z0)/kl"},
           "Q'1 ratio mismatch");

  const QPrimeSelection& q2 = selection_for(sels, {0, 1, 2});
  FactorPartition part2 = partition(m, q2);
  o.expect(part2.p2.empty(), "Q'2 P2 should be empty");
  ElboExpression e2 = derive(m, q2);
  o.expect(recon_multiset(m, e2) == std::multiset<std::string>{"p(x0|z0)", "p(x1|z1)"},
           "Q'2 reconstruction mismatch");
  o.expect(ratio_multiset(m, e2) ==
               std::multiset<std::string>{"q(z0|x0)/p(z0)/kl", "q(z1|x1)/p(z1|z0,a)/kl",
                                          "q(a|x0,x1)/p(a|z0)/kl"},
           "Q'2 should carry three KLs");
  o.detail = "Q'1: 2+2 terms, P2={p(z1|z0,a)}; Q'2: 2+3 terms, P2={}";
  return o;
}

// 3. Degenerate-bound detection --------------------------------------------
Outcome degenerate_bound() {
  Outcome o;
  GraphicalModel m = load("vae.model");
  std::vector<QPrimeSelection> sels = enumerate_qprime(m);
  ElboExpression e = derive(m, selection_for(sels, {}));
  o.expect(render(m, e, FormulaSyntax::Text) == "E_{p(z)}[log p(x|z)]",
           "empty selection should sample the prior");

  HeuristicReport hr = heuristic_filter(m, sels);
  bool rejected = false;
  for (size_t i = 0; i < sels.size(); ++i)
    if (sels[i].chosen.empty())
      rejected = hr.entries[i].rejected && hr.entries[i].reason == "ignores-input";
  o.expect(rejected, "empty selection must be rejected with reason ignores-input");
  o.detail = "E_{p(z)}[log p(x|z)] rejected: ignores-input";
  return o;
}

// 4. VEEGAN bound ------------------------------------------------------------
Outcome veegan_bound() {
  Outcome o;
  GraphicalModel m = load("veegan_flipped.model");
  std::vector<QPrimeSelection> sels = enumerate_qprime(m);
  ElboExpression e = derive(m, selection_for(sels, {0}));

  o.expect(e.sampling_measure.size() == 1 && e.sampling_measure[0].is_guide,
           "expectation must be over the guide on the latent");
  const Factor& g = m.guides[0];
  o.expect(g.targets == std::vector<std::string>{"x"} &&
               g.parents == std::vector<std::string>{"z"},
           "guide must condition the latent on the observed variable");
  o.expect(recon_multiset(m, e) == std::multiset<std::string>{"p(z|x)"},
           "reconstruction must be the observed-variable factor");
  o.expect(ratio_multiset(m, e) == std::multiset<std::string>{"q(x|z)/p(x)/kl"},
           "KL must compare the guide against the latent's generative factor");
  o.detail = render(m, e, FormulaSyntax::Text);
  return o;
}

// 5. Jensen suite -------------------------------------------------------------
Outcome jensen_suite() {
  Outcome o;
  std::mt19937_64 rng(101);
  int bound_checks = 0, tight_checks = 0;
  double worst_slack = -1e300, worst_gap = 0;
  for (int t = 0; t < 100; ++t) {
    GraphicalModel m = random_tabular_model(rng);
    std::vector<Assignment> obs = positive_observations(m);
    if (obs.empty()) {
      o.fail("random model has no positive-evidence observation");
      continue;
    }
    std::vector<QPrimeSelection> sels = enumerate_qprime(m);
    size_t budget = std::min<size_t>(obs.size(), 2);
    for (size_t i = 0; i < budget; ++i) {
      double evidence = exact_log_evidence(m, obs[i]);
      for (const auto& sel : sels) {
        double slack = numeric_elbo(m, sel, obs[i], Enumerate{}) - evidence;
        worst_slack = std::max(worst_slack, slack);
        if (slack > 1e-9) o.fail("ELBO above evidence by " + std::to_string(slack));
        ++bound_checks;
      }
    }

    GraphicalModel tight = m;
    tight.guides = true_posterior_guides(m);
    std::vector<QPrimeSelection> tsels = enumerate_qprime(tight);
    const QPrimeSelection& full = tsels.back();
    for (size_t i = 0; i < budget; ++i) {
      double gap = exact_log_evidence(m, obs[i]) -
                   numeric_elbo(tight, full, obs[i], Enumerate{});
      worst_gap = std::max(worst_gap, std::fabs(gap));
      if (std::fabs(gap) > 1e-9) o.fail("posterior substitution left a gap");
      ++tight_checks;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d bound checks (max slack %.2e), %d tightness checks (max gap %.2e)",
                bound_checks, worst_slack, tight_checks, worst_gap);
  o.detail = buf;
  return o;
}

// 6. Perfect overfitting -------------------------------------------------------
Outcome perfect_overfitting() {
  Outcome o;
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> points(2, 50), samples(1, 500);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    int k = points(rng);
    DiscreteDataset d;
    for (int i = 0; i < k; ++i) d.space.push_back("p" + std::to_string(i));
    d.counts = random_counts(rng, k, samples(rng));
    if (d.total() == 0) d.counts[0] = 1;
    std::vector<double> p = brute_force_mle(d);
    std::vector<double> q = d.empirical();
    double tv = 0;
    for (int i = 0; i < k; ++i) tv += std::fabs(p[i] - q[i]);
    tv /= 2;
    worst = std::max(worst, tv);
    if (tv > 1e-6) o.fail("optimizer missed the empirical distribution");
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "100 datasets, worst TV distance %.2e", worst);
  o.detail = buf;
  return o;
}

// 7. Soundness / completeness, exhaustively over |X| <= 6 ----------------------
Outcome soundness_completeness_exhaustive() {
  Outcome o;
  long long instances = 0, counterexamples = 0;
  for (int n = 1; n <= 6; ++n) {
    std::vector<std::string> space;
    for (int i = 0; i < n; ++i) space.push_back(std::to_string(i));
    for (const std::vector<int>& rgs : all_partitions(n)) {
      int classes = 1 + *std::max_element(rgs.begin(), rgs.end());
      // Class status: 0 invalid, 1 valid untouched, 2 valid touched (one
      // sample drawn from its first point).
      std::vector<int> status(classes, 0);
      long long combos = 1;
      for (int c = 0; c < classes; ++c) combos *= 3;
      for (long long combo = 0; combo < combos; ++combo) {
        long long rest = combo;
        int touched = 0;
        for (int c = 0; c < classes; ++c) {
          status[c] = static_cast<int>(rest % 3);
          rest /= 3;
          if (status[c] == 2) ++touched;
        }
        if (touched == 0) continue;  // completeness needs a non-empty dataset

        DiscreteDataset d;
        d.space = space;
        d.counts.assign(n, 0);
        ValidityPartition part;
        part.valid.assign(n, 0);
        std::vector<char> sampled_class(classes, 0);
        for (int i = 0; i < n; ++i) {
          int c = rgs[i];
          if (status[c] > 0) part.valid[i] = 1;
          if (status[c] == 2 && !sampled_class[c]) {
            d.counts[i] = 1;
            sampled_class[c] = 1;
          }
        }
        EquivalencePartition eq{rgs, classes};
        CompletenessResult r = completeness_check(d, part, eq);

        bool expect_generalizes = true;
        for (int c = 0; c < classes; ++c)
          if (status[c] == 1) expect_generalizes = false;
        if (r.generalizes != expect_generalizes) ++counterexamples;
        if (r.generalizes && !r.complete) ++counterexamples;  // the theorem itself
        if (!expect_generalizes && r.complete) ++counterexamples;

        // The class-constant optimum stays sound.
        if (!soundness_check(r.optimum, part).sound) ++counterexamples;
        ++instances;
      }
    }
  }

  // Singleton classes with a strict subset sampled: perfect overfitting,
  // flagged incomplete.
  DiscreteDataset d = DiscreteDataset::from_samples({"0", "1", "2"}, {"0"});
  ValidityPartition all_valid{{1, 1, 1}};
  EquivalencePartition singles{{0, 1, 2}, 3};
  CompletenessResult r = completeness_check(d, all_valid, singles);
  o.expect(!r.generalizes && !r.complete, "singleton overfitting must be incomplete");

  o.expect(counterexamples == 0, std::to_string(counterexamples) + " counterexamples");
  o.detail = std::to_string(instances) + " partition instances, 0 counterexamples expected";
  if (counterexamples > 0)
    o.detail = std::to_string(instances) + " instances, " + std::to_string(counterexamples) +
               " counterexamples";
  return o;
}

// 8. KL closed forms -----------------------------------------------------------
Outcome kl_closed_forms() {
  Outcome o;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_rel = 0, worst_identity = 0, min_kl = 1e300;

  auto check_pair = [&](const DistributionInstance& q, const DistributionInstance& p) {
    double closed = kl_value(q, p);
    min_kl = std::min(min_kl, closed);
    if (closed < -1e-12) o.fail(q.family->name + " KL below -1e-12");
    double oracle = kl_oracle(q, p);
    double rel = std::fabs(closed - oracle) / std::max(std::fabs(oracle), 1e-12);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-6) o.fail(q.family->name + " KL disagrees with quadrature");
    double identity = std::fabs(cross_entropy_value(q, p) - entropy(q) - closed);
    worst_identity = std::max(worst_identity, identity);
    if (identity > 1e-9) o.fail(q.family->name + " H+KL identity broken");
    // Self-KL vanishes.
    if (kl_value(q, q) > 1e-12 || kl_value(q, q) < -1e-12)
      o.fail(q.family->name + " KL(q,q) != 0");
  };

  auto separated = [&](auto make_q, auto make_p) {
    for (int i = 0; i < 50; ++i) {
      DistributionInstance q = make_q(), p = make_p();
      while (kl_value(q, p) < 0.01) p = make_p();
      check_pair(q, p);
    }
  };

  separated([&] { return make_instance("Normal", {4 * u(rng) - 2, 0.4 + 1.6 * u(rng)}); },
            [&] { return make_instance("Normal", {4 * u(rng) - 2, 0.4 + 1.6 * u(rng)}); });
  separated([&] { return make_instance("Bernoulli", {0.05 + 0.9 * u(rng)}); },
            [&] { return make_instance("Bernoulli", {0.05 + 0.9 * u(rng)}); });
  auto rand_simplex = [&](int k, double floor) {
    std::vector<double> v(k);
    double s = 0;
    for (auto& x : v) s += x = floor - std::log(u(rng));
    double partial = 0;
    for (int i = 0; i + 1 < k; ++i) partial += v[i] /= s;
    v[k - 1] = 1 - partial;
    return v;
  };
  separated([&] { return make_instance("Categorical", {rand_simplex(3, 0.1)}); },
            [&] { return make_instance("Categorical", {rand_simplex(3, 0.1)}); });
  separated([&] { return make_instance("Beta", {0.25 + 0.5 * u(rng), 6 + 24 * u(rng)}); },
            [&] { return make_instance("Beta", {0.25 + 0.5 * u(rng), 6 + 24 * u(rng)}); });
  separated(
      [&] { return make_instance("Dirichlet", {rand_simplex(3, 0.6), 8 + 16 * u(rng)}); },
      [&] { return make_instance("Dirichlet", {rand_simplex(3, 0.6), 8 + 16 * u(rng)}); });

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "5 families x 50 pairs: worst rel err %.2e, worst H+KL gap %.2e, min KL %.2e",
                worst_rel, worst_identity, min_kl);
  o.detail = buf;
  return o;
}

// 9. Conjugate updates ----------------------------------------------------------
Outcome conjugate_updates() {
  Outcome o;
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  double worst_beta = 0;
  for (int i = 0; i < 10; ++i) {
    double t0 = 0.2 + 0.6 * u(rng), n0 = 2 + 10 * u(rng);
    long long trials = 5 + static_cast<long long>(40 * u(rng));
    long long succ = static_cast<long long>(trials * u(rng));
    BetaState post = beta_update(make_beta_state(t0, n0), {trials, succ});
    worst_beta =
        std::max(worst_beta, beta_grid_bayes_error(t0, n0, succ, trials, post.theta0, post.n0));
  }
  o.expect(worst_beta <= 1e-4, "Beta grid-Bayes disagreement");

  double worst_dir = 0;
  for (int i = 0; i < 5; ++i) {
    std::vector<double> p0(3);
    double s = 0;
    for (auto& v : p0) s += v = 0.5 - std::log(u(rng));
    double partial = 0;
    for (int j = 0; j < 2; ++j) partial += p0[j] /= s;
    p0[2] = 1 - partial;
    double n0 = 4 + 8 * u(rng);
    std::vector<long long> counts{static_cast<long long>(1 + 8 * u(rng)),
                                  static_cast<long long>(1 + 8 * u(rng)),
                                  static_cast<long long>(1 + 8 * u(rng))};
    DirichletState post = dirichlet_update(make_dirichlet_state(p0, n0), counts);
    worst_dir =
        std::max(worst_dir, dirichlet3_grid_bayes_error(p0, n0, counts, post.p0, post.n0));
  }
  o.expect(worst_dir <= 1e-4, "Dirichlet grid-Bayes disagreement");

  int exact_matches = 0;
  for (int i = 0; i < 100; ++i) {
    double t0 = u(rng), n0 = 50 * u(rng);
    int n = static_cast<int>(80 * u(rng));
    int s = n > 0 ? static_cast<int>((n + 1) * u(rng)) : 0;
    if (s > n) s = n;
    BetaState prior = make_beta_state(t0, n0);
    BetaState direct = beta_update(prior, {n, s});
    std::vector<double> xs(n, 0.0);
    for (int j = 0; j < s; ++j) xs[j] = 1.0;
    BetaState via = beta_from_expfam(
        expfam_update(expfam_from_beta(prior), xs, bernoulli_statistic()));
    if (via.theta0 == direct.theta0 && via.n0 == direct.n0) ++exact_matches;
  }
  o.expect(exact_matches == 100, "exponential-family path diverged from beta_update");

  // The worked values.
  BetaState coin = beta_update(haldane_prior(), {1000, 520});
  o.expect(coin.theta0 == 0.52 && coin.n0 == 1000.0, "Beta(0.52, 1000) not reproduced");
  ScaledInvChiSqState var = variance_update(make_scaled_inv_chi_sq_state(1.0, 1.0), 2.0, 0.0, 1.0);
  o.expect(var.sigma0_sq == 4.0 / 3.0 && var.n0 == 2.0, "variance update formula mismatch");

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "grid-Bayes worst rel err: Beta %.2e, Dirichlet %.2e; 100/%d bit-exact expfam",
                worst_beta, worst_dir, exact_matches);
  o.detail = buf;
  return o;
}

// 10. Normalization ---------------------------------------------------------------
Outcome normalization() {
  Outcome o;
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_cont = 0, worst_disc = 0;

  for (int i = 0; i < 5; ++i) {
    std::vector<DistributionInstance> cont = {
        make_instance("Normal", {6 * u(rng) - 3, 0.3 + 2 * u(rng)}),
        make_instance("Laplace", {4 * u(rng) - 2, 0.3 + 2 * u(rng)}),
        make_instance("Uniform", {-u(rng) - 0.1, 0.1 + u(rng)}),
        make_instance("Beta", {0.25 + 0.5 * u(rng), 4 + 20 * u(rng)}),
        make_instance("Gamma", {1 + 5 * u(rng), 0.4 + 2 * u(rng)}),
        make_instance("Dirichlet",
                      {std::vector<double>{0.3, 0.4, 0.3}, 6 + 10 * u(rng)}),
    };
    for (const auto& d : cont) {
      double err = std::fabs(normalization_oracle(d) - 1.0);
      worst_cont = std::max(worst_cont, err);
      if (err > 1e-6) o.fail(d.family->name + " does not integrate to 1");
    }
    std::vector<DistributionInstance> disc = {
        make_instance("Bernoulli", {u(rng)}),
        make_instance("Categorical",
                      {std::vector<double>{0.25, 0.25, 0.5}}),
        make_instance("Binomial", {std::floor(3 + 6 * u(rng)), u(rng)}),
        make_instance("Const", {4 * u(rng)}),
    };
    for (const auto& d : disc) {
      double err = std::fabs(normalization_oracle(d) - 1.0);
      worst_disc = std::max(worst_disc, err);
      if (err > 1e-12) o.fail(d.family->name + " masses do not sum to 1");
    }
  }

  double worst_nll = 0;
  auto formula = nll_formula(make_instance("Normal", {Sym{"mu"}, Sym{"sigma"}}));
  for (int i = 0; i < 1000; ++i) {
    double mu = 8 * u(rng) - 4, sigma = 0.2 + 4 * u(rng), x = 30 * u(rng) - 15;
    double v = evaluate(**formula, {{"x", x}, {"mu", mu}, {"sigma", sigma}});
    double err = std::fabs(v + log_prob(make_instance("Normal", {mu, sigma}), Value{x}));
    worst_nll = std::max(worst_nll, err);
    if (err > 1e-12) o.fail("Gaussian NLL formula drifted from -log_prob");
  }

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "integrals off by <= %.2e, sums by <= %.2e, NLL formula by <= %.2e",
                worst_cont, worst_disc, worst_nll);
  o.detail = buf;
  return o;
}

// 11. DSL round-trip ----------------------------------------------------------------
Outcome dsl_round_trip() {
  Outcome o;
  int checked = 0;
  for (const char* name : {"vae.model", "hmm.model", "latplan.model", "veegan_flipped.model",
                           "coin.model", "empty.model", "mixture.model"}) {
    std::ifstream in(std::string(ELBOFORGE_MODELS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    GraphicalModel m = parse_model({ss.str(), name});
    std::string canon = render_model(m);
    GraphicalModel m2 = parse_model({canon, "canon"});
    if (!(m2 == m)) o.fail(std::string(name) + " round-trip changed the model");
    if (render_model(m2) != canon) o.fail(std::string(name) + " canonical form not byte-stable");
    ++checked;
  }
  std::mt19937_64 rng(127);
  for (int i = 0; i < 20; ++i) {
    GraphicalModel m = random_dsl_model(rng);
    std::string canon = render_model(m);
    GraphicalModel m2 = parse_model({canon, "canon"});
    if (!(m2 == m)) o.fail("random model round-trip changed the model");
    if (render_model(m2) != canon) o.fail("random model canonical form not byte-stable");
    ++checked;
  }
  o.detail = std::to_string(checked) + " sources, fixpoint and byte-stable";
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double budget_seconds;  // 0 = no stated budget
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"VAE ELBO reproduction", vae_reproduction, 1.0},
      {"Latplan reproduction", latplan_reproduction, 1.0},
      {"degenerate-bound detection", degenerate_bound, 0.0},
      {"VEEGAN bound", veegan_bound, 0.0},
      {"Jensen suite", jensen_suite, 60.0},
      {"perfect-overfitting theorem", perfect_overfitting, 30.0},
      {"soundness/completeness", soundness_completeness_exhaustive, 60.0},
      {"KL closed forms", kl_closed_forms, 0.0},
      {"conjugate updates", conjugate_updates, 0.0},
      {"normalization", normalization, 0.0},
      {"DSL round-trip", dsl_round_trip, 0.0},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].budget_seconds > 0 && secs > criteria[i].budget_seconds) {
      o.pass = false;
      o.detail += " [over time budget]";
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2zu. %-28s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, o.detail.c_str(), secs);
  }
  return failures == 0 ? 0 : 1;
}
