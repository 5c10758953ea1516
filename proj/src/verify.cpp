#include "elboforge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace elboforge {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr long long kStateBudget = 1'000'000;
constexpr double kMassEps = 1e-9;  // "proves x" threshold for smooth optimizers

struct KahanSum {
  double sum = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

long long DiscreteDataset::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

std::vector<double> DiscreteDataset::empirical() const {
  long long t = total();
  require(t >= 1, "dataset needs at least one sample");
  std::vector<double> q(counts.size());
  for (size_t i = 0; i < counts.size(); ++i)
    q[i] = static_cast<double>(counts[i]) / static_cast<double>(t);
  return q;
}

DiscreteDataset DiscreteDataset::from_samples(std::vector<std::string> space,
                                              const std::vector<std::string>& samples) {
  DiscreteDataset d;
  d.space = std::move(space);
  d.counts.assign(d.space.size(), 0);
  for (const auto& s : samples) {
    auto it = std::find(d.space.begin(), d.space.end(), s);
    require(it != d.space.end(), "sample '" + s + "' is not in the sample space");
    ++d.counts[it - d.space.begin()];
  }
  return d;
}

// ---------------------------------------------------------------------------
// Tabular compilation
// ---------------------------------------------------------------------------

int TabularFactor::block_cardinality() const {
  int c = 1;
  for (int k : target_cards) c *= k;
  return c;
}

int TabularFactor::row_of(std::span<const int> full) const {
  int row = 0;
  for (size_t i = 0; i < parents.size(); ++i) {
    int v = full[parents[i]];
    if (v < 0) throw std::logic_error("parent not assigned");
    row = row * parent_cards[i] + v;
  }
  return row;
}

double TabularFactor::prob(std::span<const int> full) const {
  int cell = 0;
  for (size_t i = 0; i < targets.size(); ++i) {
    int v = full[targets[i]];
    if (v < 0) throw std::logic_error("target not assigned");
    cell = cell * target_cards[i] + v;
  }
  return probs[static_cast<size_t>(row_of(full)) * block_cardinality() + cell];
}

bool is_tabular(const GraphicalModel& m) {
  for (const auto& v : m.variables)
    if (v.role != Role::Parameter && !v.support.is_discrete_scalar()) return false;
  auto tabular_spec = [](const DistributionSpec& s) {
    if (s.family != "Categorical" && s.family != "Bernoulli") return false;
    for (const auto& p : s.params)
      if (p.kind != ParamExpr::Kind::Number && p.kind != ParamExpr::Kind::Table) return false;
    return true;
  };
  for (const auto& f : m.generative)
    if (!tabular_spec(f.spec)) return false;
  for (const auto& g : m.guides)
    if (!tabular_spec(g.spec)) return false;
  return true;
}

namespace {

TabularFactor compile_factor(const GraphicalModel& m, const std::vector<int>& cards,
                             const Factor& f, char letter) {
  TabularFactor tf;
  for (const auto& t : f.targets) {
    int vi = m.variable_index(t);
    require(vi >= 0 && cards[vi] > 0, "factor targets a non-discrete variable");
    tf.targets.push_back(vi);
    tf.target_cards.push_back(cards[vi]);
  }
  for (const auto& p : f.parents) {
    int vi = m.variable_index(p);
    const Variable& v = m.variables[vi];
    if (v.role == Role::Parameter) continue;
    tf.parents.push_back(vi);
    tf.parent_cards.push_back(cards[vi]);
  }

  const std::string sig = factor_signature(f, letter);
  long long rows = 1;
  for (int c : tf.parent_cards) rows *= c;
  int block = tf.block_cardinality();

  const auto& params = f.spec.params;
  bool all_numbers = std::all_of(params.begin(), params.end(), [](const ParamExpr& p) {
    return p.kind == ParamExpr::Kind::Number;
  });

  if (f.spec.family == "Categorical") {
    if (all_numbers) {
      require(tf.parents.empty(), sig + ": a literal simplex cannot depend on parents");
      require(static_cast<int>(params.size()) == block,
              sig + ": expected " + std::to_string(block) + " probabilities");
      for (const auto& p : params) tf.probs.push_back(p.number);
    } else {
      require(params.size() == 1 && params[0].kind == ParamExpr::Kind::Table,
              sig + ": expected a single table parameter");
      const NumericTable& tab = params[0].table;
      std::vector<std::string> want;
      for (int vi : tf.parents) want.push_back(m.variables[vi].name);
      require(tab.index_vars == want, sig + ": table must be indexed by the parents in order");
      std::vector<int> want_shape = tf.parent_cards;
      want_shape.push_back(block);
      require(tab.shape == want_shape, sig + ": table shape does not match parent/target arity");
      tf.probs = tab.flat;
    }
  } else if (f.spec.family == "Bernoulli") {
    require(block == 2, sig + ": Bernoulli models a two-valued block");
    std::vector<double> thetas;
    if (all_numbers) {
      require(params.size() == 1 && tf.parents.empty(), sig + ": expected one theta");
      thetas.push_back(params[0].number);
    } else {
      require(params.size() == 1 && params[0].kind == ParamExpr::Kind::Table,
              sig + ": expected a single table parameter");
      const NumericTable& tab = params[0].table;
      std::vector<std::string> want;
      for (int vi : tf.parents) want.push_back(m.variables[vi].name);
      require(tab.index_vars == want, sig + ": table must be indexed by the parents in order");
      require(tab.shape == tf.parent_cards, sig + ": theta table shape mismatch");
      thetas = tab.flat;
    }
    for (double t : thetas) {
      require(t >= 0 && t <= 1, sig + ": theta must be in [0,1]");
      tf.probs.push_back(1 - t);
      tf.probs.push_back(t);
    }
  } else {
    throw std::invalid_argument(sig + ": family " + f.spec.family +
                                " has no tabular compilation");
  }

  require(static_cast<long long>(tf.probs.size()) == rows * block, sig + ": table size mismatch");
  for (long long r = 0; r < rows; ++r) {
    double s = 0;
    for (int c = 0; c < block; ++c) {
      double p = tf.probs[r * block + c];
      require(p >= 0 && p <= 1, sig + ": probabilities must be in [0,1]");
      s += p;
    }
    require(std::fabs(s - 1.0) <= 1e-9, sig + ": row " + std::to_string(r) +
                                            " sums to " + std::to_string(s));
  }
  return tf;
}

}  // namespace

TabularModel compile_tabular(const GraphicalModel& m) {
  TabularModel tm;
  tm.model = &m;
  tm.cards.assign(m.variables.size(), 0);
  for (size_t vi = 0; vi < m.variables.size(); ++vi) {
    const Variable& v = m.variables[vi];
    if (v.role == Role::Parameter) continue;
    require(v.support.is_discrete_scalar(),
            "variable '" + v.name + "' is not discrete; enumeration needs tabular models");
    tm.cards[vi] = v.support.cardinality();
    tm.joint_states *= tm.cards[vi];
    require(tm.joint_states <= kStateBudget, "joint state space exceeds the 10^6 budget");
    (v.role == Role::Observed ? tm.observed : tm.latents).push_back(static_cast<int>(vi));
  }
  for (const auto& f : m.generative) tm.generative.push_back(compile_factor(m, tm.cards, f, 'p'));
  for (const auto& g : m.guides) tm.guides.push_back(compile_factor(m, tm.cards, g, 'q'));
  return tm;
}

std::vector<int> TabularModel::to_full(const Assignment& a) const {
  std::vector<int> full(model->variables.size(), -1);
  for (const auto& [name, value] : a) {
    int vi = model->variable_index(name);
    require(vi >= 0, "assignment names unknown variable '" + name + "'");
    require(cards[vi] > 0, "assignment sets non-discrete variable '" + name + "'");
    require(value >= 0 && value < cards[vi],
            "value " + std::to_string(value) + " out of range for '" + name + "'");
    full[vi] = value;
  }
  return full;
}

namespace {

/// Calls fn for every completion of `full` over `vars` (odometer order).
template <typename Fn>
void for_each_completion(const TabularModel& tm, const std::vector<int>& vars,
                         std::vector<int>& full, Fn&& fn) {
  if (vars.empty()) {
    fn();
    return;
  }
  size_t depth = 0;
  std::vector<int> saved(vars.size(), -1);
  for (size_t i = 0; i < vars.size(); ++i) saved[i] = full[vars[i]];
  // Only iterate variables that are not already pinned.
  std::vector<int> free_vars;
  for (int v : vars)
    if (full[v] < 0) free_vars.push_back(v);
  if (free_vars.empty()) {
    fn();
    return;
  }
  for (int v : free_vars) full[v] = 0;
  for (;;) {
    fn();
    depth = 0;
    while (depth < free_vars.size()) {
      int v = free_vars[depth];
      if (++full[v] < tm.cards[v]) break;
      full[v] = 0;
      ++depth;
    }
    if (depth == free_vars.size()) break;
  }
  for (size_t i = 0; i < vars.size(); ++i) full[vars[i]] = saved[i];
}

double joint_prob(const TabularModel& tm, const std::vector<int>& full) {
  double p = 1;
  for (const auto& tf : tm.generative) p *= tf.prob(full);
  return p;
}

}  // namespace

double exact_log_evidence(const GraphicalModel& m, const Assignment& observation) {
  TabularModel tm = compile_tabular(m);
  std::vector<int> full = tm.to_full(observation);
  for (int vi : tm.observed)
    require(full[vi] >= 0, "observation must assign every observed variable ('" +
                               m.variables[vi].name + "' is missing)");
  KahanSum s;
  for_each_completion(tm, tm.latents, full, [&] { s.add(joint_prob(tm, full)); });
  return s.sum > 0 ? std::log(s.sum) : kNegInf;
}

// ---------------------------------------------------------------------------
// Numeric ELBO
// ---------------------------------------------------------------------------

namespace {

struct CompiledElbo {
  TabularModel tm;
  ElboExpression expr;
  std::vector<const TabularFactor*> measure;  // sampling order
  std::vector<const TabularFactor*> recon;
  std::vector<std::pair<const TabularFactor*, const TabularFactor*>> ratios;  // (p, q)
};

CompiledElbo compile_elbo(const GraphicalModel& m, const QPrimeSelection& sel) {
  CompiledElbo ce{compile_tabular(m), derive(m, sel), {}, {}, {}};
  for (const auto& me : ce.expr.sampling_measure)
    ce.measure.push_back(me.is_guide ? &ce.tm.guides[me.index] : &ce.tm.generative[me.index]);
  for (int fi : ce.expr.reconstruction_terms) ce.recon.push_back(&ce.tm.generative[fi]);
  for (const auto& rt : ce.expr.ratio_terms)
    ce.ratios.emplace_back(&ce.tm.generative[rt.p_index], &ce.tm.guides[rt.q_index]);
  return ce;
}

double inner_value(const CompiledElbo& ce, const std::vector<int>& full) {
  double v = 0;
  for (const TabularFactor* tf : ce.recon) {
    double p = tf->prob(full);
    if (p == 0) return kNegInf;
    v += std::log(p);
  }
  for (const auto& [pf, qf] : ce.ratios) {
    double p = pf->prob(full);
    double q = qf->prob(full);
    if (p == 0) return kNegInf;  // q > 0 whenever the draw has positive weight
    v += std::log(p) - std::log(q);
  }
  return v;
}

}  // namespace

double numeric_elbo(const GraphicalModel& m, const QPrimeSelection& sel,
                    const Assignment& observation, const ElboStrategy& strategy) {
  if (std::holds_alternative<MonteCarlo>(strategy)) {
    const auto& mc = std::get<MonteCarlo>(strategy);
    return numeric_elbo_mc(m, sel, observation, mc.n, mc.seed).estimate;
  }

  CompiledElbo ce = compile_elbo(m, sel);
  std::vector<int> full = ce.tm.to_full(observation);
  for (int vi : ce.tm.observed)
    require(full[vi] >= 0, "observation must assign every observed variable");

  KahanSum acc;
  bool minus_inf = false;
  for_each_completion(ce.tm, ce.tm.latents, full, [&] {
    double w = 1;
    for (const TabularFactor* tf : ce.measure) w *= tf->prob(full);
    if (w == 0) return;
    double v = inner_value(ce, full);
    if (v == kNegInf) {
      minus_inf = true;
      return;
    }
    acc.add(w * v);
  });
  return minus_inf ? kNegInf : acc.sum;
}

McEstimate numeric_elbo_mc(const GraphicalModel& m, const QPrimeSelection& sel,
                           const Assignment& observation, int n, std::uint64_t seed) {
  require(n >= 1, "Monte Carlo needs n >= 1");
  CompiledElbo ce = compile_elbo(m, sel);
  std::vector<int> full = ce.tm.to_full(observation);
  for (int vi : ce.tm.observed)
    require(full[vi] >= 0, "observation must assign every observed variable");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  KahanSum sum, sum_sq;
  for (int i = 0; i < n; ++i) {
    // Ancestral draw along the sampling measure.
    for (const TabularFactor* tf : ce.measure) {
      int row = tf->row_of(full);
      int block = tf->block_cardinality();
      const double* rowp = tf->probs.data() + static_cast<size_t>(row) * block;
      double r = unif(rng), cum = 0;
      int cell = block - 1;
      for (int c = 0; c < block; ++c) {
        cum += rowp[c];
        if (r < cum) {
          cell = c;
          break;
        }
      }
      for (size_t t = tf->targets.size(); t-- > 0;) {
        full[tf->targets[t]] = cell % tf->target_cards[t];
        cell /= tf->target_cards[t];
      }
    }
    double v = inner_value(ce, full);
    sum.add(v);
    sum_sq.add(v * v);
  }
  McEstimate est;
  est.n = n;
  est.estimate = sum.sum / n;
  if (n > 1) {
    double var = (sum_sq.sum - n * est.estimate * est.estimate) / (n - 1);
    est.std_error = std::sqrt(std::max(var, 0.0) / n);
  }
  return est;
}

// ---------------------------------------------------------------------------
// True posteriors by enumeration
// ---------------------------------------------------------------------------

std::vector<Factor> true_posterior_guides(const GraphicalModel& m) {
  TabularModel tm = compile_tabular(m);

  // Latent blocks in generative declaration order; the chain rule makes the
  // product of the conditionals equal p(Z|X) for any fixed order.
  std::vector<int> block_factors;
  for (size_t fi = 0; fi < m.generative.size(); ++fi) {
    bool latent_block = false;
    for (const auto& t : m.generative[fi].targets)
      if (m.find_variable(t)->role == Role::Latent) latent_block = true;
    if (latent_block) block_factors.push_back(static_cast<int>(fi));
  }

  std::vector<Factor> guides;
  std::vector<std::string> context;  // observed vars, then earlier blocks
  for (int vi : tm.observed) context.push_back(m.variables[vi].name);

  for (int fi : block_factors) {
    const Factor& gen = m.generative[fi];
    Factor g;
    g.targets = gen.targets;
    g.parents = context;

    std::vector<int> ctx_vars, ctx_cards;
    for (const auto& c : context) {
      int vi = m.variable_index(c);
      ctx_vars.push_back(vi);
      ctx_cards.push_back(tm.cards[vi]);
    }
    std::vector<int> blk_vars, blk_cards;
    for (const auto& t : gen.targets) {
      int vi = m.variable_index(t);
      blk_vars.push_back(vi);
      blk_cards.push_back(tm.cards[vi]);
    }
    int block = 1;
    for (int c : blk_cards) block *= c;
    long long rows = 1;
    for (int c : ctx_cards) rows *= c;

    NumericTable tab;
    tab.index_vars = context;
    tab.shape = ctx_cards;
    tab.shape.push_back(block);
    tab.flat.assign(static_cast<size_t>(rows) * block, 0.0);

    // Enumerate the context; for each row, marginalize everything else.
    std::vector<int> full(m.variables.size(), -1);
    std::vector<int> ctx_value(ctx_vars.size(), 0);
    for (long long row = 0; row < rows; ++row) {
      long long rest = row;
      for (size_t i = ctx_vars.size(); i-- > 0;) {
        ctx_value[i] = static_cast<int>(rest % ctx_cards[i]);
        rest /= ctx_cards[i];
      }
      std::fill(full.begin(), full.end(), -1);
      for (size_t i = 0; i < ctx_vars.size(); ++i) full[ctx_vars[i]] = ctx_value[i];

      std::vector<double> mass(block, 0.0);
      std::vector<int> free_latents;
      for (int v : tm.latents)
        if (full[v] < 0) free_latents.push_back(v);
      for_each_completion(tm, free_latents, full, [&] {
        int cell = 0;
        for (size_t i = 0; i < blk_vars.size(); ++i)
          cell = cell * blk_cards[i] + full[blk_vars[i]];
        mass[cell] += joint_prob(tm, full);
      });
      double total = std::accumulate(mass.begin(), mass.end(), 0.0);
      for (int c = 0; c < block; ++c)
        tab.flat[static_cast<size_t>(row) * block + c] =
            total > 0 ? mass[c] / total : 1.0 / block;  // unreachable rows: uniform
    }

    g.spec.family = "Categorical";
    if (context.empty()) {
      for (double p : tab.flat) g.spec.params.push_back(ParamExpr::make_number(p));
    } else {
      g.spec.params.push_back(ParamExpr::make_table(std::move(tab)));
    }
    guides.push_back(std::move(g));
    for (const auto& t : gen.targets) context.push_back(t);
  }
  return guides;
}

std::vector<Assignment> positive_observations(const GraphicalModel& m) {
  TabularModel tm = compile_tabular(m);
  std::vector<Assignment> out;
  std::vector<int> full(m.variables.size(), -1);
  for_each_completion(tm, tm.observed, full, [&] {
    KahanSum s;
    std::vector<int> inner = full;
    for_each_completion(tm, tm.latents, inner, [&] { s.add(joint_prob(tm, inner)); });
    if (s.sum > 0) {
      Assignment a;
      for (int vi : tm.observed) a[m.variables[vi].name] = full[vi];
      out.push_back(std::move(a));
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// ML theorems
// ---------------------------------------------------------------------------

std::vector<double> brute_force_mle(const DiscreteDataset& data) {
  require(!data.space.empty(), "empty sample space");
  require(data.total() >= 1, "empty dataset");
  require(data.space.size() <= 10'000, "sample space exceeds the 10^4 budget");
  std::vector<double> q = data.empirical();
  const size_t k = q.size();

  // Exponentiated-gradient ascent in the log domain; the step is scaled so
  // the largest exponent move is 1.
  std::vector<double> logp(k, -std::log(static_cast<double>(k)));
  std::vector<double> p(k, 1.0 / static_cast<double>(k));
  for (int iter = 0; iter < 10'000; ++iter) {
    double gmax = 0;
    for (size_t i = 0; i < k; ++i)
      if (q[i] > 0) gmax = std::max(gmax, q[i] / p[i]);
    if (gmax == 0) break;
    double eta = 1.0 / gmax;
    double lmax = kNegInf;
    for (size_t i = 0; i < k; ++i) {
      double g = q[i] > 0 ? q[i] / p[i] : 0.0;
      logp[i] += eta * g;
      lmax = std::max(lmax, logp[i]);
    }
    double z = 0;
    for (size_t i = 0; i < k; ++i) z += std::exp(logp[i] - lmax);
    double logz = lmax + std::log(z);
    double delta = 0;
    for (size_t i = 0; i < k; ++i) {
      logp[i] -= logz;
      double next = std::exp(logp[i]);
      delta = std::max(delta, std::fabs(next - p[i]));
      p[i] = next;
    }
    if (delta < 1e-15) break;
  }
  return p;
}

SoundnessResult soundness_check(std::span<const double> dist, const ValidityPartition& part) {
  require(dist.size() == part.valid.size(), "distribution/partition size mismatch");
  SoundnessResult r;
  for (size_t i = 0; i < dist.size(); ++i) {
    if (!part.valid[i] && dist[i] > kMassEps) {
      r.sound = false;
      r.violations.push_back(static_cast<int>(i));
    }
  }
  return r;
}

std::vector<double> soundness_repair(std::span<const double> dist,
                                     const ValidityPartition& part) {
  require(dist.size() == part.valid.size(), "distribution/partition size mismatch");
  double c = 0;
  for (size_t i = 0; i < dist.size(); ++i)
    if (!part.valid[i]) c += dist[i];
  require(c < 1, "all mass is invalid; nothing to repair");
  std::vector<double> out(dist.size(), 0.0);
  for (size_t i = 0; i < dist.size(); ++i)
    if (part.valid[i]) out[i] = dist[i] / (1 - c);
  return out;
}

CompletenessResult completeness_check(const DiscreteDataset& data,
                                      const ValidityPartition& part,
                                      const EquivalencePartition& classes) {
  const size_t n = data.space.size();
  require(part.valid.size() == n && classes.class_of.size() == n,
          "partition sizes must match the sample space");
  for (size_t i = 0; i < n; ++i)
    require(data.counts[i] == 0 || part.valid[i],
            "dataset contains the invalid point '" + data.space[i] + "'");

  // Theorem hypothesis: no two data points share a class.
  std::set<int> touched;
  for (size_t i = 0; i < n; ++i) {
    if (data.counts[i] == 0) continue;
    require(touched.insert(classes.class_of[i]).second,
            "two dataset points fall into the same equivalence class");
  }

  std::vector<long long> class_size(classes.num_classes, 0);
  std::vector<long long> class_count(classes.num_classes, 0);
  for (size_t i = 0; i < n; ++i) {
    ++class_size[classes.class_of[i]];
    class_count[classes.class_of[i]] += data.counts[i];
  }

  CompletenessResult r;
  r.generalizes = true;
  for (size_t i = 0; i < n; ++i)
    if (part.valid[i] && class_count[classes.class_of[i]] == 0) r.generalizes = false;

  long long total = data.total();
  r.optimum.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double qc = static_cast<double>(class_count[classes.class_of[i]]) /
                static_cast<double>(total);
    r.optimum[i] = qc / static_cast<double>(class_size[classes.class_of[i]]);
  }
  r.complete = true;
  for (size_t i = 0; i < n; ++i)
    if (part.valid[i] && !(r.optimum[i] > 0)) r.complete = false;
  return r;
}

// ---------------------------------------------------------------------------
// Estimators and identities
// ---------------------------------------------------------------------------

double mc_expectation(const DistributionInstance& d, const std::function<double(const Value&)>& g,
                      int n, std::uint64_t seed) {
  require(n >= 1, "Monte Carlo needs n >= 1");
  std::vector<Value> xs = sample(d, seed, n);
  KahanSum s;
  for (const Value& x : xs) s.add(g(x));
  return s.sum / n;
}

namespace {
double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }
}  // namespace

double inclusion_exclusion_check(const Joint2& j) {
  std::vector<double> px(j.nx, 0.0), py(j.ny, 0.0);
  for (int x = 0; x < j.nx; ++x)
    for (int y = 0; y < j.ny; ++y) {
      px[x] += j.pxy(x, y);
      py[y] += j.pxy(x, y);
    }
  double worst = 0;
  for (int x = 0; x < j.nx; ++x)
    for (int y = 0; y < j.ny; ++y) {
      double p_or = 0;
      for (int a = 0; a < j.nx; ++a)
        for (int b = 0; b < j.ny; ++b)
          if (a == x || b == y) p_or += j.pxy(a, b);
      worst = std::max(worst, std::fabs(p_or - px[x] - py[y] + j.pxy(x, y)));
    }
  return worst;
}

EntropyIdentityReport entropy_identities_check(const Joint2& j) {
  std::vector<double> px(j.nx, 0.0), py(j.ny, 0.0);
  double hxy = 0;
  for (int x = 0; x < j.nx; ++x)
    for (int y = 0; y < j.ny; ++y) {
      px[x] += j.pxy(x, y);
      py[y] += j.pxy(x, y);
      hxy -= xlogx(j.pxy(x, y));
    }
  double hx = 0, hy = 0;
  for (double v : px) hx -= xlogx(v);
  for (double v : py) hy -= xlogx(v);
  // H(x|y) = E_{p(x,y)}[-log p(x|y)]
  double hx_given_y = 0;
  for (int x = 0; x < j.nx; ++x)
    for (int y = 0; y < j.ny; ++y) {
      double pxy = j.pxy(x, y);
      if (pxy > 0) hx_given_y -= pxy * std::log(pxy / py[y]);
    }
  EntropyIdentityReport r;
  r.h_joint = hxy;
  r.h_x = hx;
  r.h_y = hy;
  r.h_x_given_y = hx_given_y;
  r.chain_rule_gap = std::fabs(hxy - (hy + hx_given_y));
  r.subadditivity_gap = hx + hy - hxy;
  r.independent = true;
  for (int x = 0; x < j.nx; ++x)
    for (int y = 0; y < j.ny; ++y)
      if (std::fabs(j.pxy(x, y) - px[x] * py[y]) > 1e-12) r.independent = false;
  return r;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

std::vector<Assignment> assignments_from_jsonl(std::istream& in, const GraphicalModel& m) {
  std::vector<Assignment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
    require(j.is_object(), "line " + std::to_string(lineno) + ": expected a JSON object");
    Assignment a;
    for (const auto& [key, value] : j.items()) {
      require(m.find_variable(key) != nullptr,
              "line " + std::to_string(lineno) + ": unknown variable '" + key + "'");
      if (value.is_boolean())
        a[key] = value.get<bool>() ? 1 : 0;
      else
        a[key] = value.get<int>();
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string point_label(const GraphicalModel& m, const Assignment& a) {
  std::string s;
  for (const auto& v : m.variables) {
    auto it = a.find(v.name);
    if (it == a.end()) continue;
    if (!s.empty()) s += ",";
    s += v.name + "=" + std::to_string(it->second);
  }
  return s;
}

DiscreteDataset dataset_from_assignments(const GraphicalModel& m,
                                         const std::vector<Assignment>& records) {
  TabularModel tm = compile_tabular(m);
  DiscreteDataset d;
  std::map<std::string, int> index;
  std::vector<int> full(m.variables.size(), -1);
  for_each_completion(tm, tm.observed, full, [&] {
    Assignment a;
    for (int vi : tm.observed) a[m.variables[vi].name] = full[vi];
    std::string label = point_label(m, a);
    index[label] = static_cast<int>(d.space.size());
    d.space.push_back(label);
  });
  d.counts.assign(d.space.size(), 0);
  for (const auto& rec : records) {
    std::string label = point_label(m, rec);
    auto it = index.find(label);
    require(it != index.end(), "record '" + label + "' does not assign every observed variable");
    ++d.counts[it->second];
  }
  return d;
}

namespace {

Assignment assignment_from_json(const nlohmann::json& j, const GraphicalModel& m) {
  Assignment a;
  for (const auto& [key, value] : j.items()) {
    require(m.find_variable(key) != nullptr, "unknown variable '" + key + "'");
    a[key] = value.is_boolean() ? (value.get<bool>() ? 1 : 0) : value.get<int>();
  }
  return a;
}

int point_index(const DiscreteDataset& d, const std::string& label) {
  auto it = std::find(d.space.begin(), d.space.end(), label);
  require(it != d.space.end(), "point '" + label + "' is not in the sample space");
  return static_cast<int>(it - d.space.begin());
}

}  // namespace

ValidityPartition validity_from_json(const std::string& json_text, const GraphicalModel& m,
                                     const DiscreteDataset& data) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  require(j.is_array(), "validity must be a JSON array of points");
  ValidityPartition part;
  part.valid.assign(data.space.size(), 0);
  for (const auto& pt : j)
    part.valid[point_index(data, point_label(m, assignment_from_json(pt, m)))] = 1;
  return part;
}

EquivalencePartition classes_from_json(const std::string& json_text, const GraphicalModel& m,
                                       const DiscreteDataset& data) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  require(j.is_array(), "classes must be a JSON array of arrays of points");
  EquivalencePartition part;
  part.class_of.assign(data.space.size(), -1);
  int next = 0;
  for (const auto& cls : j) {
    require(cls.is_array(), "each class must be an array of points");
    for (const auto& pt : cls) {
      int idx = point_index(data, point_label(m, assignment_from_json(pt, m)));
      require(part.class_of[idx] == -1, "point listed in two classes");
      part.class_of[idx] = next;
    }
    ++next;
  }
  for (auto& c : part.class_of)
    if (c == -1) c = next++;  // unlisted points become singletons
  part.num_classes = next;
  return part;
}

}  // namespace elboforge
