#include "elboforge/conjugate.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace elboforge {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_simplex(const std::vector<double>& p) {
  require(!p.empty(), "simplex must be non-empty");
  double s = 0;
  for (double v : p) {
    require(v >= 0 && v <= 1, "simplex components must be in [0,1]");
    s += v;
  }
  require(std::fabs(s - 1.0) <= 1e-12, "simplex must sum to 1 within 1e-12");
}

}  // namespace

BetaState make_beta_state(double theta0, double n0) {
  require(theta0 >= 0 && theta0 <= 1, "theta0 must be in [0,1]");
  require(n0 >= 0, "pseudocount must be >= 0");
  return {theta0, n0};
}

DirichletState make_dirichlet_state(std::vector<double> p0, double n0) {
  check_simplex(p0);
  require(n0 >= 0, "pseudocount must be >= 0");
  return {std::move(p0), n0};
}

NormalMeanState make_normal_mean_state(double mu0, double sigma2, double n0) {
  require(sigma2 > 0, "sigma^2 must be > 0");
  require(n0 >= 0, "pseudocount must be >= 0");
  return {mu0, sigma2, n0};
}

ScaledInvChiSqState make_scaled_inv_chi_sq_state(double n0, double sigma0_sq) {
  require(n0 >= 0, "pseudocount must be >= 0");
  require(sigma0_sq >= 0, "sigma0^2 must be >= 0");
  return {n0, sigma0_sq};
}

BetaState jeffreys_prior() { return {0.5, 1.0}; }
BetaState bayes_laplace_prior() { return {0.5, 2.0}; }
BetaState haldane_prior() { return {0.5, 0.0}; }

BetaState beta_from_alpha_beta(double alpha, double beta) {
  require(alpha >= 0 && beta >= 0, "alpha and beta must be >= 0");
  double n = alpha + beta;
  return {n == 0 ? 0.5 : alpha / n, n};
}

std::pair<double, double> beta_alpha_beta(const BetaState& s) {
  return {s.theta0 * s.n0, (1 - s.theta0) * s.n0};
}

DirichletState dirichlet_from_alpha(std::vector<double> alpha) {
  require(!alpha.empty(), "alpha must be non-empty");
  double n = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  std::vector<double> p0(alpha.size(), 1.0 / static_cast<double>(alpha.size()));
  if (n > 0)
    for (size_t i = 0; i < alpha.size(); ++i) p0[i] = alpha[i] / n;
  return {std::move(p0), n};
}

std::vector<double> dirichlet_alpha_vector(const DirichletState& s) {
  std::vector<double> a(s.p0.size());
  for (size_t i = 0; i < s.p0.size(); ++i) a[i] = s.p0[i] * s.n0;
  return a;
}

BetaState beta_update(const BetaState& prior, const BernoulliStat& obs) {
  require(obs.n >= 0 && obs.successes >= 0 && obs.successes <= obs.n,
          "need 0 <= successes <= trials");
  if (obs.n == 0) return prior;  // the rate formula is undefined at N=0
  double n_hat = static_cast<double>(obs.n);
  double theta = (prior.n0 * prior.theta0 + static_cast<double>(obs.successes)) /
                 (prior.n0 + n_hat);
  return {theta, prior.n0 + n_hat};
}

DirichletState dirichlet_update(const DirichletState& prior,
                                const std::vector<long long>& counts) {
  if (counts.size() != prior.p0.size())
    throw std::invalid_argument("count vector length " + std::to_string(counts.size()) +
                                " does not match arity " + std::to_string(prior.p0.size()));
  long long total = 0;
  for (long long c : counts) {
    require(c >= 0, "counts must be >= 0");
    total += c;
  }
  if (total == 0) return prior;
  std::vector<double> alpha = dirichlet_alpha_vector(prior);
  for (size_t i = 0; i < alpha.size(); ++i) alpha[i] += static_cast<double>(counts[i]);
  double n = prior.n0 + static_cast<double>(total);
  std::vector<double> p0(alpha.size());
  for (size_t i = 0; i < alpha.size(); ++i) p0[i] = alpha[i] / n;
  return {std::move(p0), n};
}

NormalMeanState gaussian_mean_update(const NormalMeanState& prior, double x) {
  double mu = (prior.n0 * prior.mu0 + x) / (prior.n0 + 1);
  return {mu, prior.sigma2, prior.n0 + 1};
}

NormalMeanState gaussian_mean_update(const NormalMeanState& prior, const GaussianStat& obs) {
  require(obs.n >= 0, "observation count must be >= 0");
  if (obs.n == 0) return prior;
  double n_hat = static_cast<double>(obs.n);
  double mu = (prior.n0 * prior.mu0 + obs.sum) / (prior.n0 + n_hat);
  return {mu, prior.sigma2, prior.n0 + n_hat};
}

std::pair<double, double> posterior_mean_distribution(const NormalMeanState& s) {
  require(s.n0 > 0, "mean distribution needs a positive count");
  return {s.mu0, s.sigma2 / s.n0};
}

ScaledInvChiSqState variance_update(const ScaledInvChiSqState& prior, double x, double mu0,
                                    double mu_hat) {
  double sigma_sq =
      ((prior.n0 + 1) * prior.sigma0_sq + (x - mu_hat) * (x - mu0)) / (prior.n0 + 2);
  return {prior.n0 + 1, sigma_sq};
}

StatisticMap bernoulli_statistic() {
  return [](double x) {
    if (x != 0.0 && x != 1.0) throw std::invalid_argument("Bernoulli observation must be 0 or 1");
    return std::vector<double>{x};
  };
}

StatisticMap normal_statistic() {
  return [](double x) { return std::vector<double>{1.0, x, x * x}; };
}

ExpFamState expfam_update(const ExpFamState& prior, std::span<const double> xs,
                          const StatisticMap& statistic) {
  if (xs.empty()) return prior;
  // Sum the statistics first, then add once: (N, M) -> (N + n, M + sum D(x_i)).
  std::vector<double> sum;
  for (double x : xs) {
    std::vector<double> d = statistic(x);
    if (sum.empty()) sum.assign(d.size(), 0.0);
    if (d.size() != sum.size())
      throw std::invalid_argument("statistic dimension " + std::to_string(d.size()) +
                                  " does not match state dimension " +
                                  std::to_string(sum.size()));
    for (size_t i = 0; i < d.size(); ++i) sum[i] += d[i];
  }
  ExpFamState post = prior;
  if (post.m.empty()) post.m.assign(sum.size(), 0.0);
  if (sum.size() != post.m.size())
    throw std::invalid_argument("statistic dimension " + std::to_string(sum.size()) +
                                " does not match state dimension " +
                                std::to_string(post.m.size()));
  for (size_t i = 0; i < sum.size(); ++i) post.m[i] += sum[i];
  post.n += static_cast<double>(xs.size());
  return post;
}

ExpFamState expfam_from_beta(const BetaState& s) {
  return {s.n0, {s.n0 * s.theta0}};
}

BetaState beta_from_expfam(const ExpFamState& s) {
  if (s.m.size() != 1) throw std::invalid_argument("not a Bernoulli natural state");
  if (s.n == 0) return {0.5, 0.0};
  return {s.m[0] / s.n, s.n};
}

// ---------------------------------------------------------------------------
// JSON surface
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

BetaState beta_prior_from_json(const json& p) {
  if (p.contains("alpha") && p.contains("beta"))
    return beta_from_alpha_beta(p["alpha"].get<double>(), p["beta"].get<double>());
  return make_beta_state(p.at("theta0").get<double>(), p.at("N0").get<double>());
}

DirichletState dirichlet_prior_from_json(const json& p) {
  if (p.contains("alpha")) return dirichlet_from_alpha(p["alpha"].get<std::vector<double>>());
  return make_dirichlet_state(p.at("p0").get<std::vector<double>>(), p.at("N0").get<double>());
}

}  // namespace

json conjugate_update_json(const json& request) {
  std::string family = request.at("family").get<std::string>();
  const json& prior = request.at("prior");
  const json& obs = request.at("observations");

  if (family == "beta" || family == "Beta") {
    BetaState s = beta_prior_from_json(prior);
    BernoulliStat stat;
    if (obs.is_object()) {
      stat.n = obs.at("trials").get<long long>();
      stat.successes = obs.at("successes").get<long long>();
    } else {
      for (const auto& v : obs) {
        ++stat.n;
        double x = v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.get<double>();
        if (x != 0.0 && x != 1.0)
          throw std::invalid_argument("beta observations must be 0/1 or booleans");
        stat.successes += x == 1.0 ? 1 : 0;
      }
    }
    BetaState post = beta_update(s, stat);
    json out{{"family", "Beta"}, {"theta0", post.theta0}, {"N0", post.n0}};
    if (post.degenerate()) out["degenerate"] = true;
    return out;
  }
  if (family == "dirichlet" || family == "Dirichlet") {
    DirichletState s = dirichlet_prior_from_json(prior);
    std::vector<long long> counts(s.p0.size(), 0);
    if (obs.is_object()) {
      counts = obs.at("counts").get<std::vector<long long>>();
    } else {
      for (const auto& v : obs) {
        long long c = v.get<long long>();
        if (c < 0 || c >= static_cast<long long>(counts.size()))
          throw std::invalid_argument("category index out of range");
        ++counts[c];
      }
    }
    DirichletState post = dirichlet_update(s, counts);
    json out{{"family", "Dirichlet"}, {"p0", post.p0}, {"N0", post.n0}};
    if (post.degenerate()) out["degenerate"] = true;
    return out;
  }
  if (family == "normal-mean" || family == "NormalMean") {
    NormalMeanState s = make_normal_mean_state(prior.at("mu0").get<double>(),
                                               prior.at("sigma2").get<double>(),
                                               prior.at("N0").get<double>());
    for (const auto& v : obs) s = gaussian_mean_update(s, v.get<double>());
    json out{{"family", "NormalMean"}, {"mu0", s.mu0}, {"sigma2", s.sigma2}, {"N0", s.n0}};
    if (s.n0 > 0) {
      auto [mu, var] = posterior_mean_distribution(s);
      out["mean_distribution"] = {{"family", "Normal"}, {"mu", mu}, {"variance", var}};
    }
    return out;
  }
  if (family == "variance" || family == "ScaledInvChiSq") {
    ScaledInvChiSqState s = make_scaled_inv_chi_sq_state(prior.at("N0").get<double>(),
                                                         prior.at("sigma0_sq").get<double>());
    for (const auto& v : obs)
      s = variance_update(s, v.at("x").get<double>(), v.at("mu0").get<double>(),
                          v.at("mu_hat").get<double>());
    return json{{"family", "ScaledInvChiSq"}, {"N0", s.n0}, {"sigma0_sq", s.sigma0_sq}};
  }
  throw std::invalid_argument("unknown conjugate family: " + family);
}

}  // namespace elboforge
