#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace elboforge {

// ---------------------------------------------------------------------------
// Pseudocount-parameterized conjugate states. Everything is immutable;
// updates return new states.
// ---------------------------------------------------------------------------

struct BetaState {
  double theta0;  // success rate in [0,1]
  double n0;      // total pseudocount >= 0

  /// Haldane limit: zero pseudo-evidence, no proper density.
  bool degenerate() const { return n0 == 0; }
};

struct DirichletState {
  std::vector<double> p0;  // simplex
  double n0;

  bool degenerate() const { return n0 == 0; }
};

struct NormalMeanState {
  double mu0;
  double sigma2;  // known observation variance
  double n0;
};

struct ScaledInvChiSqState {
  double n0;
  double sigma0_sq;
};

/// Validated constructors (pseudocounts >= 0, simplexes sum to 1 within
/// 1e-12, sigma^2 > 0). Throw std::invalid_argument.
BetaState make_beta_state(double theta0, double n0);
DirichletState make_dirichlet_state(std::vector<double> p0, double n0);
NormalMeanState make_normal_mean_state(double mu0, double sigma2, double n0);
ScaledInvChiSqState make_scaled_inv_chi_sq_state(double n0, double sigma0_sq);

// Named presets for the Bernoulli/Binomial rate.
BetaState jeffreys_prior();       // N0 = 1 (alpha = beta = 1/2)
BetaState bayes_laplace_prior();  // N0 = 2 (alpha = beta = 1)
BetaState haldane_prior();        // N0 = 0, degenerate

// Conversions to and from the traditional (alpha, beta) bookkeeping.
BetaState beta_from_alpha_beta(double alpha, double beta);
std::pair<double, double> beta_alpha_beta(const BetaState& s);
DirichletState dirichlet_from_alpha(std::vector<double> alpha);
std::vector<double> dirichlet_alpha_vector(const DirichletState& s);

// ---------------------------------------------------------------------------
// Sufficient statistics and updates
// ---------------------------------------------------------------------------

struct BernoulliStat {
  long long n = 0;
  long long successes = 0;
};

struct GaussianStat {
  long long n = 0;
  double sum = 0;
  double sum_sq = 0;
};

/// Posterior rate is the pseudocount-weighted average of prior rate and
/// empirical rate; counts add. Zero observations return the prior unchanged.
BetaState beta_update(const BetaState& prior, const BernoulliStat& obs);

/// Componentwise pseudocount addition in alpha form, reported back in
/// (p0, N0) form. Throws on count-vector length mismatch.
DirichletState dirichlet_update(const DirichletState& prior,
                                const std::vector<long long>& counts);

/// Single-observation rule; batches fold to (N0*mu0 + sum)/(N0 + n).
NormalMeanState gaussian_mean_update(const NormalMeanState& prior, double x);
NormalMeanState gaussian_mean_update(const NormalMeanState& prior, const GaussianStat& obs);

/// Posterior distribution of the mean: Normal(mu0, sigma2/N0).
std::pair<double, double> posterior_mean_distribution(const NormalMeanState& s);

ScaledInvChiSqState variance_update(const ScaledInvChiSqState& prior, double x, double mu0,
                                    double mu_hat);

// ---------------------------------------------------------------------------
// Generic exponential-family natural-parameter update
// ---------------------------------------------------------------------------

struct ExpFamState {
  double n = 0;                 // pseudo observation count N
  std::vector<double> m;        // accumulated statistic M
};

using StatisticMap = std::function<std::vector<double>(double)>;

StatisticMap bernoulli_statistic();  // D(x) = [x]
StatisticMap normal_statistic();     // D(x) = (1, x, x^2)

/// (N, M) -> (N + n, M + sum D(x_i)). Throws on statistic dimension mismatch.
ExpFamState expfam_update(const ExpFamState& prior, std::span<const double> xs,
                          const StatisticMap& statistic);

// Beta <-> natural bookkeeping used by the Bernoulli path; expfam_update with
// bernoulli_statistic reproduces beta_update bit for bit through these.
ExpFamState expfam_from_beta(const BetaState& s);
BetaState beta_from_expfam(const ExpFamState& s);

// ---------------------------------------------------------------------------
// JSON surface: {"family": ..., "prior": {...}, "observations": [...]}.
// Accepts both the pseudocount and the traditional parameterizations,
// answers in pseudocount form.
// ---------------------------------------------------------------------------

nlohmann::json conjugate_update_json(const nlohmann::json& request);

}  // namespace elboforge
