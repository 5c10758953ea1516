#pragma once

// Test-only numeric oracles, independent of the library's closed forms:
// adaptive quadrature / direct summation for KL and normalization, and a
// grid-Bayes posterior for the conjugate updates.

#include <functional>
#include <vector>

#include "elboforge/zoo.hpp"

namespace elboforge::testing {

/// Adaptive quadrature of f over [a, b] (GSL QAGS).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double epsabs = 1e-12, double epsrel = 1e-10);

/// Quadrature over the whole real line (GSL QAGI).
double integrate_real_line(const std::function<double(double)>& f, double epsabs = 1e-12,
                           double epsrel = 1e-10);

/// Integral of exp(log_prob) over the family's support. Discrete families sum.
double normalization_oracle(const DistributionInstance& d);

/// KL(q||p) by quadrature/summation, no closed forms involved. Handles the
/// five closed-form families, including 2- and 3-category Dirichlets.
double kl_oracle(const DistributionInstance& q, const DistributionInstance& p);

/// E_q[-log p] by quadrature/summation.
double cross_entropy_oracle(const DistributionInstance& q, const DistributionInstance& p);

/// Differential entropy by quadrature (continuous scalar families).
double entropy_oracle(const DistributionInstance& d);

/// Pointwise grid comparison of a closed-form Beta posterior density against
/// the grid-normalized prior*likelihood product. Returns the worst relative
/// error over an interior 1000-point grid.
double beta_grid_bayes_error(double prior_theta0, double prior_n0, long long successes,
                             long long trials, double post_theta0, double post_n0);

/// Same for a Dirichlet with 3 categories on a triangular simplex grid of
/// roughly 1000 interior points.
double dirichlet3_grid_bayes_error(const std::vector<double>& prior_p0, double prior_n0,
                                   const std::vector<long long>& counts,
                                   const std::vector<double>& post_p0, double post_n0);

}  // namespace elboforge::testing
