#include "elboforge/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_psi.h>

namespace elboforge {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSimplexTol = 1e-12;

std::vector<FamilyDescriptor> build_registry() {
  std::vector<FamilyDescriptor> r;
  auto dist = [&](FamilyDescriptor d) { r.push_back(std::move(d)); };

  dist({.name = "Normal",
        .support = SupportClass::Real,
        .parameters = {{"mu", "location"}, {"sigma", "scale > 0"}},
        .max_entropy_constraints = {"X in R", "E[X] fixed", "Var[X] fixed"},
        .conjugate_prior = std::nullopt,
        .parameter_conjugates = {{"mean", "Normal"}, {"variance", "ScaledInvChiSq"}},
        .ops = {.log_prob = true, .entropy = true, .kl = true, .sample = true,
                .nll_formula = true}});
  dist({.name = "Laplace",
        .support = SupportClass::Real,
        .parameters = {{"mu", "location"}, {"b", "scale > 0"}},
        .max_entropy_constraints = {"X in R", "E[X] fixed", "E[|X - mu|] fixed"},
        .heavy_tail = true,
        .sparse = true,
        .ops = {.log_prob = true, .entropy = true, .sample = true, .nll_formula = true}});
  dist({.name = "Bernoulli",
        .support = SupportClass::Boolean,
        .parameters = {{"theta", "probability of true"}},
        .max_entropy_constraints = {"X boolean"},
        .conjugate_prior = "Beta",
        .ops = {.log_prob = true, .entropy = true, .kl = true, .sample = true,
                .nll_formula = true}});
  dist({.name = "Categorical",
        .support = SupportClass::Categorical,
        .parameters = {{"p", "simplex over categories"}},
        .max_entropy_constraints = {"X in a finite unordered set"},
        .conjugate_prior = "Dirichlet",
        .ops = {.log_prob = true, .entropy = true, .kl = true, .sample = true,
                .nll_formula = true}});
  dist({.name = "Binomial",
        .support = SupportClass::BoundedInt,
        .parameters = {{"n", "trial count"}, {"theta", "success probability"}},
        .max_entropy_constraints = {"X in {0..n}", "ordinal with equal intervals"},
        .conjugate_prior = "Beta",
        .ops = {.log_prob = true}});
  dist({.name = "Uniform",
        .support = SupportClass::Interval,
        .parameters = {{"l", "lower bound"}, {"u", "upper bound > l"}},
        .max_entropy_constraints = {"X in [l, u]"},
        .conjugate_prior = "Pareto",
        .parameter_conjugates = {{"bound", "Pareto"}},
        .ops = {.log_prob = true, .entropy = true, .sample = true}});
  dist({.name = "Beta",
        .support = SupportClass::Interval,
        .parameters = {{"theta0", "rate in [0,1]"}, {"N0", "pseudocount >= 0"}},
        .max_entropy_constraints = {},
        .ops = {.log_prob = true, .entropy = true, .kl = true, .sample = true}});
  dist({.name = "Dirichlet",
        .support = SupportClass::Simplex,
        .parameters = {{"p0", "simplex"}, {"N0", "pseudocount >= 0"}},
        .max_entropy_constraints = {},
        .ops = {.log_prob = true, .entropy = true, .kl = true}});
  dist({.name = "Gamma",
        .support = SupportClass::PositiveReal,
        .parameters = {{"k", "shape > 0"}, {"theta", "scale > 0"}},
        .max_entropy_constraints = {"X in R+", "E[X] fixed", "E[log X] fixed"},
        .ops = {.log_prob = true, .entropy = true, .sample = true}});
  dist({.name = "Const",
        .support = SupportClass::Any,
        .parameters = {{"c", "the point"}},
        .max_entropy_constraints = {},
        .has_variance = false,
        .ops = {.log_prob = true}});
  dist({.name = "ScaledInvChiSq",
        .support = SupportClass::PositiveReal,
        .parameters = {{"nu", "pseudocount"}, {"sigma0_sq", "scale"}},
        .max_entropy_constraints = {}});

  // Metadata-only entries from the usage table: supports, flags, and
  // max-entropy notes, no numerics.
  dist({.name = "Cauchy",
        .support = SupportClass::Real,
        .parameters = {{"x0", "median"}, {"gamma", "scale"}},
        .max_entropy_constraints = {"X in R", "E[log(1+(X-x0)^2/gamma^2)] = log 4"},
        .has_mean = false,
        .has_variance = false,
        .heavy_tail = true});
  dist({.name = "Logistic",
        .support = SupportClass::Real,
        .parameters = {{"mu", "location"}, {"s", "scale"}},
        .max_entropy_constraints = {"X in R (logit of a probability)"},
        .heavy_tail = true});
  dist({.name = "Horseshoe",
        .support = SupportClass::Real,
        .parameters = {{"mu", "location"}, {"tau", "scale"}},
        .max_entropy_constraints = {},
        .heavy_tail = true,
        .sparse = true});
  dist({.name = "LogNormal",
        .support = SupportClass::PositiveReal,
        .parameters = {{"mu", "log-space mean"}, {"sigma", "log-space scale"}},
        .max_entropy_constraints = {"X in R+", "E[log X] fixed", "Var[log X] fixed"}});
  dist({.name = "Pareto",
        .support = SupportClass::PositiveReal,
        .parameters = {{"alpha", "tail index"}, {"theta", "lower bound"}},
        .max_entropy_constraints = {"X in [theta, inf)", "E[log X] fixed"},
        .has_mean = false,
        .has_variance = false,
        .heavy_tail = true});
  dist({.name = "GeneralizedPareto",
        .support = SupportClass::PositiveReal,
        .parameters = {{"mu", "location"}, {"sigma", "scale"}, {"xi", "shape"}},
        .max_entropy_constraints = {},
        .has_mean = false,
        .has_variance = false,
        .heavy_tail = true});
  dist({.name = "Gumbel",
        .support = SupportClass::Real,
        .parameters = {{"mu", "location"}, {"sigma", "scale"}},
        .max_entropy_constraints = {}});
  dist({.name = "Frechet",
        .support = SupportClass::PositiveReal,
        .parameters = {{"alpha", "shape"}, {"s", "scale"}},
        .max_entropy_constraints = {},
        .has_mean = false,
        .heavy_tail = true});
  dist({.name = "Weibull",
        .support = SupportClass::PositiveReal,
        .parameters = {{"k", "shape"}, {"lambda", "scale"}},
        .max_entropy_constraints = {}});
  dist({.name = "TruncatedNormal",
        .support = SupportClass::Interval,
        .parameters = {{"mu", "pre-truncation mean"}, {"sigma", "pre-truncation scale"},
                       {"l", "lower"}, {"u", "upper"}},
        .max_entropy_constraints = {"X in [l, u]", "E[X] fixed", "Var[X] fixed"}});
  dist({.name = "vMF",
        .support = SupportClass::RealVector,
        .parameters = {{"mu", "mean direction"}, {"kappa", "spread"}},
        .max_entropy_constraints = {"unit vector with fixed mean direction"}});
  dist({.name = "MultivariateNormal",
        .support = SupportClass::RealVector,
        .parameters = {{"mu", "mean vector"}, {"Sigma", "covariance"}},
        .max_entropy_constraints = {"X in R^d", "E[X] fixed", "Cov[X] fixed"},
        .conjugate_prior = "NormalInverseWishart"});
  dist({.name = "NormalInverseWishart",
        .support = SupportClass::RealVector,
        .parameters = {{"mu0", "mean"}, {"lambda", "mean pseudocount"},
                       {"Psi", "scale matrix"}, {"nu", "degrees of freedom"}}});
  return r;
}

bool is_integral(double x) { return x == std::floor(x); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool is_simplex(const std::vector<double>& p) {
  double s = 0;
  for (double v : p) {
    if (v < 0 || v > 1) return false;
    s += v;
  }
  return std::fabs(s - 1.0) <= kSimplexTol;
}

double xlogy(double x, double y) {  // x*log(y) with the 0*log(0) = 0 convention
  if (x == 0) return 0;
  return x * std::log(y);
}

struct BetaAB {
  double a, b;
};
BetaAB to_alpha_beta(double theta0, double n0) { return {theta0 * n0, (1 - theta0) * n0}; }

std::vector<double> dirichlet_alpha(const std::vector<double>& p0, double n0) {
  std::vector<double> a(p0.size());
  for (size_t i = 0; i < p0.size(); ++i) a[i] = p0[i] * n0;
  return a;
}

}  // namespace

const std::vector<FamilyDescriptor>& registry() {
  static const std::vector<FamilyDescriptor> r = build_registry();
  return r;
}

const FamilyDescriptor* find_family(std::string_view name) {
  for (const auto& d : registry())
    if (d.name == name) return &d;
  return nullptr;
}

bool family_supports(const FamilyDescriptor& fam, const Support& s) {
  if (fam.support == SupportClass::Any) return true;
  SupportClass cls;
  switch (s.kind) {
    case SupportKind::Boolean: cls = SupportClass::Boolean; break;
    case SupportKind::Categorical: cls = SupportClass::Categorical; break;
    case SupportKind::BoundedInt: cls = SupportClass::BoundedInt; break;
    case SupportKind::Real: cls = SupportClass::Real; break;
    case SupportKind::PositiveReal: cls = SupportClass::PositiveReal; break;
    case SupportKind::UnitInterval: cls = SupportClass::Interval; break;
    case SupportKind::RealVector: cls = SupportClass::RealVector; break;
    default: return false;
  }
  if (fam.support == cls) return true;
  // Scalar families broadcast elementwise over vector variables.
  if (cls == SupportClass::RealVector)
    return fam.support == SupportClass::Real || fam.support == SupportClass::PositiveReal ||
           fam.support == SupportClass::Interval || fam.support == SupportClass::Simplex;
  return false;
}

bool DistributionInstance::symbolic() const {
  for (const auto& p : params)
    if (std::holds_alternative<Sym>(p)) return true;
  return false;
}

DistributionInstance make_instance(std::string_view family, std::vector<ParamValue> params,
                                   std::optional<int> arity) {
  const FamilyDescriptor* fam = find_family(family);
  require(fam != nullptr, "unknown distribution family: " + std::string(family));
  DistributionInstance d{fam, std::move(params), arity};
  if (d.symbolic()) return d;

  auto num = [&](int i) { return std::get<double>(d.params.at(i)); };
  const std::string& n = fam->name;
  if (n == "Normal" || n == "Laplace") {
    require(d.params.size() == 2, n + " takes (location, scale)");
    require(num(1) > 0, n + " scale must be > 0");
  } else if (n == "Bernoulli") {
    require(d.params.size() == 1, "Bernoulli takes (theta)");
    require(num(0) >= 0 && num(0) <= 1, "Bernoulli theta must be in [0,1]");
  } else if (n == "Categorical") {
    require(d.params.size() == 1, "Categorical takes one simplex parameter");
    const auto& p = std::get<std::vector<double>>(d.params[0]);
    require(is_simplex(p), "Categorical parameter must be a simplex (sum 1 within 1e-12)");
  } else if (n == "Binomial") {
    require(d.params.size() == 2, "Binomial takes (n, theta)");
    require(num(0) >= 0 && is_integral(num(0)), "Binomial n must be a non-negative integer");
    require(num(1) >= 0 && num(1) <= 1, "Binomial theta must be in [0,1]");
  } else if (n == "Uniform") {
    require(d.params.size() == 2, "Uniform takes (l, u)");
    require(num(1) > num(0), "Uniform needs u > l");
  } else if (n == "Beta") {
    require(d.params.size() == 2, "Beta takes (theta0, N0)");
    require(num(0) >= 0 && num(0) <= 1, "Beta theta0 must be in [0,1]");
    require(num(1) >= 0, "Beta pseudocount must be >= 0");
  } else if (n == "Dirichlet") {
    require(d.params.size() == 2, "Dirichlet takes (p0, N0)");
    const auto& p = std::get<std::vector<double>>(d.params[0]);
    require(is_simplex(p), "Dirichlet p0 must be a simplex");
    require(num(1) >= 0, "Dirichlet pseudocount must be >= 0");
  } else if (n == "Gamma") {
    require(d.params.size() == 2, "Gamma takes (k, theta)");
    require(num(0) > 0 && num(1) > 0, "Gamma shape and scale must be > 0");
  }
  return d;
}

double scalar_param(const DistributionInstance& d, int i) {
  const ParamValue& p = d.params.at(i);
  if (!std::holds_alternative<double>(p))
    throw SymbolicParameters("parameter " + std::to_string(i) + " of " + d.family->name +
                             " is not numeric");
  return std::get<double>(p);
}

const std::vector<double>& vector_param(const DistributionInstance& d, int i) {
  const ParamValue& p = d.params.at(i);
  if (!std::holds_alternative<std::vector<double>>(p))
    throw SymbolicParameters("parameter " + std::to_string(i) + " of " + d.family->name +
                             " is not a numeric vector");
  return std::get<std::vector<double>>(p);
}

// ---------------------------------------------------------------------------
// log_prob
// ---------------------------------------------------------------------------

double log_prob(const DistributionInstance& d, const Value& x) {
  if (d.symbolic())
    throw SymbolicParameters("log_prob needs numeric parameters for " + d.family->name);
  const std::string& n = d.family->name;

  if (n == "Dirichlet") {
    const auto& xv = std::get<std::vector<double>>(x);
    auto alpha = dirichlet_alpha(vector_param(d, 0), scalar_param(d, 1));
    if (xv.size() != alpha.size()) throw std::domain_error("Dirichlet point has wrong length");
    if (!is_simplex(xv)) throw std::domain_error("Dirichlet point must lie on the simplex");
    double a0 = 0, lp = 0;
    for (size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] <= 0) throw std::domain_error("Dirichlet needs positive pseudocounts");
      a0 += alpha[i];
      if (alpha[i] != 1.0) lp += (alpha[i] - 1) * std::log(xv[i]);
      lp -= gsl_sf_lngamma(alpha[i]);
    }
    return lp + gsl_sf_lngamma(a0);
  }

  double xv = std::get<double>(x);
  if (n == "Normal") {
    double m = scalar_param(d, 0), s = scalar_param(d, 1);
    return -(((xv - m) * (xv - m)) / (2 * (s * s))) - std::log(std::sqrt((2 * kPi) * (s * s)));
  }
  if (n == "Laplace") {
    double m = scalar_param(d, 0), b = scalar_param(d, 1);
    return -(std::fabs(xv - m) / b) - std::log(2 * b);
  }
  if (n == "Bernoulli") {
    if (xv != 0.0 && xv != 1.0) throw std::domain_error("Bernoulli value must be 0 or 1");
    double t = scalar_param(d, 0);
    double mass = xv == 1.0 ? t : 1 - t;
    return mass > 0 ? std::log(mass) : kNegInf;
  }
  if (n == "Categorical") {
    const auto& p = vector_param(d, 0);
    if (!is_integral(xv) || xv < 0 || xv >= static_cast<double>(p.size()))
      throw std::domain_error("Categorical value out of range");
    double mass = p[static_cast<size_t>(xv)];
    return mass > 0 ? std::log(mass) : kNegInf;
  }
  if (n == "Binomial") {
    double nn = scalar_param(d, 0), t = scalar_param(d, 1);
    if (!is_integral(xv) || xv < 0 || xv > nn)
      throw std::domain_error("Binomial value out of range");
    if ((t == 0 && xv > 0) || (t == 1 && xv < nn)) return kNegInf;
    double lchoose = gsl_sf_lngamma(nn + 1) - gsl_sf_lngamma(xv + 1) - gsl_sf_lngamma(nn - xv + 1);
    return lchoose + xlogy(xv, t) + xlogy(nn - xv, 1 - t);
  }
  if (n == "Uniform") {
    double l = scalar_param(d, 0), u = scalar_param(d, 1);
    return (xv >= l && xv <= u) ? -std::log(u - l) : kNegInf;
  }
  if (n == "Beta") {
    auto [a, b] = to_alpha_beta(scalar_param(d, 0), scalar_param(d, 1));
    if (a <= 0 || b <= 0) throw std::domain_error("degenerate Beta has no density");
    if (xv <= 0 || xv >= 1) return kNegInf;
    return (a - 1) * std::log(xv) + (b - 1) * std::log(1 - xv) - gsl_sf_lnbeta(a, b);
  }
  if (n == "Gamma") {
    double k = scalar_param(d, 0), th = scalar_param(d, 1);
    if (xv <= 0) return kNegInf;
    return (k - 1) * std::log(xv) - xv / th - k * std::log(th) - gsl_sf_lngamma(k);
  }
  if (n == "Const") {
    return xv == scalar_param(d, 0) ? 0.0 : kNegInf;
  }
  throw UnsupportedOperation("log_prob not implemented for " + n);
}

// ---------------------------------------------------------------------------
// NLL formulas
// ---------------------------------------------------------------------------

namespace {

ExprPtr param_expr(const ParamValue& p) {
  if (std::holds_alternative<double>(p)) return constant(std::get<double>(p));
  if (std::holds_alternative<Sym>(p)) return symbol(std::get<Sym>(p).text);
  throw SymbolicParameters("vector parameter has no scalar expression");
}

ExprPtr pi2() { return mul(constant(2), named_constant("pi", kPi)); }

}  // namespace

std::optional<ExprPtr> nll_formula(const DistributionInstance& d, bool simplify_constants) {
  const std::string& n = d.family->name;
  ExprPtr x = symbol("x");

  if (n == "Normal") {
    ExprPtr mu = param_expr(d.params[0]);
    const ParamValue& sp = d.params[1];
    ExprPtr sq = pow(sub(x, mu), constant(2));
    if (simplify_constants && std::holds_alternative<double>(sp)) {
      double s = std::get<double>(sp);
      return add(div(sq, constant(2 * (s * s))), symbol("const"));
    }
    ExprPtr sigma = param_expr(sp);
    ExprPtr var = pow(sigma, constant(2));
    return add(div(sq, mul(constant(2), var)),
               call("log", {call("sqrt", {mul(pi2(), var)})}));
  }
  if (n == "Laplace") {
    ExprPtr mu = param_expr(d.params[0]);
    const ParamValue& bp = d.params[1];
    ExprPtr absterm = call("abs", {sub(x, mu)});
    if (simplify_constants && std::holds_alternative<double>(bp)) {
      double b = std::get<double>(bp);
      return add(div(absterm, constant(b)), symbol("const"));
    }
    ExprPtr b = param_expr(bp);
    return add(div(absterm, b), call("log", {mul(constant(2), b)}));
  }
  if (n == "Bernoulli") {
    ExprPtr t = param_expr(d.params[0]);
    return neg(add(mul(indicator_eq(x, constant(1)), call("log", {t})),
                   mul(indicator_eq(x, constant(0)), call("log", {sub(constant(1), t)}))));
  }
  if (n == "Categorical") {
    // Cross-entropy sum with indicator coefficients over the categories.
    int k = 0;
    bool numeric = std::holds_alternative<std::vector<double>>(d.params[0]);
    if (numeric)
      k = static_cast<int>(std::get<std::vector<double>>(d.params[0]).size());
    else if (d.arity)
      k = *d.arity;
    else
      return std::nullopt;
    ExprPtr sum;
    for (int j = 0; j < k; ++j) {
      ExprPtr pj = numeric ? constant(std::get<std::vector<double>>(d.params[0])[j])
                           : indexed(std::get<Sym>(d.params[0]).text, j);
      ExprPtr term = mul(indicator_eq(x, constant(j)), call("log", {pj}));
      sum = sum ? add(sum, term) : term;
    }
    return neg(sum);
  }
  return std::nullopt;  // no implemented closed form: an absent marker, not a crash
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

double entropy(const DistributionInstance& d) {
  if (d.symbolic())
    throw SymbolicParameters("entropy needs numeric parameters for " + d.family->name);
  const std::string& n = d.family->name;
  if (n == "Normal") {
    double s = scalar_param(d, 1);
    return 0.5 + std::log(std::sqrt((2 * kPi) * (s * s)));
  }
  if (n == "Laplace") return 1 + std::log(2 * scalar_param(d, 1));
  if (n == "Bernoulli") {
    double t = scalar_param(d, 0);
    return -(xlogy(t, t) + xlogy(1 - t, 1 - t));
  }
  if (n == "Categorical") {
    double h = 0;
    for (double p : vector_param(d, 0)) h -= xlogy(p, p);
    return h;
  }
  if (n == "Uniform") return std::log(scalar_param(d, 1) - scalar_param(d, 0));
  if (n == "Beta") {
    auto [a, b] = to_alpha_beta(scalar_param(d, 0), scalar_param(d, 1));
    if (a <= 0 || b <= 0) throw std::domain_error("degenerate Beta has no entropy");
    return gsl_sf_lnbeta(a, b) - (a - 1) * gsl_sf_psi(a) - (b - 1) * gsl_sf_psi(b) +
           (a + b - 2) * gsl_sf_psi(a + b);
  }
  if (n == "Gamma") {
    double k = scalar_param(d, 0), th = scalar_param(d, 1);
    return k + std::log(th) + gsl_sf_lngamma(k) + (1 - k) * gsl_sf_psi(k);
  }
  if (n == "Dirichlet") {
    auto alpha = dirichlet_alpha(vector_param(d, 0), scalar_param(d, 1));
    double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    double lnB = -gsl_sf_lngamma(a0);
    for (double a : alpha) {
      if (a <= 0) throw std::domain_error("degenerate Dirichlet has no entropy");
      lnB += gsl_sf_lngamma(a);
    }
    double h = lnB + (a0 - static_cast<double>(alpha.size())) * gsl_sf_psi(a0);
    for (double a : alpha) h -= (a - 1) * gsl_sf_psi(a);
    return h;
  }
  throw UnsupportedOperation("entropy not implemented for " + n);
}

double nats_to_bits(double nats) { return nats / std::log(2.0); }

// ---------------------------------------------------------------------------
// KL divergence and cross entropy
// ---------------------------------------------------------------------------

namespace {

void check_pair(const DistributionInstance& q, const DistributionInstance& p) {
  if (q.family != p.family)
    throw std::invalid_argument("kl/cross_entropy need the same family on both sides (got " +
                                q.family->name + " vs " + p.family->name + ")");
}

int pair_arity(const DistributionInstance& q, const DistributionInstance& p) {
  for (const auto* d : {&q, &p}) {
    if (std::holds_alternative<std::vector<double>>(d->params[0]))
      return static_cast<int>(std::get<std::vector<double>>(d->params[0]).size());
    if (d->arity) return *d->arity;
  }
  throw UnsupportedOperation("symbolic " + q.family->name +
                             " needs a known arity for a closed form");
}

ExprPtr vec_component(const DistributionInstance& d, int i) {
  if (std::holds_alternative<std::vector<double>>(d.params[0]))
    return constant(std::get<std::vector<double>>(d.params[0])[i]);
  return indexed(std::get<Sym>(d.params[0]).text, i);
}

// Beta pseudo-parameters as expressions: alpha = theta0*N0, beta = (1-theta0)*N0.
std::pair<ExprPtr, ExprPtr> beta_ab_expr(const DistributionInstance& d) {
  ExprPtr t = param_expr(d.params[0]), n = param_expr(d.params[1]);
  return {mul(t, n), mul(sub(constant(1), t), n)};
}

ExprPtr lnbeta_expr(ExprPtr a, ExprPtr b) {
  return sub(add(call("lgamma", {a}), call("lgamma", {b})), call("lgamma", {add(a, b)}));
}

double kl_numeric(const DistributionInstance& q, const DistributionInstance& p) {
  const std::string& n = q.family->name;
  if (n == "Normal") {
    double m1 = scalar_param(q, 0), s1 = scalar_param(q, 1);
    double m2 = scalar_param(p, 0), s2 = scalar_param(p, 1);
    return std::log(s2 / s1) + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2 * (s2 * s2)) - 0.5;
  }
  if (n == "Bernoulli") {
    double a = scalar_param(q, 0), b = scalar_param(p, 0);
    double kl = 0;
    if (a > 0) kl += (b > 0) ? a * std::log(a / b) : kPosInf;
    if (a < 1) kl += (b < 1) ? (1 - a) * std::log((1 - a) / (1 - b)) : kPosInf;
    return kl;
  }
  if (n == "Categorical") {
    const auto& a = vector_param(q, 0);
    const auto& b = vector_param(p, 0);
    if (a.size() != b.size()) throw std::invalid_argument("categorical arity mismatch");
    double kl = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      if (b[i] == 0) return kPosInf;
      kl += a[i] * std::log(a[i] / b[i]);
    }
    return kl;
  }
  if (n == "Beta") {
    auto [a1, b1] = to_alpha_beta(scalar_param(q, 0), scalar_param(q, 1));
    auto [a2, b2] = to_alpha_beta(scalar_param(p, 0), scalar_param(p, 1));
    if (a1 <= 0 || b1 <= 0 || a2 <= 0 || b2 <= 0)
      throw std::domain_error("degenerate Beta in KL");
    return gsl_sf_lnbeta(a2, b2) - gsl_sf_lnbeta(a1, b1) + (a1 - a2) * gsl_sf_psi(a1) +
           (b1 - b2) * gsl_sf_psi(b1) + (a2 - a1 + b2 - b1) * gsl_sf_psi(a1 + b1);
  }
  if (n == "Dirichlet") {
    auto a = dirichlet_alpha(vector_param(q, 0), scalar_param(q, 1));
    auto b = dirichlet_alpha(vector_param(p, 0), scalar_param(p, 1));
    if (a.size() != b.size()) throw std::invalid_argument("dirichlet arity mismatch");
    double a0 = std::accumulate(a.begin(), a.end(), 0.0);
    double b0 = std::accumulate(b.begin(), b.end(), 0.0);
    double kl = gsl_sf_lngamma(a0) - gsl_sf_lngamma(b0);
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] <= 0 || b[i] <= 0) throw std::domain_error("degenerate Dirichlet in KL");
      kl += gsl_sf_lngamma(b[i]) - gsl_sf_lngamma(a[i]) +
            (a[i] - b[i]) * (gsl_sf_psi(a[i]) - gsl_sf_psi(a0));
    }
    return kl;
  }
  throw UnsupportedOperation("no closed-form KL for " + n);
}

ExprPtr kl_symbolic(const DistributionInstance& q, const DistributionInstance& p) {
  const std::string& n = q.family->name;
  if (n == "Normal") {
    ExprPtr m1 = param_expr(q.params[0]), s1 = param_expr(q.params[1]);
    ExprPtr m2 = param_expr(p.params[0]), s2 = param_expr(p.params[1]);
    ExprPtr num = add(pow(s1, constant(2)), pow(sub(m1, m2), constant(2)));
    return sub(add(call("log", {div(s2, s1)}), div(num, mul(constant(2), pow(s2, constant(2))))),
               constant(0.5));
  }
  if (n == "Bernoulli") {
    ExprPtr a = param_expr(q.params[0]), b = param_expr(p.params[0]);
    ExprPtr one = constant(1);
    return add(mul(a, call("log", {div(a, b)})),
               mul(sub(one, a), call("log", {div(sub(one, a), sub(one, b))})));
  }
  if (n == "Categorical") {
    int k = pair_arity(q, p);
    ExprPtr sum;
    for (int i = 0; i < k; ++i) {
      ExprPtr qi = vec_component(q, i), pi = vec_component(p, i);
      ExprPtr term = mul(qi, call("log", {div(qi, pi)}));
      sum = sum ? add(sum, term) : term;
    }
    return sum;
  }
  if (n == "Beta") {
    auto [a1, b1] = beta_ab_expr(q);
    auto [a2, b2] = beta_ab_expr(p);
    ExprPtr e = sub(lnbeta_expr(a2, b2), lnbeta_expr(a1, b1));
    e = add(e, mul(sub(a1, a2), call("digamma", {a1})));
    e = add(e, mul(sub(b1, b2), call("digamma", {b1})));
    e = add(e, mul(add(sub(a2, a1), sub(b2, b1)), call("digamma", {add(a1, b1)})));
    return e;
  }
  throw UnsupportedOperation("no symbolic KL for " + n);
}

double cross_entropy_numeric(const DistributionInstance& q, const DistributionInstance& p) {
  const std::string& n = q.family->name;
  if (n == "Normal") {
    double m1 = scalar_param(q, 0), s1 = scalar_param(q, 1);
    double m2 = scalar_param(p, 0), s2 = scalar_param(p, 1);
    return std::log(std::sqrt((2 * kPi) * (s2 * s2))) +
           (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2 * (s2 * s2));
  }
  if (n == "Bernoulli") {
    double a = scalar_param(q, 0), b = scalar_param(p, 0);
    double ce = 0;
    if (a > 0) ce -= (b > 0) ? a * std::log(b) : kNegInf;
    if (a < 1) ce -= (b < 1) ? (1 - a) * std::log(1 - b) : kNegInf;
    return ce;
  }
  if (n == "Categorical") {
    const auto& a = vector_param(q, 0);
    const auto& b = vector_param(p, 0);
    if (a.size() != b.size()) throw std::invalid_argument("categorical arity mismatch");
    double ce = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      if (b[i] == 0) return kPosInf;
      ce -= a[i] * std::log(b[i]);
    }
    return ce;
  }
  if (n == "Beta") {
    auto [a1, b1] = to_alpha_beta(scalar_param(q, 0), scalar_param(q, 1));
    auto [a2, b2] = to_alpha_beta(scalar_param(p, 0), scalar_param(p, 1));
    if (a1 <= 0 || b1 <= 0 || a2 <= 0 || b2 <= 0)
      throw std::domain_error("degenerate Beta in cross entropy");
    return gsl_sf_lnbeta(a2, b2) - (a2 - 1) * gsl_sf_psi(a1) - (b2 - 1) * gsl_sf_psi(b1) +
           (a2 + b2 - 2) * gsl_sf_psi(a1 + b1);
  }
  if (n == "Dirichlet") {
    auto a = dirichlet_alpha(vector_param(q, 0), scalar_param(q, 1));
    auto b = dirichlet_alpha(vector_param(p, 0), scalar_param(p, 1));
    if (a.size() != b.size()) throw std::invalid_argument("dirichlet arity mismatch");
    double a0 = std::accumulate(a.begin(), a.end(), 0.0);
    double lnBb = -gsl_sf_lngamma(std::accumulate(b.begin(), b.end(), 0.0));
    double ce = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] <= 0 || b[i] <= 0) throw std::domain_error("degenerate Dirichlet");
      lnBb += gsl_sf_lngamma(b[i]);
      ce -= (b[i] - 1) * (gsl_sf_psi(a[i]) - gsl_sf_psi(a0));
    }
    return lnBb + ce;
  }
  throw UnsupportedOperation("no closed-form cross entropy for " + n);
}

}  // namespace

Formula kl(const DistributionInstance& q, const DistributionInstance& p) {
  check_pair(q, p);
  if (q.symbolic() || p.symbolic()) return kl_symbolic(q, p);
  return kl_numeric(q, p);
}

double kl_value(const DistributionInstance& q, const DistributionInstance& p) {
  check_pair(q, p);
  return kl_numeric(q, p);
}

Formula cross_entropy(const DistributionInstance& q, const DistributionInstance& p) {
  check_pair(q, p);
  if (q.symbolic() || p.symbolic())
    throw UnsupportedOperation("symbolic cross entropy not implemented");
  return cross_entropy_numeric(q, p);
}

double cross_entropy_value(const DistributionInstance& q, const DistributionInstance& p) {
  check_pair(q, p);
  return cross_entropy_numeric(q, p);
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

std::vector<Value> sample(const DistributionInstance& d, std::uint64_t seed, int n) {
  if (d.symbolic())
    throw SymbolicParameters("sample needs numeric parameters for " + d.family->name);
  const std::string& fam = d.family->name;
  std::mt19937_64 rng(seed);
  std::vector<Value> out;
  out.reserve(n);

  if (fam == "Normal") {
    std::normal_distribution<double> dist(scalar_param(d, 0), scalar_param(d, 1));
    for (int i = 0; i < n; ++i) out.emplace_back(dist(rng));
  } else if (fam == "Laplace") {
    double mu = scalar_param(d, 0), b = scalar_param(d, 1);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < n; ++i) {
      double v;
      do {
        v = u(rng);
      } while (v == -0.5);  // log(1 - 2|v|) must stay finite
      double s = v < 0 ? -1.0 : 1.0;
      out.emplace_back(mu - b * s * std::log(1 - 2 * std::fabs(v)));
    }
  } else if (fam == "Bernoulli") {
    double t = scalar_param(d, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i) out.emplace_back(u(rng) < t ? 1.0 : 0.0);
  } else if (fam == "Categorical") {
    const auto& p = vector_param(d, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      double r = u(rng), acc = 0;
      size_t j = 0;
      for (; j + 1 < p.size(); ++j) {
        acc += p[j];
        if (r < acc) break;
      }
      out.emplace_back(static_cast<double>(j));
    }
  } else if (fam == "Uniform") {
    std::uniform_real_distribution<double> u(scalar_param(d, 0), scalar_param(d, 1));
    for (int i = 0; i < n; ++i) out.emplace_back(u(rng));
  } else if (fam == "Beta") {
    auto [a, b] = to_alpha_beta(scalar_param(d, 0), scalar_param(d, 1));
    if (a <= 0 || b <= 0) throw std::domain_error("degenerate Beta cannot be sampled");
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    for (int i = 0; i < n; ++i) {
      double x = ga(rng), y = gb(rng);
      out.emplace_back(x / (x + y));
    }
  } else if (fam == "Gamma") {
    std::gamma_distribution<double> g(scalar_param(d, 0), scalar_param(d, 1));
    for (int i = 0; i < n; ++i) out.emplace_back(g(rng));
  } else {
    throw UnsupportedOperation("sample not implemented for " + fam);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lookups
// ---------------------------------------------------------------------------

std::optional<std::string> max_entropy_lookup(SupportClass support,
                                              const std::set<ConstraintTag>& c) {
  using CT = ConstraintTag;
  const std::set<CT> mean_var{CT::Mean, CT::Variance};
  const std::set<CT> mean_mad{CT::Mean, CT::MeanAbsDev};
  const std::set<CT> mean_mlog{CT::Mean, CT::MeanLog};
  if (support == SupportClass::Real && c == mean_var) return "Normal";
  if (support == SupportClass::Real && c == mean_mad) return "Laplace";
  if (support == SupportClass::PositiveReal && c == mean_mlog) return "Gamma";
  if (support == SupportClass::Interval && c.empty()) return "Uniform";
  if (support == SupportClass::Interval && c == mean_var) return "TruncatedNormal";
  return std::nullopt;
}

std::optional<std::string> conjugate_prior_of(std::string_view family_tag) {
  static const std::map<std::string, std::string, std::less<>> qualified = {
      {"Normal-mean", "Normal"},
      {"Normal-variance", "ScaledInvChiSq"},
      {"Uniform-bound", "Pareto"},
  };
  if (auto it = qualified.find(family_tag); it != qualified.end()) return it->second;
  if (const FamilyDescriptor* fam = find_family(family_tag)) return fam->conjugate_prior;
  return std::nullopt;
}

}  // namespace elboforge
