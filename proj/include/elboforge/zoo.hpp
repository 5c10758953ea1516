#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "elboforge/expr.hpp"
#include "elboforge/model.hpp"

namespace elboforge {

// ---------------------------------------------------------------------------
// Family registry
// ---------------------------------------------------------------------------

/// Support classes a family can model. Model-side supports map onto these
/// (UnitInterval is an Interval; RealVector targets broadcast Real families
/// elementwise).
enum class SupportClass {
  Boolean,
  Categorical,
  BoundedInt,
  Real,
  PositiveReal,
  Interval,
  RealVector,
  Simplex,
  Any,  // Const: a point mass on whatever the variable is
};

enum class ConstraintTag { Mean, Variance, MeanAbsDev, MeanLog };

struct FamilyOps {
  bool log_prob = false;
  bool entropy = false;
  bool kl = false;
  bool sample = false;
  bool nll_formula = false;
};

struct FamilyDescriptor {
  std::string name;
  SupportClass support;
  std::vector<std::pair<std::string, std::string>> parameters;  // (name, semantic type)
  std::vector<std::string> max_entropy_constraints;  // human-readable
  std::optional<std::string> conjugate_prior;        // whole-distribution partner
  std::vector<std::pair<std::string, std::string>> parameter_conjugates;  // (param, family)
  bool has_mean = true;
  bool has_variance = true;
  bool heavy_tail = false;
  bool sparse = false;
  FamilyOps ops;
};

const std::vector<FamilyDescriptor>& registry();
const FamilyDescriptor* find_family(std::string_view name);

/// True when `fam` can model a variable of the given support.
bool family_supports(const FamilyDescriptor& fam, const Support& s);

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

struct Sym {
  std::string text;  // verbatim opaque parameter, e.g. "mu" or "dec(z)"
  bool operator==(const Sym&) const = default;
};

using ParamValue = std::variant<double, std::vector<double>, Sym>;
using Value = std::variant<double, std::vector<double>>;

struct UnsupportedOperation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SymbolicParameters : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DistributionInstance {
  const FamilyDescriptor* family = nullptr;
  std::vector<ParamValue> params;
  std::optional<int> arity;  // category count when params are symbolic

  bool symbolic() const;
};

/// Builds an instance, validating numeric parameter constraints
/// (scales > 0, probabilities in [0,1], simplexes summing to 1 within 1e-12,
/// pseudocounts >= 0). Throws std::invalid_argument on violations and on
/// unknown families.
DistributionInstance make_instance(std::string_view family, std::vector<ParamValue> params,
                                   std::optional<int> arity = std::nullopt);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Natural-log density/mass. Zero-mass points inside the domain yield the
/// -infinity sentinel; type-level impossibilities (categorical index out of
/// range, non-integral discrete values) throw std::domain_error.
double log_prob(const DistributionInstance& d, const Value& x);

/// Symbolic negative log likelihood in terms of an observation symbol "x" and
/// the instance's parameters. Families without a closed form return nullopt.
/// With simplify_constants, numeric additive offsets collapse to a literal
/// "const" symbol (the usual squared-error hack).
std::optional<ExprPtr> nll_formula(const DistributionInstance& d,
                                   bool simplify_constants = false);

/// Differential or discrete entropy in nats.
double entropy(const DistributionInstance& d);

using Formula = std::variant<double, ExprPtr>;

/// KL(q || p) for same-family pairs. Numeric when both are numeric, symbolic
/// expression otherwise.
Formula kl(const DistributionInstance& q, const DistributionInstance& p);

/// Cross entropy E_q[-log p], computed from its own closed form (not H+KL).
Formula cross_entropy(const DistributionInstance& q, const DistributionInstance& p);

double kl_value(const DistributionInstance& q, const DistributionInstance& p);
double cross_entropy_value(const DistributionInstance& q, const DistributionInstance& p);

std::vector<Value> sample(const DistributionInstance& d, std::uint64_t seed, int n);

std::optional<std::string> max_entropy_lookup(SupportClass support,
                                              const std::set<ConstraintTag>& constraints);

std::optional<std::string> conjugate_prior_of(std::string_view family_tag);

double nats_to_bits(double nats);

// Parameter accessors (throw SymbolicParameters when not numeric).
double scalar_param(const DistributionInstance& d, int i);
const std::vector<double>& vector_param(const DistributionInstance& d, int i);

}  // namespace elboforge
