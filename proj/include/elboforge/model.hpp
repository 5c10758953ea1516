#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elboforge {

// ---------------------------------------------------------------------------
// Variable supports
// ---------------------------------------------------------------------------

enum class SupportKind {
  Boolean,       // {false, true}
  Categorical,   // {0 .. k-1}, k >= 2
  BoundedInt,    // {0 .. n}
  Real,          // R
  PositiveReal,  // (0, inf)
  UnitInterval,  // [0, 1]
  RealVector,    // R^d, d >= 1
};

struct Support {
  SupportKind kind = SupportKind::Real;
  int size = 0;  // arity k / bound n / dimension d; unused for scalar continua

  bool operator==(const Support&) const = default;

  bool is_discrete_scalar() const {
    return kind == SupportKind::Boolean || kind == SupportKind::Categorical ||
           kind == SupportKind::BoundedInt;
  }
  /// Number of points of a discrete scalar support.
  int cardinality() const;

  static Support boolean() { return {SupportKind::Boolean, 0}; }
  static Support categorical(int k) { return {SupportKind::Categorical, k}; }
  static Support bounded_int(int n) { return {SupportKind::BoundedInt, n}; }
  static Support real() { return {SupportKind::Real, 0}; }
  static Support positive_real() { return {SupportKind::PositiveReal, 0}; }
  static Support unit_interval() { return {SupportKind::UnitInterval, 0}; }
  static Support real_vector(int d) { return {SupportKind::RealVector, d}; }
};

enum class Role { Observed, Latent, Parameter };

// ---------------------------------------------------------------------------
// Distribution parameter expressions
// ---------------------------------------------------------------------------

/// N-dimensional numeric array attached to a factor, indexed by the values of
/// `index_vars` (row-major, in that order). An extra trailing dimension holds
/// per-cell parameter vectors for simplex-valued parameters.
struct NumericTable {
  std::vector<std::string> index_vars;
  std::vector<int> shape;
  std::vector<double> flat;

  bool operator==(const NumericTable&) const = default;
};

/// One parameter slot of a distribution: a literal number, a reference to a
/// declared variable, an opaque function application like dec(z), or a table.
struct ParamExpr {
  enum class Kind { Number, Ref, Apply, Table };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;                // Ref: variable; Apply: function symbol
  std::vector<std::string> args;   // Apply: argument variables
  NumericTable table;

  bool operator==(const ParamExpr&) const = default;

  static ParamExpr make_number(double v);
  static ParamExpr make_ref(std::string n);
  static ParamExpr make_apply(std::string fn, std::vector<std::string> a);
  static ParamExpr make_table(NumericTable t);

  bool is_numeric() const { return kind == Kind::Number || kind == Kind::Table; }
};

struct DistributionSpec {
  std::string family;
  std::vector<ParamExpr> params;

  bool operator==(const DistributionSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Model IR
// ---------------------------------------------------------------------------

struct Variable {
  std::string name;
  Support support;
  Role role = Role::Latent;
  /// Constant binding, only for Role::Parameter (e.g. Const(1.0)).
  std::optional<DistributionSpec> binding;

  bool operator==(const Variable&) const = default;
};

/// A conditional distribution over a block of target variables.
struct Factor {
  std::vector<std::string> targets;  // block A of p(A|...)
  std::vector<std::string> parents;  // conditioning variables, ordered
  DistributionSpec spec;

  bool operator==(const Factor&) const = default;
};

struct GraphicalModel {
  std::string name;
  std::vector<Variable> variables;
  std::vector<Factor> generative;  // the set P
  std::vector<Factor> guides;      // the set Q
  bool generative_only = false;

  bool operator==(const GraphicalModel&) const = default;

  const Variable* find_variable(std::string_view n) const;
  int variable_index(std::string_view n) const;  // -1 if absent
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity { Error, Info };

struct Violation {
  std::string code;     // stable identifier, e.g. "cycle", "guide-coverage"
  std::string element;  // offending variable/factor signature
  std::string message;
  Severity severity = Severity::Error;
};

struct ValidationReport {
  std::vector<Violation> entries;

  bool valid() const;  // no Error-severity entries
  std::vector<const Violation*> errors() const;
};

/// Structural validation. Violations are data; never throws.
ValidationReport validate(const GraphicalModel& model);

// ---------------------------------------------------------------------------
// Factorization and classification
// ---------------------------------------------------------------------------

/// Indices into model.generative, ordered so that each factor precedes the
/// factors of its parents (observation factors first, priors last), ties
/// broken by variable declaration order. Throws std::invalid_argument with
/// the first violation message if the model is invalid.
std::vector<int> factorization(const GraphicalModel& model);

/// "p(x0|z0)" style signature of a factor. Generative factors print with
/// letter 'p', guides with 'q'.
std::string factor_signature(const Factor& f, char letter);

/// The whole factorization as a product string, e.g. "p(x|z)p(z)".
std::string factorization_text(const GraphicalModel& model);

struct FactorTags {
  bool prior = false;
  bool generative = false;
  bool discriminative = false;
  bool posterior = false;

  bool operator==(const FactorTags&) const = default;
};

struct Classification {
  std::vector<std::string> observed;
  std::vector<std::string> latent;
  std::vector<std::string> parameters;
  std::vector<FactorTags> generative_tags;  // aligned with model.generative
  std::vector<FactorTags> guide_tags;       // aligned with model.guides
};

Classification classify_variables(const GraphicalModel& model);

FactorTags classify_factor(const GraphicalModel& model, const Factor& f);

}  // namespace elboforge
