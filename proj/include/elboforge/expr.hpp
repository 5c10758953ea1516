#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace elboforge {

// ---------------------------------------------------------------------------
// A minimal scalar expression tree: enough to carry NLL and KL formulas with
// opaque symbols, evaluate them numerically, and print them as ASCII math or
// LaTeX. Not a CAS; no rewriting beyond constant folding at build time.
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
  Constant,
  Symbol,    // opaque name, carried verbatim (may be "dec(z)")
  Indexed,   // symbol[i], for vector-valued opaque parameters
  Add, Sub, Mul, Div, Pow, Neg,
  Call,      // named function: log, sqrt, abs, exp, lgamma, digamma
  Eq,        // indicator [a = b], evaluates to 0/1
};

struct Expr {
  ExprKind kind;
  double value = 0.0;     // Constant
  std::string name;       // Symbol / Indexed / Call
  int index = 0;          // Indexed
  std::vector<ExprPtr> args;
};

ExprPtr constant(double v);
/// Constant that prints as a name ("pi") but evaluates to its value.
ExprPtr named_constant(std::string name, double v);
ExprPtr symbol(std::string name);
ExprPtr indexed(std::string name, int i);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr pow(ExprPtr a, ExprPtr b);
ExprPtr neg(ExprPtr a);
ExprPtr call(std::string fn, std::vector<ExprPtr> args);
ExprPtr indicator_eq(ExprPtr a, ExprPtr b);

/// Values for free symbols; indexed symbols are looked up as "name[i]".
using Environment = std::map<std::string, double>;

/// Evaluates the tree. Throws std::out_of_range for unbound symbols and
/// std::invalid_argument for unknown call names.
double evaluate(const Expr& e, const Environment& env);

std::string to_text(const Expr& e);
std::string to_latex(const Expr& e);

/// All free symbol names (indexed ones as "name[i]").
std::vector<std::string> free_symbols(const Expr& e);

}  // namespace elboforge
