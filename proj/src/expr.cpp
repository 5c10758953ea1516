#include "elboforge/expr.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <gsl/gsl_sf_psi.h>

namespace elboforge {

namespace {

ExprPtr node(ExprKind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}

}  // namespace

ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Constant;
  e->value = v;
  return e;
}

ExprPtr named_constant(std::string name, double v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Constant;
  e->name = std::move(name);
  e->value = v;
  return e;
}

ExprPtr symbol(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Symbol;
  e->name = std::move(name);
  return e;
}

ExprPtr indexed(std::string name, int i) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Indexed;
  e->name = std::move(name);
  e->index = i;
  return e;
}

namespace {
ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = std::const_pointer_cast<Expr>(node(k));
  e->args = {std::move(a), std::move(b)};
  return e;
}
}  // namespace

ExprPtr add(ExprPtr a, ExprPtr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }
ExprPtr div(ExprPtr a, ExprPtr b) { return binary(ExprKind::Div, std::move(a), std::move(b)); }
ExprPtr pow(ExprPtr a, ExprPtr b) { return binary(ExprKind::Pow, std::move(a), std::move(b)); }

ExprPtr neg(ExprPtr a) {
  auto e = std::const_pointer_cast<Expr>(node(ExprKind::Neg));
  e->args = {std::move(a)};
  return e;
}

ExprPtr call(std::string fn, std::vector<ExprPtr> args) {
  auto e = std::const_pointer_cast<Expr>(node(ExprKind::Call));
  e->name = std::move(fn);
  e->args = std::move(args);
  return e;
}

ExprPtr indicator_eq(ExprPtr a, ExprPtr b) {
  return binary(ExprKind::Eq, std::move(a), std::move(b));
}

double evaluate(const Expr& e, const Environment& env) {
  switch (e.kind) {
    case ExprKind::Constant: return e.value;
    case ExprKind::Symbol: {
      auto it = env.find(e.name);
      if (it == env.end()) throw std::out_of_range("unbound symbol: " + e.name);
      return it->second;
    }
    case ExprKind::Indexed: {
      std::string key = e.name + "[" + std::to_string(e.index) + "]";
      auto it = env.find(key);
      if (it == env.end()) throw std::out_of_range("unbound symbol: " + key);
      return it->second;
    }
    case ExprKind::Add: return evaluate(*e.args[0], env) + evaluate(*e.args[1], env);
    case ExprKind::Sub: return evaluate(*e.args[0], env) - evaluate(*e.args[1], env);
    case ExprKind::Mul: return evaluate(*e.args[0], env) * evaluate(*e.args[1], env);
    case ExprKind::Div: return evaluate(*e.args[0], env) / evaluate(*e.args[1], env);
    case ExprKind::Pow: {
      double base = evaluate(*e.args[0], env);
      const Expr& ex = *e.args[1];
      if (ex.kind == ExprKind::Constant && ex.value == 2.0) return base * base;
      return std::pow(base, evaluate(ex, env));
    }
    case ExprKind::Neg: return -evaluate(*e.args[0], env);
    case ExprKind::Eq:
      return evaluate(*e.args[0], env) == evaluate(*e.args[1], env) ? 1.0 : 0.0;
    case ExprKind::Call: {
      if (e.name == "log") return std::log(evaluate(*e.args[0], env));
      if (e.name == "exp") return std::exp(evaluate(*e.args[0], env));
      if (e.name == "sqrt") return std::sqrt(evaluate(*e.args[0], env));
      if (e.name == "abs") return std::fabs(evaluate(*e.args[0], env));
      if (e.name == "lgamma") return std::lgamma(evaluate(*e.args[0], env));
      if (e.name == "digamma") return gsl_sf_psi(evaluate(*e.args[0], env));
      throw std::invalid_argument("unknown function: " + e.name);
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v);

void render(const Expr& e, std::ostringstream& os, bool latex, int parent_prec) {
  int prec = precedence(e.kind);
  bool parens = prec < parent_prec;
  auto open = [&] { if (parens) os << (latex ? "\\left(" : "("); };
  auto close = [&] { if (parens) os << (latex ? "\\right)" : ")"); };

  switch (e.kind) {
    case ExprKind::Constant:
      if (!e.name.empty())
        os << (latex ? (e.name == "pi" ? "\\pi" : "\\mathrm{" + e.name + "}") : e.name);
      else
        os << format_number(e.value);
      return;
    case ExprKind::Symbol:
      if (latex && e.name.size() > 1 && e.name.find('(') == std::string::npos)
        os << "\\mathit{" << e.name << "}";
      else
        os << e.name;
      return;
    case ExprKind::Indexed:
      if (latex)
        os << e.name << "_{" << e.index << "}";
      else
        os << e.name << "[" << e.index << "]";
      return;
    case ExprKind::Add:
      open();
      render(*e.args[0], os, latex, prec);
      os << " + ";
      render(*e.args[1], os, latex, prec);
      close();
      return;
    case ExprKind::Sub:
      open();
      render(*e.args[0], os, latex, prec);
      os << " - ";
      render(*e.args[1], os, latex, prec + 1);
      close();
      return;
    case ExprKind::Mul:
      open();
      render(*e.args[0], os, latex, prec);
      os << (latex ? " \\cdot " : "*");
      render(*e.args[1], os, latex, prec);
      close();
      return;
    case ExprKind::Div:
      if (latex) {
        os << "\\frac{";
        render(*e.args[0], os, latex, 0);
        os << "}{";
        render(*e.args[1], os, latex, 0);
        os << "}";
      } else {
        open();
        render(*e.args[0], os, latex, prec);
        os << "/";
        render(*e.args[1], os, latex, prec + 1);
        close();
      }
      return;
    case ExprKind::Pow:
      open();
      render(*e.args[0], os, latex, prec + 1);
      os << "^";
      if (latex) {
        os << "{";
        render(*e.args[1], os, latex, 0);
        os << "}";
      } else {
        render(*e.args[1], os, latex, prec + 1);
      }
      close();
      return;
    case ExprKind::Neg:
      open();
      os << "-";
      render(*e.args[0], os, latex, prec);
      close();
      return;
    case ExprKind::Eq:
      os << (latex ? "[" : "[");
      render(*e.args[0], os, latex, 0);
      os << " = ";
      render(*e.args[1], os, latex, 0);
      os << "]";
      return;
    case ExprKind::Call: {
      if (latex) {
        if (e.name == "sqrt") {
          os << "\\sqrt{";
          render(*e.args[0], os, latex, 0);
          os << "}";
          return;
        }
        if (e.name == "abs") {
          os << "\\left|";
          render(*e.args[0], os, latex, 0);
          os << "\\right|";
          return;
        }
        if (e.name == "log")
          os << "\\log";
        else if (e.name == "digamma")
          os << "\\psi";
        else if (e.name == "lgamma")
          os << "\\log\\Gamma";
        else
          os << "\\mathrm{" << e.name << "}";
        os << "\\left(";
        render(*e.args[0], os, latex, 0);
        os << "\\right)";
        return;
      }
      if (e.name == "abs") {
        os << "|";
        render(*e.args[0], os, latex, 0);
        os << "|";
        return;
      }
      os << e.name << "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        render(*e.args[i], os, latex, 0);
      }
      os << ")";
      return;
    }
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  if (v == static_cast<long long>(v) && std::fabs(v) < 1e15)
    os << static_cast<long long>(v);
  else
    os << v;
  return os.str();
}

void collect(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Symbol) out.insert(e.name);
  if (e.kind == ExprKind::Indexed) out.insert(e.name + "[" + std::to_string(e.index) + "]");
  for (const auto& a : e.args) collect(*a, out);
}

}  // namespace

std::string to_text(const Expr& e) {
  std::ostringstream os;
  render(e, os, false, 0);
  return os.str();
}

std::string to_latex(const Expr& e) {
  std::ostringstream os;
  render(e, os, true, 0);
  return os.str();
}

std::vector<std::string> free_symbols(const Expr& e) {
  std::set<std::string> s;
  collect(e, s);
  return {s.begin(), s.end()};
}

}  // namespace elboforge
