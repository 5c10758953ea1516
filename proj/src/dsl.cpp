#include "elboforge/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "elboforge/zoo.hpp"

namespace elboforge {

ParseError::ParseError(std::string msg, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line(line),
      column(column) {}

std::string canonical_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= s_.size()) {
      tok_ = {Tok::End, "", 0, line_, col_};
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        bump();
      tok_ = {Tok::Ident, s_.substr(start, pos_ - start), 0, tok_.line, tok_.col};
      return;
    }
    bool neg_number = c == '-' && pos_ + 1 < s_.size() &&
                      (std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
                       s_[pos_ + 1] == '.');
    if (std::isdigit(static_cast<unsigned char>(c)) || neg_number) {
      size_t start = pos_;
      bump();
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
              s_[pos_] == 'e' || s_[pos_] == 'E' ||
              ((s_[pos_] == '+' || s_[pos_] == '-') &&
               (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
        bump();
      std::string text = s_.substr(start, pos_ - start);
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size())
        throw ParseError("malformed number '" + text + "'", tok_.line, tok_.col);
      tok_ = {Tok::Number, text, v, tok_.line, tok_.col};
      return;
    }
    if (c == '-' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '>') {
      bump();
      bump();
      tok_ = {Tok::Punct, "->", 0, tok_.line, tok_.col};
      return;
    }
    bump();
    tok_ = {Tok::Punct, std::string(1, c), 0, tok_.line, tok_.col};
  }

  void skip_space() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) bump();
      if (pos_ < s_.size() && s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

struct PendingRef {  // name uses checked after all declarations are known
  std::string name;
  int line, col;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  GraphicalModel parse() {
    expect_ident("model");
    model_.name = expect_any_ident("model name");
    expect_punct("{");
    while (!at_punct("}")) {
      const Token& t = lex_.peek();
      if (t.kind != Tok::Ident)
        throw ParseError("expected a declaration or '}'", t.line, t.col);
      if (t.text == "observed" || t.text == "latent" || t.text == "param")
        var_decl();
      else if (t.text == "guide")
        guide_decl();
      else if (t.text == "generative_only") {
        lex_.take();
        model_.generative_only = true;
      } else
        throw ParseError("unknown declaration '" + t.text + "'", t.line, t.col);
    }
    expect_punct("}");
    const Token& t = lex_.peek();
    if (t.kind != Tok::End) throw ParseError("trailing input after model", t.line, t.col);
    resolve_names();
    return std::move(model_);
  }

 private:
  void var_decl() {
    Token role_tok = lex_.take();
    Role role = role_tok.text == "observed" ? Role::Observed
                : role_tok.text == "latent" ? Role::Latent
                                            : Role::Parameter;
    std::string name = expect_any_ident("variable name");
    expect_punct(":");
    Support sup = support();
    expect_punct("~");
    DistributionSpec spec = dist();

    Variable v{name, sup, role, std::nullopt};
    if (role == Role::Parameter) {
      v.binding = std::move(spec);
      model_.variables.push_back(std::move(v));
      return;
    }
    model_.variables.push_back(std::move(v));
    Factor f;
    f.targets = {name};
    pending_factors_.push_back({static_cast<int>(model_.generative.size()), std::move(spec)});
    model_.generative.push_back(std::move(f));
  }

  void guide_decl() {
    lex_.take();  // guide
    Token q = lex_.take();
    if (q.kind != Tok::Ident || q.text != "q")
      throw ParseError("guides are declared as q(targets | parents)", q.line, q.col);
    expect_punct("(");
    Factor g;
    while (lex_.peek().kind == Tok::Ident) g.targets.push_back(take_ref().name);
    if (g.targets.empty()) {
      const Token& t = lex_.peek();
      throw ParseError("guide needs at least one target variable", t.line, t.col);
    }
    if (at_punct("|")) {
      expect_punct("|");
      while (lex_.peek().kind == Tok::Ident) g.parents.push_back(take_ref().name);
    }
    expect_punct(")");
    expect_punct("~");
    g.spec = dist();
    model_.guides.push_back(std::move(g));
  }

  Support support() {
    Token t = lex_.take();
    if (t.kind != Tok::Ident) throw ParseError("expected a support", t.line, t.col);
    if (t.text == "bool") return Support::boolean();
    if (t.text == "real") {
      if (at_punct("[")) {
        expect_punct("[");
        int d = expect_int("vector dimension");
        expect_punct("]");
        return Support::real_vector(d);
      }
      return Support::real();
    }
    if (t.text == "posreal") return Support::positive_real();
    if (t.text == "unit") return Support::unit_interval();
    if (t.text == "cat") {
      expect_punct("(");
      int k = expect_int("categorical arity");
      expect_punct(")");
      return Support::categorical(k);
    }
    if (t.text == "int") {
      expect_punct("(");
      int n = expect_int("integer bound");
      expect_punct(")");
      return Support::bounded_int(n);
    }
    throw ParseError("unknown support '" + t.text + "'", t.line, t.col);
  }

  DistributionSpec dist() {
    Token fam = lex_.take();
    if (fam.kind != Tok::Ident) throw ParseError("expected a family name", fam.line, fam.col);
    const FamilyDescriptor* desc = find_family(fam.text);
    if (!desc)
      throw ParseError("unknown distribution family '" + fam.text + "'", fam.line, fam.col);
    DistributionSpec spec;
    spec.family = fam.text;
    expect_punct("(");
    spec.params.push_back(param());
    while (at_punct(",")) {
      expect_punct(",");
      spec.params.push_back(param());
    }
    expect_punct(")");
    check_arity(*desc, spec, fam);
    return spec;
  }

  void check_arity(const FamilyDescriptor& desc, const DistributionSpec& spec, const Token& at) {
    size_t n = spec.params.size();
    bool has_table = std::any_of(spec.params.begin(), spec.params.end(), [](const ParamExpr& p) {
      return p.kind == ParamExpr::Kind::Table;
    });
    if (desc.name == "Categorical" || desc.name == "Dirichlet") return;  // variadic simplex
    if (has_table) return;  // a table row carries the per-context parameters
    if (n != desc.parameters.size())
      throw ParseError("family " + desc.name + " takes " +
                           std::to_string(desc.parameters.size()) + " parameter(s), got " +
                           std::to_string(n),
                       at.line, at.col);
  }

  ParamExpr param() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Number) return ParamExpr::make_number(lex_.take().number);
    if (t.kind == Tok::Ident && t.text == "table") return table_param();
    if (t.kind == Tok::Ident) {
      Token id = lex_.take();
      if (at_punct("(")) {
        expect_punct("(");
        std::vector<std::string> args;
        while (lex_.peek().kind == Tok::Ident) args.push_back(take_ref().name);
        expect_punct(")");
        return ParamExpr::make_apply(id.text, std::move(args));
      }
      refs_.push_back({id.text, id.line, id.col});
      return ParamExpr::make_ref(id.text);
    }
    throw ParseError("expected a parameter", t.line, t.col);
  }

  ParamExpr table_param() {
    lex_.take();  // table
    NumericTable tab;
    while (lex_.peek().kind == Tok::Ident) tab.index_vars.push_back(take_ref().name);
    if (tab.index_vars.empty()) {
      const Token& t = lex_.peek();
      throw ParseError("table needs at least one index variable", t.line, t.col);
    }
    Token arrow = lex_.take();
    if (arrow.kind != Tok::Punct || arrow.text != "->")
      throw ParseError("expected '->' after table index variables", arrow.line, arrow.col);
    nested_list(tab, 0);
    return ParamExpr::make_table(std::move(tab));
  }

  // Rectangular nested number lists; shape discovered from the first element
  // at each depth and enforced on the siblings.
  void nested_list(NumericTable& tab, int depth) {
    Token open = lex_.take();
    if (open.kind != Tok::Punct || open.text != "[")
      throw ParseError("expected '['", open.line, open.col);
    if (depth > 32) throw ParseError("table nesting too deep", open.line, open.col);
    if (static_cast<int>(tab.shape.size()) <= depth) tab.shape.resize(depth + 1, -1);
    int count = 0;
    bool leaf = lex_.peek().kind == Tok::Number;
    for (;;) {
      if (leaf) {
        Token num = lex_.take();
        if (num.kind != Tok::Number) throw ParseError("expected a number", num.line, num.col);
        tab.flat.push_back(num.number);
      } else {
        nested_list(tab, depth + 1);
      }
      ++count;
      if (at_punct(",")) {
        expect_punct(",");
        continue;
      }
      break;
    }
    Token close = lex_.take();
    if (close.kind != Tok::Punct || close.text != "]")
      throw ParseError("expected ']' or ','", close.line, close.col);
    if (tab.shape[depth] == -1)
      tab.shape[depth] = count;
    else if (tab.shape[depth] != count)
      throw ParseError("ragged table: expected " + std::to_string(tab.shape[depth]) +
                           " entries, got " + std::to_string(count),
                       close.line, close.col);
  }

  PendingRef take_ref() {
    Token t = lex_.take();
    PendingRef r{t.text, t.line, t.col};
    refs_.push_back(r);
    return r;
  }

  void resolve_names() {
    std::set<std::string> declared;
    for (const auto& v : model_.variables) declared.insert(v.name);
    for (const auto& r : refs_)
      if (!declared.count(r.name))
        throw ParseError("unknown identifier " + r.name, r.line, r.col);

    // Generative parents: non-parameter variables referenced by the
    // distribution parameters, in first-appearance order.
    for (auto& [fi, spec] : pending_factors_) {
      Factor& f = model_.generative[fi];
      auto consider = [&](const std::string& n) {
        const Variable* v = model_.find_variable(n);
        if (!v || v->role == Role::Parameter) return;
        if (std::find(f.targets.begin(), f.targets.end(), n) != f.targets.end()) return;
        if (std::find(f.parents.begin(), f.parents.end(), n) == f.parents.end())
          f.parents.push_back(n);
      };
      for (const auto& p : spec.params) {
        if (p.kind == ParamExpr::Kind::Ref) consider(p.name);
        if (p.kind == ParamExpr::Kind::Apply)
          for (const auto& a : p.args) consider(a);
        if (p.kind == ParamExpr::Kind::Table)
          for (const auto& a : p.table.index_vars) consider(a);
      }
      f.spec = std::move(spec);
    }
  }

  void expect_ident(const std::string& kw) {
    Token t = lex_.take();
    if (t.kind != Tok::Ident || t.text != kw)
      throw ParseError("expected '" + kw + "'", t.line, t.col);
  }
  std::string expect_any_ident(const std::string& what) {
    Token t = lex_.take();
    if (t.kind != Tok::Ident) throw ParseError("expected " + what, t.line, t.col);
    return t.text;
  }
  void expect_punct(const std::string& p) {
    Token t = lex_.take();
    if (t.kind != Tok::Punct || t.text != p)
      throw ParseError("expected '" + p + "'", t.line, t.col);
  }
  int expect_int(const std::string& what) {
    Token t = lex_.take();
    if (t.kind != Tok::Number || t.number != std::floor(t.number))
      throw ParseError("expected an integer " + what, t.line, t.col);
    return static_cast<int>(t.number);
  }
  bool at_punct(const std::string& p) {
    return lex_.peek().kind == Tok::Punct && lex_.peek().text == p;
  }

  Lexer lex_;
  GraphicalModel model_;
  std::vector<std::pair<int, DistributionSpec>> pending_factors_;
  std::vector<PendingRef> refs_;
};

std::string support_text(const Support& s) {
  switch (s.kind) {
    case SupportKind::Boolean: return "bool";
    case SupportKind::Categorical: return "cat(" + std::to_string(s.size) + ")";
    case SupportKind::BoundedInt: return "int(" + std::to_string(s.size) + ")";
    case SupportKind::Real: return "real";
    case SupportKind::PositiveReal: return "posreal";
    case SupportKind::UnitInterval: return "unit";
    case SupportKind::RealVector: return "real[" + std::to_string(s.size) + "]";
  }
  return "real";
}

void render_table(const NumericTable& t, std::ostringstream& os) {
  os << "table";
  for (const auto& v : t.index_vars) os << ' ' << v;
  os << " -> ";
  // Recursive row-major walk over the shape.
  size_t cursor = 0;
  auto emit = [&](auto&& self, size_t depth) -> void {
    os << '[';
    int n = t.shape[depth];
    for (int i = 0; i < n; ++i) {
      if (i) os << ", ";
      if (depth + 1 == t.shape.size())
        os << canonical_number(t.flat[cursor++]);
      else
        self(self, depth + 1);
    }
    os << ']';
  };
  emit(emit, 0);
}

void render_param(const ParamExpr& p, std::ostringstream& os) {
  switch (p.kind) {
    case ParamExpr::Kind::Number: os << canonical_number(p.number); return;
    case ParamExpr::Kind::Ref: os << p.name; return;
    case ParamExpr::Kind::Apply: {
      os << p.name << '(';
      for (size_t i = 0; i < p.args.size(); ++i) {
        if (i) os << ' ';
        os << p.args[i];
      }
      os << ')';
      return;
    }
    case ParamExpr::Kind::Table: render_table(p.table, os); return;
  }
}

void render_dist(const DistributionSpec& spec, std::ostringstream& os) {
  os << spec.family << '(';
  for (size_t i = 0; i < spec.params.size(); ++i) {
    if (i) os << ", ";
    render_param(spec.params[i], os);
  }
  os << ')';
}

}  // namespace

GraphicalModel parse_model(const ModelSource& src) { return Parser(src.text).parse(); }

std::string render_model(const GraphicalModel& m) {
  std::ostringstream os;
  os << "model " << m.name << " {\n";
  if (m.generative_only) os << "  generative_only\n";
  for (const auto& v : m.variables) {
    os << "  ";
    switch (v.role) {
      case Role::Observed: os << "observed "; break;
      case Role::Latent: os << "latent "; break;
      case Role::Parameter: os << "param "; break;
    }
    os << v.name << " : " << support_text(v.support) << " ~ ";
    if (v.role == Role::Parameter) {
      if (!v.binding)
        throw std::invalid_argument("parameter '" + v.name + "' has no constant binding");
      render_dist(*v.binding, os);
    } else {
      const Factor* mine = nullptr;
      for (const auto& f : m.generative) {
        if (std::find(f.targets.begin(), f.targets.end(), v.name) != f.targets.end()) {
          if (f.targets.size() != 1)
            throw std::invalid_argument(
                "multi-variable target blocks are not expressible in the model grammar");
          mine = &f;
          break;
        }
      }
      if (!mine)
        throw std::invalid_argument("variable '" + v.name + "' has no generative factor");
      render_dist(mine->spec, os);
    }
    os << '\n';
  }
  for (const auto& g : m.guides) {
    os << "  guide q(";
    for (size_t i = 0; i < g.targets.size(); ++i) {
      if (i) os << ' ';
      os << g.targets[i];
    }
    if (!g.parents.empty()) {
      os << " | ";
      for (size_t i = 0; i < g.parents.size(); ++i) {
        if (i) os << ' ';
        os << g.parents[i];
      }
    }
    os << ") ~ ";
    render_dist(g.spec, os);
    os << '\n';
  }
  os << "}\n";
  return os.str();
}

}  // namespace elboforge
