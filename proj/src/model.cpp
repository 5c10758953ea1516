#include "elboforge/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "elboforge/zoo.hpp"

namespace elboforge {

int Support::cardinality() const {
  switch (kind) {
    case SupportKind::Boolean: return 2;
    case SupportKind::Categorical: return size;
    case SupportKind::BoundedInt: return size + 1;
    default: throw std::logic_error("cardinality of a continuous support");
  }
}

ParamExpr ParamExpr::make_number(double v) {
  ParamExpr e;
  e.kind = Kind::Number;
  e.number = v;
  return e;
}
ParamExpr ParamExpr::make_ref(std::string n) {
  ParamExpr e;
  e.kind = Kind::Ref;
  e.name = std::move(n);
  return e;
}
ParamExpr ParamExpr::make_apply(std::string fn, std::vector<std::string> a) {
  ParamExpr e;
  e.kind = Kind::Apply;
  e.name = std::move(fn);
  e.args = std::move(a);
  return e;
}
ParamExpr ParamExpr::make_table(NumericTable t) {
  ParamExpr e;
  e.kind = Kind::Table;
  e.table = std::move(t);
  return e;
}

const Variable* GraphicalModel::find_variable(std::string_view n) const {
  for (const auto& v : variables)
    if (v.name == n) return &v;
  return nullptr;
}

int GraphicalModel::variable_index(std::string_view n) const {
  for (size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == n) return static_cast<int>(i);
  return -1;
}

bool ValidationReport::valid() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const Violation& v) { return v.severity == Severity::Error; });
}

std::vector<const Violation*> ValidationReport::errors() const {
  std::vector<const Violation*> out;
  for (const auto& v : entries)
    if (v.severity == Severity::Error) out.push_back(&v);
  return out;
}

std::string factor_signature(const Factor& f, char letter) {
  std::ostringstream os;
  os << letter << '(';
  for (size_t i = 0; i < f.targets.size(); ++i) {
    if (i) os << ',';
    os << f.targets[i];
  }
  if (!f.parents.empty()) {
    os << '|';
    for (size_t i = 0; i < f.parents.size(); ++i) {
      if (i) os << ',';
      os << f.parents[i];
    }
  }
  os << ')';
  return os.str();
}

namespace {

void add(ValidationReport& r, std::string code, std::string element, std::string message,
         Severity sev = Severity::Error) {
  r.entries.push_back({std::move(code), std::move(element), std::move(message), sev});
}

/// Non-parameter variables referenced anywhere inside a factor's parameters.
std::set<std::string> param_variable_refs(const GraphicalModel& m, const DistributionSpec& spec) {
  std::set<std::string> out;
  auto consider = [&](const std::string& n) {
    const Variable* v = m.find_variable(n);
    if (v && v->role != Role::Parameter) out.insert(n);
  };
  for (const auto& p : spec.params) {
    switch (p.kind) {
      case ParamExpr::Kind::Ref: consider(p.name); break;
      case ParamExpr::Kind::Apply:
        for (const auto& a : p.args) consider(a);
        break;
      case ParamExpr::Kind::Table:
        for (const auto& a : p.table.index_vars) consider(a);
        break;
      case ParamExpr::Kind::Number: break;
    }
  }
  return out;
}

}  // namespace

ValidationReport validate(const GraphicalModel& m) {
  ValidationReport report;

  // Variable-level invariants.
  std::set<std::string> seen;
  for (const auto& v : m.variables) {
    if (!seen.insert(v.name).second)
      add(report, "duplicate-name", v.name, "variable '" + v.name + "' declared more than once");
    if (v.support.kind == SupportKind::Categorical && v.support.size < 2)
      add(report, "bad-arity", v.name,
          "categorical variable '" + v.name + "' needs arity >= 2");
    if (v.support.kind == SupportKind::RealVector && v.support.size < 1)
      add(report, "bad-dimension", v.name,
          "vector variable '" + v.name + "' needs dimension >= 1");
    if (v.support.kind == SupportKind::BoundedInt && v.support.size < 0)
      add(report, "bad-bound", v.name, "bounded-integer bound must be >= 0");
  }

  auto check_names = [&](const Factor& f, char letter) {
    for (const auto& t : f.targets)
      if (!m.find_variable(t))
        add(report, "unknown-variable", factor_signature(f, letter),
            "target '" + t + "' is not declared");
    for (const auto& p : f.parents)
      if (!m.find_variable(p))
        add(report, "unknown-variable", factor_signature(f, letter),
            "parent '" + p + "' is not declared");
  };

  // Factor-level invariants.
  for (const auto& f : m.generative) {
    check_names(f, 'p');
    for (const auto& t : f.targets)
      if (std::find(f.parents.begin(), f.parents.end(), t) != f.parents.end())
        add(report, "target-in-parents", factor_signature(f, 'p'),
            "'" + t + "' appears both as target and parent");
    const FamilyDescriptor* fam = find_family(f.spec.family);
    if (!fam) {
      add(report, "unknown-family", factor_signature(f, 'p'),
          "distribution family '" + f.spec.family + "' is not registered");
    } else if (f.targets.size() > 1) {
      // A joint block: a Categorical over the product of discrete supports.
      bool all_discrete = true;
      for (const auto& t : f.targets) {
        const Variable* v = m.find_variable(t);
        if (v && !v->support.is_discrete_scalar()) all_discrete = false;
      }
      if (!(fam->support == SupportClass::Categorical && all_discrete))
        add(report, "support-mismatch", factor_signature(f, 'p'),
            "multi-variable blocks need a Categorical over discrete targets");
    } else {
      for (const auto& t : f.targets) {
        const Variable* v = m.find_variable(t);
        if (v && !family_supports(*fam, v->support))
          add(report, "support-mismatch", factor_signature(f, 'p'),
              "family " + f.spec.family + " cannot model support of '" + t + "'");
      }
    }
  }
  for (const auto& g : m.guides) {
    check_names(g, 'q');
    for (const auto& t : g.targets)
      if (std::find(g.parents.begin(), g.parents.end(), t) != g.parents.end())
        add(report, "target-in-parents", factor_signature(g, 'q'),
            "'" + t + "' appears both as target and parent");
    if (!find_family(g.spec.family))
      add(report, "unknown-family", factor_signature(g, 'q'),
          "distribution family '" + g.spec.family + "' is not registered");
    // A guide may target an observed variable (role-flipped models do);
    // surface it as information, not an error.
    for (const auto& t : g.targets) {
      const Variable* v = m.find_variable(t);
      if (v && v->role == Role::Observed)
        add(report, "guide-on-observed", factor_signature(g, 'q'),
            "guide targets observed variable '" + t + "'", Severity::Info);
    }
  }

  // Each non-parameter variable has exactly one generative factor.
  for (const auto& v : m.variables) {
    if (v.role == Role::Parameter) continue;
    int n = 0;
    for (const auto& f : m.generative)
      n += std::count(f.targets.begin(), f.targets.end(), v.name);
    if (n != 1)
      add(report, "generative-count", v.name,
          "variable '" + v.name + "' is targeted by " + std::to_string(n) +
              " generative factors (needs exactly 1)");
  }

  // Acyclicity of the generative parent relation (edges target -> parent).
  {
    std::map<std::string, std::vector<std::string>> deps;
    for (const auto& f : m.generative) {
      std::set<std::string> ps(f.parents.begin(), f.parents.end());
      for (const auto& r : param_variable_refs(m, f.spec)) ps.insert(r);
      for (const auto& t : f.targets)
        deps[t] = std::vector<std::string>(ps.begin(), ps.end());
    }
    std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
    std::vector<std::string> cycle;
    auto dfs = [&](auto&& self, const std::string& v) -> bool {
      state[v] = 1;
      for (const auto& p : deps[v]) {
        if (state[p] == 1) {
          cycle.push_back(p);
          return true;
        }
        if (state[p] == 0 && self(self, p)) return true;
      }
      state[v] = 2;
      return false;
    };
    for (const auto& [v, _] : deps) {
      if (state[v] == 0 && dfs(dfs, v)) {
        add(report, "cycle", cycle.front(),
            "generative dependencies contain a cycle through '" + cycle.front() + "'");
        break;
      }
    }
  }

  // Guide coverage of latents.
  if (!m.generative_only) {
    for (const auto& v : m.variables) {
      if (v.role != Role::Latent) continue;
      bool covered = false;
      for (const auto& g : m.guides)
        if (std::find(g.targets.begin(), g.targets.end(), v.name) != g.targets.end())
          covered = true;
      if (!covered)
        add(report, "guide-coverage", v.name,
            "latent variable '" + v.name + "' has no guide distribution");
    }
  }

  // Guide parameters may only reference parents or declared constants.
  for (const auto& g : m.guides) {
    for (const auto& r : param_variable_refs(m, g.spec)) {
      if (std::find(g.parents.begin(), g.parents.end(), r) == g.parents.end() &&
          std::find(g.targets.begin(), g.targets.end(), r) == g.targets.end())
        add(report, "guide-param-ref", factor_signature(g, 'q'),
            "guide parameter references '" + r + "' which is not among its parents");
    }
  }

  return report;
}

std::vector<int> factorization(const GraphicalModel& m) {
  ValidationReport report = validate(m);
  if (!report.valid()) {
    const Violation* first = report.errors().front();
    throw std::invalid_argument("invalid model: " + first->message);
  }

  // Edges point target -> parent, so sources are the variables nothing
  // depends on (the observation leaves) and priors come out last.
  int n = static_cast<int>(m.variables.size());
  std::vector<int> factor_of(n, -1);
  for (size_t fi = 0; fi < m.generative.size(); ++fi)
    for (const auto& t : m.generative[fi].targets)
      factor_of[m.variable_index(t)] = static_cast<int>(fi);

  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> parents_of(n);  // variable -> its parents
  for (const auto& f : m.generative) {
    for (const auto& t : f.targets) {
      int ti = m.variable_index(t);
      for (const auto& p : f.parents) {
        int pi = m.variable_index(p);
        if (m.variables[pi].role == Role::Parameter) continue;
        parents_of[ti].push_back(pi);
        ++indegree[pi];
      }
    }
  }

  std::vector<int> order;
  std::vector<char> emitted_factor(m.generative.size(), 0);
  std::vector<char> done(n, 0);
  for (;;) {
    int next = -1;
    for (int v = 0; v < n; ++v) {
      if (done[v] || m.variables[v].role == Role::Parameter || factor_of[v] < 0) continue;
      if (indegree[v] == 0) {
        next = v;
        break;  // declaration order tie-break
      }
    }
    if (next < 0) break;
    done[next] = 1;
    for (int p : parents_of[next]) --indegree[p];
    int fi = factor_of[next];
    if (!emitted_factor[fi]) {
      emitted_factor[fi] = 1;
      order.push_back(fi);
      // A multi-target factor is emitted once; mark its siblings done.
      for (const auto& t : m.generative[fi].targets) {
        int ti = m.variable_index(t);
        if (!done[ti]) {
          done[ti] = 1;
          for (int p : parents_of[ti]) --indegree[p];
        }
      }
    }
  }
  return order;
}

std::string factorization_text(const GraphicalModel& m) {
  std::string out;
  for (int fi : factorization(m)) out += factor_signature(m.generative[fi], 'p');
  return out;
}

FactorTags classify_factor(const GraphicalModel& m, const Factor& f) {
  FactorTags tags;
  auto observed = [&](const std::string& n) {
    const Variable* v = m.find_variable(n);
    return v && v->role == Role::Observed;
  };

  bool constant_params = true;
  for (const auto& r : param_variable_refs(m, f.spec)) {
    (void)r;
    constant_params = false;
  }
  for (const auto& p : f.spec.params)
    if (p.kind == ParamExpr::Kind::Apply) constant_params = false;

  tags.prior = f.parents.empty() && constant_params;

  bool any_observed_parent = false, all_observed_parents = !f.parents.empty();
  for (const auto& p : f.parents) {
    if (observed(p))
      any_observed_parent = true;
    else
      all_observed_parents = false;
  }
  bool any_observed_target = false, all_observed_targets = !f.targets.empty();
  for (const auto& t : f.targets) {
    if (observed(t))
      any_observed_target = true;
    else
      all_observed_targets = false;
  }
  (void)all_observed_targets;

  tags.posterior = any_observed_parent;
  tags.discriminative = !f.parents.empty() && all_observed_parents && !any_observed_target;
  tags.generative = any_observed_target;
  return tags;
}

Classification classify_variables(const GraphicalModel& m) {
  Classification c;
  for (const auto& v : m.variables) {
    switch (v.role) {
      case Role::Observed: c.observed.push_back(v.name); break;
      case Role::Latent: c.latent.push_back(v.name); break;
      case Role::Parameter: c.parameters.push_back(v.name); break;
    }
  }
  for (const auto& f : m.generative) c.generative_tags.push_back(classify_factor(m, f));
  for (const auto& g : m.guides) c.guide_tags.push_back(classify_factor(m, g));
  return c;
}

}  // namespace elboforge
