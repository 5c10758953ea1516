#include "elboforge/elbo.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace elboforge {

namespace {

std::set<std::string> target_set(const Factor& f) {
  return {f.targets.begin(), f.targets.end()};
}

bool all_targets_observed(const GraphicalModel& m, const Factor& f) {
  for (const auto& t : f.targets) {
    const Variable* v = m.find_variable(t);
    if (!v || v->role != Role::Observed) return false;
  }
  return !f.targets.empty();
}

bool is_role(const GraphicalModel& m, const std::string& name, Role r) {
  const Variable* v = m.find_variable(name);
  return v && v->role == r;
}

/// Generative factor with exactly the guide's target block, if the block has
/// a latent component (observed-only blocks never join a selection).
int match_for_guide(const GraphicalModel& m, const Factor& g) {
  std::set<std::string> want = target_set(g);
  for (size_t fi = 0; fi < m.generative.size(); ++fi) {
    const Factor& f = m.generative[fi];
    if (target_set(f) == want && !all_targets_observed(m, f)) return static_cast<int>(fi);
  }
  return -1;
}

}  // namespace

std::vector<QPrimeSelection> enumerate_qprime(const GraphicalModel& m) {
  std::vector<int> matchable;          // guide indices in declaration order
  std::vector<int> matched_factor;     // aligned generative indices
  for (size_t gi = 0; gi < m.guides.size(); ++gi) {
    int fi = match_for_guide(m, m.guides[gi]);
    if (fi >= 0) {
      matchable.push_back(static_cast<int>(gi));
      matched_factor.push_back(fi);
    }
  }

  std::vector<QPrimeSelection> out;
  const size_t k = matchable.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    QPrimeSelection sel;
    std::set<std::string> sampled;
    bool conflict = false;
    for (size_t i = 0; i < k && !conflict; ++i) {
      if (!(mask >> i & 1)) continue;
      const Factor& g = m.guides[matchable[i]];
      for (const auto& t : g.targets)
        if (!sampled.insert(t).second) conflict = true;  // one sampler per latent block
      sel.chosen.push_back(matchable[i]);
      sel.matching.emplace_back(matchable[i], matched_factor[i]);
    }
    if (!conflict) out.push_back(std::move(sel));
  }
  return out;
}

FactorPartition partition(const GraphicalModel& m, const QPrimeSelection& sel) {
  std::set<int> matched;
  for (const auto& [gi, fi] : sel.matching) matched.insert(fi);
  FactorPartition part;
  for (size_t fi = 0; fi < m.generative.size(); ++fi) {
    int i = static_cast<int>(fi);
    if (all_targets_observed(m, m.generative[fi]))
      part.p3.push_back(i);
    else if (matched.count(i))
      part.p1.push_back(i);
    else
      part.p2.push_back(i);
  }
  return part;
}

namespace {

const Factor& measure_factor(const GraphicalModel& m, const MeasureEntry& e) {
  return e.is_guide ? m.guides[e.index] : m.generative[e.index];
}

/// Ancestral (topological) order of the measure entries; dependencies flow
/// from a sampled parent's entry to the entries conditioning on it. Ties by
/// declaration index of the first target variable.
std::vector<MeasureEntry> order_measure(const GraphicalModel& m,
                                        std::vector<MeasureEntry> entries) {
  const size_t n = entries.size();
  std::map<std::string, int> sampler;  // latent variable -> entry position
  for (size_t i = 0; i < n; ++i)
    for (const auto& t : measure_factor(m, entries[i]).targets) sampler[t] = static_cast<int>(i);

  std::vector<std::set<int>> needs(n);  // entry -> entries it waits for
  for (size_t i = 0; i < n; ++i)
    for (const auto& p : measure_factor(m, entries[i]).parents) {
      auto it = sampler.find(p);
      if (it != sampler.end() && it->second != static_cast<int>(i))
        needs[i].insert(it->second);
    }

  auto decl_rank = [&](const MeasureEntry& e) {
    int best = static_cast<int>(m.variables.size());
    for (const auto& t : measure_factor(m, e).targets)
      best = std::min(best, m.variable_index(t));
    return best;
  };

  std::vector<MeasureEntry> out;
  std::vector<char> done(n, 0);
  for (size_t step = 0; step < n; ++step) {
    int pick = -1;
    for (size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      bool ready = std::all_of(needs[i].begin(), needs[i].end(),
                               [&](int j) { return done[j]; });
      if (!ready) continue;
      if (pick < 0 || decl_rank(entries[i]) < decl_rank(entries[pick]))
        pick = static_cast<int>(i);
    }
    if (pick < 0)
      throw std::invalid_argument("selection has a cyclic sampling measure");
    done[pick] = 1;
    out.push_back(entries[pick]);
  }
  return out;
}

}  // namespace

ElboExpression derive(const GraphicalModel& m, const QPrimeSelection& sel) {
  for (const auto& [gi, fi] : sel.matching) {
    if (gi < 0 || gi >= static_cast<int>(m.guides.size()) || fi < 0 ||
        fi >= static_cast<int>(m.generative.size()))
      throw std::invalid_argument("selection does not refer to this model");
    if (target_set(m.guides[gi]) != target_set(m.generative[fi]))
      throw std::invalid_argument("selection matching pairs different target blocks");
  }

  FactorPartition part = partition(m, sel);

  ElboExpression e;
  std::vector<MeasureEntry> entries;
  for (int fi : part.p2) entries.push_back({false, fi});
  for (const auto& [gi, fi] : sel.matching) entries.push_back({true, gi});
  e.sampling_measure = order_measure(m, std::move(entries));
  e.reconstruction_terms = part.p3;

  // Which measure entry samples each latent, and who depends on whom.
  std::map<std::string, int> sampler;
  const size_t n = e.sampling_measure.size();
  for (size_t i = 0; i < n; ++i)
    for (const auto& t : measure_factor(m, e.sampling_measure[i]).targets)
      sampler[t] = static_cast<int>(i);
  std::vector<std::set<int>> direct(n);  // entry -> entries it conditions on
  for (size_t i = 0; i < n; ++i)
    for (const auto& p : measure_factor(m, e.sampling_measure[i]).parents) {
      auto it = sampler.find(p);
      if (it != sampler.end() && it->second != static_cast<int>(i))
        direct[i].insert(it->second);
    }
  auto depends_on = [&](int from, int on) {
    std::vector<int> stack{from};
    std::set<int> seen;
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      if (cur == on) return true;
      for (int nx : direct[cur]) stack.push_back(nx);
    }
    return false;
  };

  std::map<int, int> matched_guide;
  for (const auto& [gi, fi] : sel.matching) matched_guide[fi] = gi;
  for (int fi : part.p1) {
    const Factor& p = m.generative[fi];
    int gi = matched_guide.at(fi);
    const Factor& q = m.guides[gi];

    // The term is a conditional KL when every conditioning variable of the
    // pair can be fixed before the block is sampled: observed, constant, or
    // sampled by an entry that does not itself descend from the block.
    int block_entry = sampler.count(p.targets.front()) ? sampler.at(p.targets.front()) : -1;
    RatioTag tag = RatioTag::ProperKl;
    auto scan = [&](const std::vector<std::string>& parents) {
      for (const auto& v : parents) {
        if (is_role(m, v, Role::Observed) || is_role(m, v, Role::Parameter)) continue;
        auto it = sampler.find(v);
        if (it == sampler.end()) {
          tag = RatioTag::NestedExpectationRatio;  // unsampled latent: stay conservative
          continue;
        }
        if (block_entry >= 0 && it->second != block_entry &&
            depends_on(it->second, block_entry))
          tag = RatioTag::NestedExpectationRatio;
      }
    };
    scan(p.parents);
    scan(q.parents);
    e.ratio_terms.push_back({fi, gi, tag});
  }
  return e;
}

HeuristicReport heuristic_filter(const GraphicalModel& m,
                                 const std::vector<QPrimeSelection>& selections) {
  HeuristicReport report;
  std::set<int> union_chosen;

  for (size_t si = 0; si < selections.size(); ++si) {
    const QPrimeSelection& sel = selections[si];
    ElboExpression e = derive(m, sel);

    std::map<std::string, const Factor*> sampler;
    for (const auto& me : e.sampling_measure) {
      const Factor& f = me.is_guide ? m.guides[me.index] : m.generative[me.index];
      for (const auto& t : f.targets) sampler[t] = &f;
    }

    // Walk each reconstruction's sampling chain; the chain "sees the input"
    // when some factor along it conditions on an observed variable.
    bool ignores_input = false;
    for (int fi : e.reconstruction_terms) {
      const Factor& obs = m.generative[fi];
      std::vector<std::string> frontier;
      for (const auto& p : obs.parents)
        if (is_role(m, p, Role::Latent)) frontier.push_back(p);
      if (frontier.empty()) continue;
      bool sees_observed = false;
      std::set<std::string> visited;
      while (!frontier.empty()) {
        std::string v = frontier.back();
        frontier.pop_back();
        if (!visited.insert(v).second) continue;
        auto it = sampler.find(v);
        if (it == sampler.end()) continue;
        for (const auto& p : it->second->parents) {
          if (is_role(m, p, Role::Observed)) sees_observed = true;
          if (is_role(m, p, Role::Latent)) frontier.push_back(p);
        }
      }
      if (!sees_observed) {
        ignores_input = true;
        break;
      }
    }

    HeuristicEntry entry;
    entry.selection = static_cast<int>(si);
    entry.covers_all_guides =
        sel.chosen.size() == m.guides.size() && !m.guides.empty();
    if (ignores_input) {
      entry.rejected = true;
      entry.reason = "ignores-input";
    } else {
      union_chosen.insert(sel.chosen.begin(), sel.chosen.end());
    }
    report.entries.push_back(std::move(entry));
  }

  for (size_t gi = 0; gi < m.guides.size(); ++gi)
    if (!union_chosen.count(static_cast<int>(gi)))
      report.uncovered_guides.push_back(factor_signature(m.guides[gi], 'q'));
  report.union_covers_guides = report.uncovered_guides.empty() && !m.guides.empty();
  return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

struct RenderBits {
  std::vector<std::string> measure;
  std::vector<std::string> inner;    // with leading sign, e.g. "+ log p(x|z)"
  std::vector<std::string> outside;  // hoisted KL terms (always subtracted)
};

bool hoistable(const GraphicalModel& m, const Factor& p, const Factor& q) {
  auto fixed = [&](const std::string& v) {
    return is_role(m, v, Role::Observed) || is_role(m, v, Role::Parameter);
  };
  return std::all_of(p.parents.begin(), p.parents.end(), fixed) &&
         std::all_of(q.parents.begin(), q.parents.end(), fixed);
}

RenderBits collect_bits(const GraphicalModel& m, const ElboExpression& e, bool latex) {
  RenderBits bits;
  for (const auto& me : e.sampling_measure) {
    const Factor& f = me.is_guide ? m.guides[me.index] : m.generative[me.index];
    bits.measure.push_back(factor_signature(f, me.is_guide ? 'q' : 'p'));
  }
  const char* log = latex ? "\\log " : "log ";
  for (int fi : e.reconstruction_terms)
    bits.inner.push_back(std::string("+ ") + log + factor_signature(m.generative[fi], 'p'));
  for (const auto& rt : e.ratio_terms) {
    const Factor& p = m.generative[rt.p_index];
    const Factor& q = m.guides[rt.q_index];
    std::string psig = factor_signature(p, 'p');
    std::string qsig = factor_signature(q, 'q');
    if (rt.tag == RatioTag::ProperKl) {
      std::string kl = latex ? "\\mathrm{KL}(" + qsig + "\\|" + psig + ")"
                             : "KL(" + qsig + " || " + psig + ")";
      if (hoistable(m, p, q))
        bits.outside.push_back(kl);
      else
        bits.inner.push_back("- " + kl);
    } else {
      std::string ratio = latex ? "\\log\\frac{" + psig + "}{" + qsig + "}"
                                : "log(" + psig + "/" + qsig + ")";
      bits.inner.push_back("+ " + ratio);
    }
  }
  return bits;
}

std::string join_terms(const std::vector<std::string>& signed_terms) {
  std::string out;
  for (size_t i = 0; i < signed_terms.size(); ++i) {
    const std::string& t = signed_terms[i];
    if (i == 0) {
      if (t.rfind("+ ", 0) == 0)
        out += t.substr(2);
      else
        out += t;  // keeps a visible leading "- "
    } else {
      out += " " + t.substr(0, 1) + " " + t.substr(2);
    }
  }
  return out;
}

}  // namespace

std::string render(const GraphicalModel& m, const ElboExpression& e, FormulaSyntax syntax) {
  bool latex = syntax == FormulaSyntax::Latex;
  RenderBits bits = collect_bits(m, e, latex);
  if (bits.inner.empty() && bits.outside.empty()) return "0";

  std::ostringstream os;
  if (!bits.inner.empty()) {
    if (!bits.measure.empty()) {
      os << (latex ? "\\mathbb{E}_{" : "E_{");
      for (size_t i = 0; i < bits.measure.size(); ++i) {
        if (i) os << ", ";
        os << bits.measure[i];
      }
      os << "}[";
      os << join_terms(bits.inner);
      os << "]";
    } else {
      os << join_terms(bits.inner);
    }
  }
  for (const auto& kl : bits.outside) {
    if (os.tellp() > 0)
      os << " - " << kl;
    else
      os << "-" << kl;
  }
  return os.str();
}

std::string dump(const GraphicalModel& m, const ElboExpression& e) {
  nlohmann::ordered_json j;
  j["measure"] = nlohmann::ordered_json::array();
  for (const auto& me : e.sampling_measure) {
    const Factor& f = me.is_guide ? m.guides[me.index] : m.generative[me.index];
    j["measure"].push_back({{"kind", me.is_guide ? "guide" : "generative"},
                            {"factor", factor_signature(f, me.is_guide ? 'q' : 'p')}});
  }
  j["reconstruction"] = nlohmann::ordered_json::array();
  for (int fi : e.reconstruction_terms)
    j["reconstruction"].push_back(factor_signature(m.generative[fi], 'p'));
  j["ratios"] = nlohmann::ordered_json::array();
  for (const auto& rt : e.ratio_terms)
    j["ratios"].push_back(
        {{"p", factor_signature(m.generative[rt.p_index], 'p')},
         {"q", factor_signature(m.guides[rt.q_index], 'q')},
         {"tag", rt.tag == RatioTag::ProperKl ? "proper-kl" : "nested-expectation-ratio"}});
  return j.dump(2);
}

std::string selection_label(const GraphicalModel& m, const QPrimeSelection& sel) {
  std::ostringstream os;
  os << "Q' = {";
  for (size_t i = 0; i < sel.chosen.size(); ++i) {
    if (i) os << ", ";
    os << factor_signature(m.guides[sel.chosen[i]], 'q');
  }
  os << "}";
  return os.str();
}

}  // namespace elboforge
