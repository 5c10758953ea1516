// elbo-forge: compile graphical-model files into symbolic ELBOs, query the
// distribution registry, run conjugate updates, and verify models against
// the enumeration oracles.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "elboforge/conjugate.hpp"
#include "elboforge/dsl.hpp"
#include "elboforge/elbo.hpp"
#include "elboforge/model.hpp"
#include "elboforge/verify.hpp"
#include "elboforge/zoo.hpp"

using namespace elboforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GraphicalModel load_model(const std::string& path) {
  return parse_model({read_file(path), path});
}

/// Inline JSON or @file indirection.
nlohmann::json json_arg(const std::string& text) {
  if (!text.empty() && text[0] == '@') return nlohmann::json::parse(read_file(text.substr(1)));
  return nlohmann::json::parse(text);
}

std::uint64_t default_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ELBO_FORGE_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    size_t a = item.find_first_not_of(" \t");
    size_t b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

/// Commas inside q(...) signatures do not separate list items.
std::vector<std::string> split_guide_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  out.push_back(item);
  std::vector<std::string> trimmed;
  for (auto& t : out) {
    size_t a = t.find_first_not_of(" \t");
    size_t b = t.find_last_not_of(" \t");
    if (a != std::string::npos) trimmed.push_back(t.substr(a, b - a + 1));
  }
  return trimmed;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path) {
  GraphicalModel m = load_model(path);
  ValidationReport r = validate(m);
  for (const auto& v : r.entries) {
    const char* tag = v.severity == Severity::Error ? "violation" : "note";
    std::cout << tag << " [" << v.code << "] " << v.element << ": " << v.message << "\n";
  }
  if (r.valid()) {
    std::cout << "OK\n";
    return kExitOk;
  }
  return kExitDomain;
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

int find_guide(const GraphicalModel& m, const std::string& token) {
  std::vector<int> hits;
  for (size_t gi = 0; gi < m.guides.size(); ++gi) {
    const Factor& g = m.guides[gi];
    std::string sig = factor_signature(g, 'q');
    std::string targets;
    for (size_t i = 0; i < g.targets.size(); ++i)
      targets += (i ? "," : "") + g.targets[i];
    if (token == sig || token == targets) hits.push_back(static_cast<int>(gi));
  }
  if (hits.empty()) throw UsageError("--qprime: no guide matches '" + token + "'");
  if (hits.size() > 1)
    throw UsageError("--qprime: '" + token + "' is ambiguous; use the full q(...) signature");
  return hits[0];
}

int cmd_derive(const std::string& path, const std::string& qprime, const std::string& format,
               bool heuristic) {
  GraphicalModel m = load_model(path);
  ValidationReport report = validate(m);
  if (!report.valid()) {
    for (const auto* v : report.errors())
      std::cerr << "violation [" << v->code << "] " << v->element << ": " << v->message << "\n";
    return kExitDomain;
  }

  std::vector<QPrimeSelection> all = enumerate_qprime(m);
  std::vector<QPrimeSelection> chosen_sels;
  if (qprime.empty()) {
    chosen_sels = all;
  } else {
    std::vector<int> want;
    if (qprime != "none")
      for (const auto& tok : split_guide_list(qprime)) want.push_back(find_guide(m, tok));
    std::sort(want.begin(), want.end());
    bool found = false;
    for (const auto& s : all)
      if (s.chosen == want) {
        chosen_sels = {s};
        found = true;
      }
    if (!found)
      throw UsageError("--qprime names guides that do not form a matchable selection");
  }

  HeuristicReport hr;
  if (heuristic) hr = heuristic_filter(m, all);
  auto heuristic_tag = [&](const QPrimeSelection& sel) -> std::string {
    if (!heuristic) return "";
    for (size_t i = 0; i < all.size(); ++i) {
      if (!(all[i] == sel)) continue;
      const HeuristicEntry& e = hr.entries[i];
      if (e.rejected) return "  [rejected: " + e.reason + "]";
      if (e.covers_all_guides) return "  [recommended]";
      return "  [kept: needs siblings for full guide coverage]";
    }
    return "";
  };

  if (format == "dump") {
    nlohmann::ordered_json out;
    out["model"] = m.name;
    out["factorization"] = factorization_text(m);
    out["selections"] = nlohmann::ordered_json::array();
    for (const auto& sel : chosen_sels) {
      nlohmann::ordered_json entry = nlohmann::ordered_json::parse(dump(m, derive(m, sel)));
      nlohmann::ordered_json rec;
      rec["qprime"] = nlohmann::ordered_json::array();
      for (int gi : sel.chosen) rec["qprime"].push_back(factor_signature(m.guides[gi], 'q'));
      for (auto& [k, v] : entry.items()) rec[k] = v;
      out["selections"].push_back(std::move(rec));
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }

  FormulaSyntax syntax = format == "latex" ? FormulaSyntax::Latex : FormulaSyntax::Text;
  for (const auto& sel : chosen_sels) {
    FactorPartition part = partition(m, sel);
    auto set_text = [&](const std::vector<int>& fs) {
      std::string s = "{";
      for (size_t i = 0; i < fs.size(); ++i)
        s += (i ? ", " : "") + factor_signature(m.generative[fs[i]], 'p');
      return s + "}";
    };
    std::cout << selection_label(m, sel) << heuristic_tag(sel) << "\n";
    std::cout << "  P1 = " << set_text(part.p1) << "  P2 = " << set_text(part.p2)
              << "  P3 = " << set_text(part.p3) << "\n";
    std::cout << "  ELBO: " << render(m, derive(m, sel), syntax) << "\n";
  }
  if (heuristic) {
    if (hr.union_covers_guides)
      std::cout << "heuristic: the kept selections jointly cover every guide\n";
    else {
      std::cout << "heuristic: uncovered guides:";
      for (const auto& g : hr.uncovered_guides) std::cout << " " << g;
      std::cout << "\n";
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// zoo
// ---------------------------------------------------------------------------

std::string ops_text(const FamilyOps& ops) {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (on) s += std::string(s.empty() ? "" : ",") + name;
  };
  add(ops.log_prob, "logprob");
  add(ops.entropy, "entropy");
  add(ops.kl, "kl");
  add(ops.sample, "sample");
  add(ops.nll_formula, "nll");
  return s.empty() ? "-" : s;
}

std::string support_text(SupportClass s) {
  switch (s) {
    case SupportClass::Boolean: return "bool";
    case SupportClass::Categorical: return "cat";
    case SupportClass::BoundedInt: return "int";
    case SupportClass::Real: return "real";
    case SupportClass::PositiveReal: return "posreal";
    case SupportClass::Interval: return "interval";
    case SupportClass::RealVector: return "vector";
    case SupportClass::Simplex: return "simplex";
    case SupportClass::Any: return "any";
  }
  return "?";
}

int cmd_zoo(const std::string& family) {
  if (family.empty()) {
    std::printf("%-18s %-9s %-34s %s\n", "family", "support", "implemented", "conjugate");
    for (const auto& f : registry()) {
      std::string conj = f.conjugate_prior.value_or("");
      for (const auto& [param, fam] : f.parameter_conjugates)
        conj += (conj.empty() ? "" : "; ") + param + ": " + fam;
      std::printf("%-18s %-9s %-34s %s\n", f.name.c_str(), support_text(f.support).c_str(),
                  ops_text(f.ops).c_str(), conj.empty() ? "-" : conj.c_str());
    }
    return kExitOk;
  }
  const FamilyDescriptor* f = find_family(family);
  if (!f) {
    std::cerr << "unknown family '" << family << "'\n";
    return kExitDomain;
  }
  std::cout << f->name << "\n  support: " << support_text(f->support) << "\n  parameters:";
  for (const auto& [name, sem] : f->parameters) std::cout << " " << name << " (" << sem << ")";
  std::cout << "\n  max-entropy for:";
  if (f->max_entropy_constraints.empty()) std::cout << " (not a catalogued max-entropy form)";
  for (const auto& c : f->max_entropy_constraints) std::cout << " " << c << ";";
  std::cout << "\n  flags:";
  std::cout << (f->has_mean ? " mean" : " no-mean") << (f->has_variance ? " variance" : " no-variance");
  if (f->heavy_tail) std::cout << " heavy-tail";
  if (f->sparse) std::cout << " sparse";
  std::cout << "\n  implemented: " << ops_text(f->ops) << "\n";
  if (f->conjugate_prior) std::cout << "  conjugate prior: " << *f->conjugate_prior << "\n";
  for (const auto& [param, fam] : f->parameter_conjugates)
    std::cout << "  conjugate prior for " << param << ": " << fam << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// update
// ---------------------------------------------------------------------------

int cmd_update(const std::string& family, const std::string& prior, const std::string& data) {
  nlohmann::json req{{"family", family},
                     {"prior", json_arg(prior)},
                     {"observations", json_arg(data)}};
  std::cout << conjugate_update_json(req).dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckRow {
  std::string name;
  bool pass;
  std::string detail;
};

int cmd_verify(const std::string& path, const std::string& data_path, const std::string& checks,
               const std::string& valid_json, const std::string& classes_json,
               std::optional<std::uint64_t> seed_flag) {
  GraphicalModel m = load_model(path);
  ValidationReport vr = validate(m);
  if (!vr.valid()) {
    for (const auto* v : vr.errors()) std::cerr << "violation: " << v->message << "\n";
    return kExitDomain;
  }
  std::uint64_t seed = default_seed(seed_flag);

  std::ifstream in(data_path);
  if (!in.good()) throw std::runtime_error("cannot open '" + data_path + "'");
  std::vector<Assignment> records = assignments_from_jsonl(in, m);
  if (records.empty()) throw std::runtime_error("dataset is empty");
  DiscreteDataset data = dataset_from_assignments(m, records);

  ValidityPartition validity;
  if (!valid_json.empty()) {
    std::string text = valid_json[0] == '@' ? read_file(valid_json.substr(1)) : valid_json;
    validity = validity_from_json(text, m, data);
  } else {
    validity.valid.assign(data.space.size(), 1);
  }
  EquivalencePartition classes;
  if (!classes_json.empty()) {
    std::string text = classes_json[0] == '@' ? read_file(classes_json.substr(1)) : classes_json;
    classes = classes_from_json(text, m, data);
  } else {
    classes.class_of.resize(data.space.size());
    for (size_t i = 0; i < data.space.size(); ++i) classes.class_of[i] = static_cast<int>(i);
    classes.num_classes = static_cast<int>(data.space.size());
  }

  std::vector<std::string> wanted = split_csv(
      checks.empty() ? "overfit,soundness,completeness,jensen,mc" : checks);
  std::vector<CheckRow> rows;
  char buf[160];

  for (const auto& check : wanted) {
    if (check == "overfit") {
      std::vector<double> p = brute_force_mle(data);
      std::vector<double> q = data.empirical();
      double tv = 0;
      for (size_t i = 0; i < p.size(); ++i) tv += std::fabs(p[i] - q[i]);
      tv /= 2;
      std::snprintf(buf, sizeof buf, "TV(optimizer, empirical) = %.3e", tv);
      rows.push_back({check, tv <= 1e-6, buf});
    } else if (check == "soundness") {
      std::vector<double> p = brute_force_mle(data);
      SoundnessResult r = soundness_check(p, validity);
      std::string detail = r.sound ? "no mass above 1e-9 outside the valid set"
                                   : "mass on " + std::to_string(r.violations.size()) +
                                         " invalid point(s)";
      rows.push_back({check, r.sound, detail});
    } else if (check == "completeness") {
      try {
        CompletenessResult r = completeness_check(data, validity, classes);
        bool theorem_holds = !r.generalizes || r.complete;
        std::snprintf(buf, sizeof buf, "generalizes=%s complete=%s",
                      r.generalizes ? "yes" : "no", r.complete ? "yes" : "no");
        rows.push_back({check, theorem_holds, buf});
      } catch (const std::invalid_argument& e) {
        rows.push_back({check, false, std::string("hypothesis violated: ") + e.what()});
      }
    } else if (check == "jensen") {
      std::vector<QPrimeSelection> sels = enumerate_qprime(m);
      GraphicalModel tight = m;
      tight.guides = true_posterior_guides(m);
      std::vector<QPrimeSelection> tight_sels = enumerate_qprime(tight);
      double worst_slack = -1e300, worst_gap = 0;
      size_t budget = std::min<size_t>(records.size(), 5);
      bool pass = true;
      for (size_t i = 0; i < budget; ++i) {
        double evidence = exact_log_evidence(m, records[i]);
        if (std::isinf(evidence)) continue;
        for (const auto& sel : sels) {
          double slack = numeric_elbo(m, sel, records[i], Enumerate{}) - evidence;
          worst_slack = std::max(worst_slack, slack);
          if (slack > 1e-9) pass = false;
        }
        if (!tight_sels.empty()) {
          double gap = evidence - numeric_elbo(tight, tight_sels.back(), records[i], Enumerate{});
          worst_gap = std::max(worst_gap, std::fabs(gap));
          if (std::fabs(gap) > 1e-9) pass = false;
        }
      }
      std::snprintf(buf, sizeof buf,
                    "max ELBO-evidence slack = %.3e, posterior-substitution gap = %.3e",
                    worst_slack, worst_gap);
      rows.push_back({check, pass, buf});
    } else if (check == "mc") {
      std::vector<QPrimeSelection> sels = enumerate_qprime(m);
      const QPrimeSelection& sel = sels.back();
      double exact = numeric_elbo(m, sel, records[0], Enumerate{});
      McEstimate est = numeric_elbo_mc(m, sel, records[0], 10000, seed);
      double err = std::fabs(est.estimate - exact);
      bool pass = err <= 5 * est.std_error || err == 0.0;
      std::snprintf(buf, sizeof buf, "|mc(1e4) - enumerate| = %.3e (5 s.e. = %.3e)", err,
                    5 * est.std_error);
      rows.push_back({check, pass, buf});
    } else {
      throw UsageError("unknown check '" + check + "'");
    }
  }

  bool all = true;
  for (const auto& r : rows) {
    all = all && r.pass;
    std::printf("[%s] %-13s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
  }
  return all ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elbo-forge: graphical models in, ELBO formulas and oracle checks out"};
  app.require_subcommand(1);

  std::string model_path, qprime, format = "text", family, prior, data, checks, valid_json,
              classes_json, data_path;
  bool heuristic = false, all_qprime = false;
  std::optional<std::uint64_t> seed;

  CLI::App* validate_cmd = app.add_subcommand("validate", "structural checks on a model file");
  validate_cmd->add_option("model", model_path, "model file")->required();

  CLI::App* derive_cmd = app.add_subcommand("derive", "emit ELBO formulas");
  derive_cmd->add_option("model", model_path, "model file")->required();
  derive_cmd->add_flag("--all-qprime", all_qprime, "derive every selection (default)");
  derive_cmd->add_option("--qprime", qprime,
                         "comma-separated guide names for one selection, or 'none'");
  derive_cmd->add_option("--format", format, "text | latex | dump")
      ->check(CLI::IsMember({"text", "latex", "dump"}));
  derive_cmd->add_flag("--heuristic", heuristic, "annotate selections with the screening rules");

  CLI::App* zoo_cmd = app.add_subcommand("zoo", "distribution registry");
  zoo_cmd->add_option("family", family, "family to describe");

  CLI::App* update_cmd = app.add_subcommand("update", "conjugate prior -> posterior");
  update_cmd->add_option("--family", family, "beta | dirichlet | normal-mean | variance")
      ->required();
  update_cmd->add_option("--prior", prior, "prior JSON (inline or @file)")->required();
  update_cmd->add_option("--data", data, "observations JSON (inline or @file)")->required();

  CLI::App* verify_cmd = app.add_subcommand("verify", "oracle checks against a dataset");
  verify_cmd->add_option("model", model_path, "model file")->required();
  verify_cmd->add_option("--data", data_path, "JSONL dataset")->required();
  verify_cmd->add_option("--checks", checks, "overfit,soundness,completeness,jensen,mc");
  verify_cmd->add_option("--valid", valid_json, "valid points (JSON array, inline or @file)");
  verify_cmd->add_option("--classes", classes_json,
                         "equivalence classes (JSON array of arrays)");
  verify_cmd->add_option("--seed", seed, "RNG seed (default: ELBO_FORGE_SEED or 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(model_path);
    if (*derive_cmd) return cmd_derive(model_path, qprime, format, heuristic);
    if (*zoo_cmd) return cmd_zoo(family);
    if (*update_cmd) return cmd_update(family, prior, data);
    if (*verify_cmd)
      return cmd_verify(model_path, data_path, checks, valid_json, classes_json, seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
