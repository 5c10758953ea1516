#pragma once

#include <string>
#include <utility>
#include <vector>

#include "elboforge/model.hpp"

namespace elboforge {

// ---------------------------------------------------------------------------
// Q' selection and the P1/P2/P3 split
// ---------------------------------------------------------------------------

/// A subset of guides, each matched to the generative factor over the same
/// target block (dependencies may differ). At most one guide per block.
struct QPrimeSelection {
  std::vector<int> chosen;                      // guide indices, ascending
  std::vector<std::pair<int, int>> matching;    // (guide index, generative index)

  bool operator==(const QPrimeSelection&) const = default;
};

/// All selections, ordered by subset bitmask over guide declaration order.
/// Guides whose target block matches no generative factor never appear;
/// subsets that would sample one latent block twice are skipped.
std::vector<QPrimeSelection> enumerate_qprime(const GraphicalModel& model);

struct FactorPartition {
  std::vector<int> p1;  // latent factors with a matching guide
  std::vector<int> p2;  // latent factors without
  std::vector<int> p3;  // factors whose targets are all observed

  bool operator==(const FactorPartition&) const = default;
};

FactorPartition partition(const GraphicalModel& model, const QPrimeSelection& sel);

// ---------------------------------------------------------------------------
// The symbolic bound
// ---------------------------------------------------------------------------

enum class RatioTag { ProperKl, NestedExpectationRatio };

struct MeasureEntry {
  bool is_guide;  // q from Q' vs p from P2
  int index;      // into model.guides / model.generative

  bool operator==(const MeasureEntry&) const = default;
};

struct RatioTerm {
  int p_index;   // generative factor in P1
  int q_index;   // matched guide
  RatioTag tag;

  bool operator==(const RatioTerm&) const = default;
};

struct ElboExpression {
  std::vector<MeasureEntry> sampling_measure;  // P2 union Q', ancestral order
  std::vector<int> reconstruction_terms;       // log p for P3
  std::vector<RatioTerm> ratio_terms;          // log(p/q) for P1

  bool operator==(const ElboExpression&) const = default;
};

/// Instantiates the general bound for one selection. A ratio term is a proper
/// KL when the pair's conditioning variables can all be fixed before its
/// block is sampled (observed, constant, or sampled by a measure factor that
/// does not descend from the block); otherwise the expectation over a
/// downstream variable intervenes and the term stays a log ratio.
ElboExpression derive(const GraphicalModel& model, const QPrimeSelection& sel);

// ---------------------------------------------------------------------------
// Q' selection heuristic
// ---------------------------------------------------------------------------

struct HeuristicEntry {
  int selection;               // index into the input list
  bool rejected = false;
  std::string reason;          // "ignores-input" when rejected
  bool covers_all_guides = false;  // recommended standalone
};

struct HeuristicReport {
  std::vector<HeuristicEntry> entries;
  bool union_covers_guides = false;  // the kept set is jointly recommended
  std::vector<std::string> uncovered_guides;
};

/// Two screening rules, flagged rather than silently applied: reject
/// selections whose sampling chains feed an observed reconstruction without
/// conditioning on any observed variable, and recommend kept sets whose
/// union covers every guide.
HeuristicReport heuristic_filter(const GraphicalModel& model,
                                 const std::vector<QPrimeSelection>& selections);

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class FormulaSyntax { Text, Latex };

std::string render(const GraphicalModel& model, const ElboExpression& e, FormulaSyntax syntax);

/// Machine-readable structural dump with stable field order (JSON text).
std::string dump(const GraphicalModel& model, const ElboExpression& e);

/// "Q' = {q(z|x)}" style label for a selection.
std::string selection_label(const GraphicalModel& model, const QPrimeSelection& sel);

}  // namespace elboforge
