#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "elboforge/elbo.hpp"
#include "elboforge/model.hpp"
#include "elboforge/zoo.hpp"

namespace elboforge {

// ---------------------------------------------------------------------------
// Datasets over a finite sample space
// ---------------------------------------------------------------------------

struct DiscreteDataset {
  std::vector<std::string> space;  // point labels, fixed order
  std::vector<long long> counts;   // per point

  long long total() const;
  std::vector<double> empirical() const;  // q(x) = count/total
  /// Convenience: builds the space from labels and tallies samples.
  static DiscreteDataset from_samples(std::vector<std::string> space,
                                      const std::vector<std::string>& samples);
};

struct ValidityPartition {
  std::vector<char> valid;  // aligned with the dataset space
};

struct EquivalencePartition {
  std::vector<int> class_of;  // aligned with the dataset space
  int num_classes = 0;
};

// ---------------------------------------------------------------------------
// Tabular model compilation (exact enumeration backend)
// ---------------------------------------------------------------------------

/// Discrete values for a subset of variables, keyed by name.
using Assignment = std::map<std::string, int>;

struct TabularFactor {
  std::vector<int> targets;       // variable indices
  std::vector<int> parents;       // non-parameter variable indices
  std::vector<int> parent_cards;
  std::vector<int> target_cards;
  std::vector<double> probs;      // row-major over (parents..., targets...)

  /// Probability of the factor's targets given a full assignment.
  double prob(std::span<const int> full) const;
  /// Flat index of the target block under a full assignment of the parents.
  int row_of(std::span<const int> full) const;
  int block_cardinality() const;
};

struct TabularModel {
  const GraphicalModel* model = nullptr;
  std::vector<int> cards;        // per variable; 0 for parameters
  std::vector<int> latents;      // latent variable indices, declaration order
  std::vector<int> observed;     // observed variable indices, declaration order
  std::vector<TabularFactor> generative;  // aligned with model->generative
  std::vector<TabularFactor> guides;      // aligned with model->guides
  long long joint_states = 1;

  std::vector<int> to_full(const Assignment& a) const;  // unassigned = -1
};

bool is_tabular(const GraphicalModel& model);

/// Compiles CPTs; throws std::invalid_argument on symbolic parameters,
/// continuous variables, or malformed tables.
TabularModel compile_tabular(const GraphicalModel& model);

// ---------------------------------------------------------------------------
// Exact inference and the numeric bound
// ---------------------------------------------------------------------------

/// log p(observation) by full enumeration over the latents. The -infinity
/// sentinel marks zero-mass observations and propagates absorbingly.
/// Enforces the 10^6 joint-state budget.
double exact_log_evidence(const GraphicalModel& model, const Assignment& observation);

struct Enumerate {};
struct MonteCarlo {
  int n = 1;  // N = 1 is the usual convention
  std::uint64_t seed = 0;
};
using ElboStrategy = std::variant<Enumerate, MonteCarlo>;

double numeric_elbo(const GraphicalModel& model, const QPrimeSelection& sel,
                    const Assignment& observation, const ElboStrategy& strategy);

struct McEstimate {
  double estimate = 0;
  double std_error = 0;
  int n = 0;
};

McEstimate numeric_elbo_mc(const GraphicalModel& model, const QPrimeSelection& sel,
                           const Assignment& observation, int n, std::uint64_t seed);

/// Exact conditional posteriors q(block | observed, earlier blocks), one per
/// latent generative factor, chained so their product is p(Z|X). Substituting
/// them for the guides makes the full-Q' bound tight.
std::vector<Factor> true_posterior_guides(const GraphicalModel& model);

/// All assignments of the observed variables with positive evidence,
/// enumeration order.
std::vector<Assignment> positive_observations(const GraphicalModel& model);

// ---------------------------------------------------------------------------
// The maximum-likelihood theorems at desk scale
// ---------------------------------------------------------------------------

/// Multiplicative-weights ascent of E_q log p over the simplex (10^4 steps,
/// log domain). The known optimum q is deliberately not used; tests compare
/// against it. Throws on an empty dataset.
std::vector<double> brute_force_mle(const DiscreteDataset& data);

struct SoundnessResult {
  bool sound = true;
  std::vector<int> violations;  // indices with mass > 1e-9 outside the valid set
};

SoundnessResult soundness_check(std::span<const double> dist, const ValidityPartition& part);

/// Moves all invalid mass onto the valid points by rescaling with 1/(1-C).
std::vector<double> soundness_repair(std::span<const double> dist,
                                     const ValidityPartition& part);

struct CompletenessResult {
  bool generalizes = false;
  bool complete = false;
  std::vector<double> optimum;  // class-constant optimum q(C(x))/|C(x)|
};

/// Theorem hypothesis (at most one dataset point per class, samples valid)
/// violations throw std::invalid_argument.
CompletenessResult completeness_check(const DiscreteDataset& data,
                                      const ValidityPartition& part,
                                      const EquivalencePartition& classes);

// ---------------------------------------------------------------------------
// Expectation estimators and the two-variable identities
// ---------------------------------------------------------------------------

double mc_expectation(const DistributionInstance& d, const std::function<double(const Value&)>& g,
                      int n, std::uint64_t seed);

struct Joint2 {
  int nx = 0, ny = 0;
  std::vector<double> p;  // row-major p(x, y)

  double pxy(int x, int y) const { return p[static_cast<size_t>(x) * ny + y]; }
};

/// max_{x,y} |P(x or y) - P(x) - P(y) + P(x,y)|.
double inclusion_exclusion_check(const Joint2& joint);

struct EntropyIdentityReport {
  double h_joint = 0;
  double h_x = 0;
  double h_y = 0;
  double h_x_given_y = 0;
  double chain_rule_gap = 0;     // |H(x,y) - H(y) - H(x|y)|
  double subadditivity_gap = 0;  // H(x)+H(y) - H(x,y), >= 0 up to rounding
  bool independent = false;
};

EntropyIdentityReport entropy_identities_check(const Joint2& joint);

// ---------------------------------------------------------------------------
// File ingestion (JSON lines keyed by variable name)
// ---------------------------------------------------------------------------

std::vector<Assignment> assignments_from_jsonl(std::istream& in, const GraphicalModel& model);

/// Sample space = every assignment of the observed variables, enumeration
/// order; counts tallied from the records.
DiscreteDataset dataset_from_assignments(const GraphicalModel& model,
                                         const std::vector<Assignment>& records);

std::string point_label(const GraphicalModel& model, const Assignment& a);

/// JSON array of points (objects keyed by variable name) -> the valid set.
ValidityPartition validity_from_json(const std::string& json_text, const GraphicalModel& model,
                                     const DiscreteDataset& data);

/// JSON array of arrays of points -> equivalence classes; unlisted points get
/// singleton classes.
EquivalencePartition classes_from_json(const std::string& json_text,
                                       const GraphicalModel& model, const DiscreteDataset& data);

}  // namespace elboforge
