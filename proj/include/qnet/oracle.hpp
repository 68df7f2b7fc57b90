#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qnet/network.hpp"

// Brute-force quantitative checking of qualitative predictions: sample numeric
// models consistent with a network, perturb the evidence variables, recompute
// every downstream value exactly and check that the observed direction of each
// change lies in the predicted sign set.

namespace qnet {

/// A fully numeric instance of a network. Every variable carries a prior in
/// its own formalism (sampled for roots left open, computed exactly for
/// non-roots) and a prior in every other formalism it feeds.
struct QuantModel {
  Network network;
};

/// Fills open root priors and cross-formalism states at random; deterministic
/// in `seed`. Possibility cross-formalism states default to (1, 1) as in the
/// qualitative network. Throws NetworkError for an invalid network.
QuantModel sample_model(const Network& net, std::uint64_t seed);

/// Value of a link's child given the parents' states in the child's
/// formalism, by the quantitative rule of that formalism (total probability,
/// sup-min, or mass-weighted sum). Separate-table belief pairs have no
/// quantitative rule and throw std::invalid_argument.
Certainty evaluate_link(const LinkTable& table, std::span<const Certainty> parents);

/// Exact marginal of a probability variable whose ancestors are all
/// probability variables. Throws NetworkError otherwise.
Certainty exact_probability(const QuantModel& model, const std::string& var);
/// Exact sup-min possibility; all ancestors must be possibility variables.
Certainty exact_possibility(const QuantModel& model, const std::string& var);
/// Exact belief by mass-weighted sums; all ancestors must be belief variables
/// and no separate-table pair may be on the way.
Certainty exact_belief(const QuantModel& model, const std::string& var);

struct PerturbationSpec {
  double epsilon = 1e-4;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double zero_tolerance = 1e-12;
  /// Models drawn per trial before the trial is given up as unusable.
  std::size_t max_attempts = 64;
};

enum class Verdict { pass, fail, skipped };

std::string_view verdict_name(Verdict v);

struct ContainmentRow {
  std::string variable;
  Formalism formalism = Formalism::probability;
  /// Union of the predictions over all trials (possibility predictions depend
  /// on the sampled state).
  Change predicted;
  /// Observed sign counts for x and ~x, indexed [outcome][+, 0, -].
  std::array<std::array<std::size_t, 3>, 2> observed{};
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// Some path from an evidence variable crosses a formalism bridge.
  bool bridged = false;
  Verdict verdict = Verdict::skipped;
};

struct ContainmentReport {
  std::vector<ContainmentRow> rows;
  std::size_t trials = 0;
  /// Trials that produced a usable model.
  std::size_t completed = 0;
  /// Models redrawn because a sign-rule comparison was within 1e-9 of a tie.
  std::size_t degenerate = 0;
  /// Models redrawn because the evidence direction was infeasible.
  std::size_t infeasible = 0;
  /// Checked observations contained in the prediction / all checked.
  double pass_rate = 1.0;

  bool passed() const;
};

/// Evidence variables must be roots. Throws NetworkError / EvidenceError for
/// an invalid network or evidence.
ContainmentReport check_containment(const Network& net, const Evidence& evidence,
                                    const PerturbationSpec& spec = {});

}  // namespace qnet
