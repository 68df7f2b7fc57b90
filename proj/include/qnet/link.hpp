#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "qnet/sign.hpp"

// Qualitative derivative matrices for one- and two-parent links in each
// formalism.
//
// Outcome indexing used throughout: 0 is the positive outcome x, 1 is the
// negation ~x, and for belief tables 2 is the whole frame x|~x. A single-parent
// matrix is 2x2 (child outcome x parent outcome). A two-parent matrix is 2x4
// with columns (b, ~b, c, ~c) for parents declared in the order (B, C).

namespace qnet {

enum class Formalism { probability, possibility, belief };

/// Short keyword used in network files and reports: prob, poss, bel.
std::string_view formalism_keyword(Formalism f);
std::optional<Formalism> parse_formalism(std::string_view keyword);

inline constexpr std::size_t kPos = 0;
inline constexpr std::size_t kNeg = 1;
inline constexpr std::size_t kFrame = 2;

/// p(c|a), p(c|~a); complements are 1 - value.
struct ProbCond1 {
  double given_pos = 0.0;
  double given_neg = 0.0;
};

/// p(d | b-outcome, c-outcome), indexed [b][c].
struct ProbCond2 {
  std::array<std::array<double, 2>, 2> p{};
};

/// Two independent single-parent probability tables p(d|b), p(d|c), combined
/// by noisy-or in quantitative evaluation.
struct ProbPairSeparate {
  ProbCond1 first;
  ProbCond1 second;
};

/// Pi(child-outcome | parent-outcome), indexed [child][parent].
struct PossCond1 {
  std::array<std::array<double, 2>, 2> pi{};
};

/// Pi(z | x, y), indexed [z][b][c].
struct PossCond2 {
  std::array<std::array<std::array<double, 2>, 2>, 2> pi{};
};

/// bel(child-outcome | parent subset), indexed [child][subset] where subset is
/// kPos, kNeg or kFrame.
struct BelCond1 {
  std::array<std::array<double, 3>, 2> bel{};
};

/// bel(z | B, C) over the nine subset pairs, indexed [z][b-subset][c-subset].
struct BelCond2Joint {
  std::array<std::array<std::array<double, 3>, 3>, 2> bel{};
};

/// Two conditional tables of the form bel(d | b) and bel(d | c).
struct BelCond2Separate {
  BelCond1 first;
  BelCond1 second;
};

using LinkTable = std::variant<ProbCond1, ProbCond2, ProbPairSeparate, PossCond1, PossCond2,
                               BelCond1, BelCond2Joint, BelCond2Separate>;

Formalism table_formalism(const LinkTable& table);
std::size_t table_arity(const LinkTable& table);

/// Current possibility distribution of a binary variable.
struct PossState {
  double pi_pos = 1.0;
  double pi_neg = 1.0;

  bool normalized() const { return pi_pos == 1.0 || pi_neg == 1.0; }
  double operator[](std::size_t i) const { return i == kPos ? pi_pos : pi_neg; }
};

QMatrix prob_link_derivative(const ProbCond1& cond);

/// Throws std::invalid_argument if the parent state is not normalized.
QMatrix poss_link_derivative(const PossCond1& cond, const PossState& parent);

QMatrix bel_link_derivative(const BelCond1& cond);

QMatrix prob_pair_derivative(const ProbCond2& cond);

QMatrix prob_independent_pair_derivative(const ProbCond1& cond_b, const ProbCond1& cond_c);

/// Throws std::invalid_argument if either parent state is not normalized.
QMatrix poss_pair_derivative(const PossCond2& cond, const PossState& state_b,
                             const PossState& state_c);

QMatrix bel_pair_joint_derivative(const BelCond2Joint& cond);

QMatrix bel_pair_separate_derivative(const BelCond2Separate& cond);

/// Short name of the rule a table is evaluated with, e.g. "possibility link".
std::string_view rule_name(const LinkTable& table);

/// The relation a derivative sign denotes: follows, varies inversely,
/// independent, may follow up, may follow down, indeterminate, ...
std::string relation_name(QSign derivative);

}  // namespace qnet
