#include "qnet/link.hpp"

#include <algorithm>
#include <stdexcept>

namespace qnet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::size_t other(std::size_t outcome) { return outcome == kPos ? kNeg : kPos; }

void require_normalized(const PossState& s, const char* what) {
  if (!s.normalized()) {
    throw std::invalid_argument(std::string(what) +
                                ": parent possibility state is not normalized (max must be 1)");
  }
}

// Case classification shared by the one- and two-parent possibility rules: `dominant` is whether the parent's branch strictly determines the
// child value, `unsaturated` whether the parent value is the binding term of
// that branch's min.
QSign poss_case(bool dominant, bool unsaturated) {
  if (dominant && unsaturated) return QSign::plus();
  if (unsaturated) return QSign::up();
  if (dominant) return QSign::down();
  return QSign::zero();
}

// Accessor for a two-parent possibility table with the focus parent first.
struct PossPairView {
  const PossCond2& cond;
  bool focus_is_second;

  double at(std::size_t z, std::size_t x, std::size_t y) const {
    return focus_is_second ? cond.pi[z][y][x] : cond.pi[z][x][y];
  }
};

QSign poss_pair_entry(const PossPairView& view, std::size_t z, std::size_t x,
                      const PossState& focus, const PossState& co) {
  auto joint = [&](std::size_t xo, std::size_t yo) {
    return std::min({view.at(z, xo, yo), focus[xo], co[yo]});
  };
  const double top = std::max({joint(kPos, kPos), joint(kPos, kNeg), joint(kNeg, kPos),
                               joint(kNeg, kNeg)});
  bool follows = false;
  bool up = false;
  bool down = false;
  // Some maximal joint term has focus[x] as its (possibly tied) minimum, so
  // lowering focus[x] can lower the child together with other changes.
  bool lowers_top = false;
  for (std::size_t y : {kPos, kNeg}) {
    const double here = joint(x, y);
    const double rest = std::max({joint(other(x), y), joint(x, other(y)),
                                  joint(other(x), other(y))});
    const double cap = std::min(view.at(z, x, y), co[y]);
    const bool dominant = here > rest;
    const bool unsaturated = focus[x] < cap;
    follows |= dominant && unsaturated;
    up |= !dominant && unsaturated;
    down |= dominant && !unsaturated;
    lowers_top |= here == top && focus[x] <= cap;
  }
  if (follows) return QSign::plus();
  // Strict dominance fails when maximal terms tie, although a decrease can
  // still reach the child; widen the decreasing side at such ties.
  if (up) return lowers_top ? QSign::plus_zero() : QSign::up();
  if (down || lowers_top) return QSign::down();
  return QSign::zero();
}

// Accessor for a two-parent probability table with the focus parent first.
struct ProbPairView {
  const ProbCond2& cond;
  bool focus_is_second;

  double at(std::size_t x, std::size_t y) const {
    return focus_is_second ? cond.p[y][x] : cond.p[x][y];
  }
};

// [synergy] (+) [direct] with the co-parent's positive outcome as y.
QSign prob_pair_entry(const ProbPairView& view, std::size_t x) {
  const std::size_t nx = other(x);
  const double synergy = (view.at(x, kPos) + view.at(nx, kNeg)) -
                         (view.at(x, kNeg) + view.at(nx, kPos));
  const double direct = view.at(x, kNeg) - view.at(nx, kNeg);
  return qadd(sign_of(synergy), sign_of(direct));
}

struct BelPairView {
  const BelCond2Joint& cond;
  bool focus_is_second;

  double at(std::size_t z, std::size_t x, std::size_t y) const {
    return focus_is_second ? cond.bel[z][y][x] : cond.bel[z][x][y];
  }
};

QSign bel_pair_entry(const BelPairView& view, std::size_t z, std::size_t x) {
  QSign acc = QSign::zero();
  for (std::size_t y : {kPos, kNeg, kFrame}) {
    acc = qadd(acc, sign_of(view.at(z, x, y) - view.at(z, kFrame, y)));
  }
  return acc;
}

}  // namespace

std::string_view formalism_keyword(Formalism f) {
  switch (f) {
    case Formalism::probability: return "prob";
    case Formalism::possibility: return "poss";
    case Formalism::belief: return "bel";
  }
  return "?";
}

std::optional<Formalism> parse_formalism(std::string_view keyword) {
  if (keyword == "prob") return Formalism::probability;
  if (keyword == "poss") return Formalism::possibility;
  if (keyword == "bel") return Formalism::belief;
  return std::nullopt;
}

Formalism table_formalism(const LinkTable& table) {
  return std::visit(
      overloaded{
          [](const ProbCond1&) { return Formalism::probability; },
          [](const ProbCond2&) { return Formalism::probability; },
          [](const ProbPairSeparate&) { return Formalism::probability; },
          [](const PossCond1&) { return Formalism::possibility; },
          [](const PossCond2&) { return Formalism::possibility; },
          [](const BelCond1&) { return Formalism::belief; },
          [](const BelCond2Joint&) { return Formalism::belief; },
          [](const BelCond2Separate&) { return Formalism::belief; },
      },
      table);
}

std::size_t table_arity(const LinkTable& table) {
  return std::holds_alternative<ProbCond1>(table) || std::holds_alternative<PossCond1>(table) ||
                 std::holds_alternative<BelCond1>(table)
             ? 1
             : 2;
}

QMatrix prob_link_derivative(const ProbCond1& cond) {
  QMatrix m(2, 2);
  const QSign follows = sign_of(cond.given_pos - cond.given_neg);
  m.at(kPos, kPos) = follows;
  m.at(kPos, kNeg) = follows.negated();
  m.at(kNeg, kPos) = follows.negated();
  m.at(kNeg, kNeg) = follows;
  return m;
}

QMatrix poss_link_derivative(const PossCond1& cond, const PossState& parent) {
  require_normalized(parent, "poss_link_derivative");
  QMatrix m(2, 2);
  for (std::size_t x : {kPos, kNeg}) {
    for (std::size_t y : {kPos, kNeg}) {
      const std::size_t ny = other(y);
      const bool dominant =
          std::min(cond.pi[x][y], parent[y]) > std::min(cond.pi[x][ny], parent[ny]);
      const bool unsaturated = parent[y] < cond.pi[x][y];
      m.at(x, y) = poss_case(dominant, unsaturated);
    }
  }
  return m;
}

QMatrix bel_link_derivative(const BelCond1& cond) {
  QMatrix m(2, 2);
  for (std::size_t x : {kPos, kNeg}) {
    for (std::size_t y : {kPos, kNeg}) {
      m.at(x, y) = sign_of(cond.bel[x][y] - cond.bel[x][kFrame]);
    }
  }
  return m;
}

QMatrix prob_pair_derivative(const ProbCond2& cond) {
  QMatrix m(2, 4);
  for (bool second : {false, true}) {
    const ProbPairView view{cond, second};
    for (std::size_t x : {kPos, kNeg}) {
      const std::size_t col = (second ? 2 : 0) + x;
      const QSign d = prob_pair_entry(view, x);
      m.at(kPos, col) = d;
      m.at(kNeg, col) = d.negated();
    }
  }
  return m;
}

QMatrix prob_independent_pair_derivative(const ProbCond1& cond_b, const ProbCond1& cond_c) {
  const QMatrix mb = prob_link_derivative(cond_b);
  const QMatrix mc = prob_link_derivative(cond_c);
  QMatrix m(2, 4);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      m.at(r, c) = mb.at(r, c);
      m.at(r, c + 2) = mc.at(r, c);
    }
  }
  return m;
}

QMatrix poss_pair_derivative(const PossCond2& cond, const PossState& state_b,
                             const PossState& state_c) {
  require_normalized(state_b, "poss_pair_derivative");
  require_normalized(state_c, "poss_pair_derivative");
  QMatrix m(2, 4);
  for (bool second : {false, true}) {
    const PossPairView view{cond, second};
    const PossState& focus = second ? state_c : state_b;
    const PossState& co = second ? state_b : state_c;
    for (std::size_t z : {kPos, kNeg}) {
      for (std::size_t x : {kPos, kNeg}) {
        m.at(z, (second ? 2 : 0) + x) = poss_pair_entry(view, z, x, focus, co);
      }
    }
  }
  return m;
}

QMatrix bel_pair_joint_derivative(const BelCond2Joint& cond) {
  QMatrix m(2, 4);
  for (bool second : {false, true}) {
    const BelPairView view{cond, second};
    for (std::size_t z : {kPos, kNeg}) {
      for (std::size_t x : {kPos, kNeg}) {
        m.at(z, (second ? 2 : 0) + x) = bel_pair_entry(view, z, x);
      }
    }
  }
  return m;
}

QMatrix bel_pair_separate_derivative(const BelCond2Separate& cond) {
  QMatrix m(2, 4);
  for (bool second : {false, true}) {
    const BelCond1& t = second ? cond.second : cond.first;
    for (std::size_t z : {kPos, kNeg}) {
      for (std::size_t x : {kPos, kNeg}) {
        m.at(z, (second ? 2 : 0) + x) =
            t.bel[z][x] >= t.bel[z][kFrame] ? QSign::plus() : QSign::unknown();
      }
    }
  }
  return m;
}

std::string_view rule_name(const LinkTable& table) {
  return std::visit(
      overloaded{
          [](const ProbCond1&) { return "probability link"; },
          [](const ProbCond2&) { return "probability pair (joint)"; },
          [](const ProbPairSeparate&) { return "probability pair (separate)"; },
          [](const PossCond1&) { return "possibility link"; },
          [](const PossCond2&) { return "possibility pair (joint)"; },
          [](const BelCond1&) { return "belief link"; },
          [](const BelCond2Joint&) { return "belief pair (joint)"; },
          [](const BelCond2Separate&) { return "belief pair (separate)"; },
      },
      table);
}

std::string relation_name(QSign d) {
  if (d == QSign::up()) return "may follow up";
  if (d == QSign::down()) return "may follow down";
  if (d == QSign::plus()) return "follows";
  if (d == QSign::minus()) return "varies inversely";
  if (d == QSign::zero()) return "independent";
  if (d == QSign::unknown()) return "indeterminate";
  if (d == QSign::plus_zero()) return "follows or independent";
  if (d == QSign::minus_zero()) return "varies inversely or independent";
  return "follows or varies inversely";
}

}  // namespace qnet
