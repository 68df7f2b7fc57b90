#include <doctest.h>

#include <stdexcept>

#include "qnet/link.hpp"
#include "support/reference.hpp"

using namespace qnet;
using ref::Pair;

namespace {

QSign S(const char* text) { return *QSign::parse(text); }

constexpr double kEps = 1e-4;

// Does an observed change of the parent outcome (dir) and child outcome
// (delta) agree with derivative entry d?
bool admits(QSign d, int dir, double delta) {
  const QSign change = dir > 0 ? QSign::plus() : QSign::minus();
  return sign_of(delta, 1e-12).subset_of(qmul(change, d));
}

PossState state(Pair p) { return {p.pos, p.neg}; }

// Moves one outcome of a possibility state, keeping it normalized.
Pair poss_move(Pair s, std::size_t outcome, int dir) {
  double v[2] = {s.pos, s.neg};
  if (dir > 0) {
    v[outcome] = std::min(1.0, v[outcome] + kEps);
  } else {
    if (v[outcome] == 1.0) v[1 - outcome] = 1.0;
    v[outcome] = std::max(0.0, v[outcome] - kEps);
  }
  return {v[0], v[1]};
}

bool can_move(Pair s, std::size_t outcome, int dir) {
  const double v = outcome == kPos ? s.pos : s.neg;
  return dir > 0 ? v < 1.0 : v > 0.0;
}

QMatrix swap_parents(const QMatrix& m) {
  QMatrix out(2, 4);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) out.at(r, (c + 2) % 4) = m.at(r, c);
  return out;
}

// The four printed cases for a two-parent possibility entry, evaluated
// literally.
QSign printed_poss_pair_case(const PossCond2& t, Pair sb, Pair sc, std::size_t z, std::size_t x) {
  const double b[2] = {sb.pos, sb.neg};
  const double c[2] = {sc.pos, sc.neg};
  auto J = [&](std::size_t xo, std::size_t yo) { return std::min({t.pi[z][xo][yo], b[xo], c[yo]}); };
  bool follows = false, up = false, down = false;
  for (std::size_t y : {kPos, kNeg}) {
    const double here = J(x, y);
    const double rest = std::max({J(1 - x, y), J(x, 1 - y), J(1 - x, 1 - y)});
    const bool slack = b[x] < std::min(t.pi[z][x][y], c[y]);
    follows |= here > rest && slack;
    up |= here <= rest && slack;
    down |= here > rest && !slack;
  }
  if (follows) return S("+");
  if (up) return QSign::up();
  if (down) return QSign::down();
  return S("0");
}

}  // namespace

TEST_CASE("probability link") {
  const QMatrix kt = prob_link_derivative({0.6, 0.2});
  CHECK(kt.at(kPos, kPos) == S("+"));
  const QMatrix vs = prob_link_derivative({0.1, 0.3});
  CHECK(vs.at(kPos, kPos) == S("-"));
  CHECK(vs.at(kPos, kNeg) == S("+"));
  CHECK(vs.at(kNeg, kPos) == S("+"));
  CHECK(vs.at(kNeg, kNeg) == S("-"));
  CHECK(prob_link_derivative({0.5, 0.5}) == QMatrix(2, 2, S("0")));
}

TEST_CASE("probability link is antisymmetric and matches finite differences") {
  ref::Rng r(21);
  for (int i = 0; i < 500; ++i) {
    const ProbCond1 t = ref::random_prob1(r);
    const QMatrix m = prob_link_derivative(t);
    CHECK(m.at(kPos, kNeg) == m.at(kPos, kPos).negated());
    CHECK(m.at(kNeg, kPos) == m.at(kPos, kPos).negated());
    CHECK(m.at(kNeg, kNeg) == m.at(kPos, kPos));
    const double p = r.uniform(0.01, 0.99);
    for (int dir : {+1, -1}) {
      const Pair a = ref::prob_child(t, p);
      const Pair b = ref::prob_child(t, p + dir * kEps);
      CHECK(admits(m.at(kPos, kPos), dir, b.pos - a.pos));
      CHECK(admits(m.at(kNeg, kPos), dir, b.neg - a.neg));
      // p(~a) moves the other way.
      CHECK(admits(m.at(kPos, kNeg), -dir, b.pos - a.pos));
    }
  }
}

TEST_CASE("possibility link") {
  PossCond1 lv;
  lv.pi[kPos] = {1.0, 1.0};
  lv.pi[kNeg] = {0.1, 0.1};
  CHECK(poss_link_derivative(lv, {1.0, 1.0}) == QMatrix(2, 2, S("0")));

  PossCond1 t;
  t.pi[kPos] = {0.8, 0.3};
  t.pi[kNeg] = {1.0, 1.0};
  CHECK(poss_link_derivative(t, {0.5, 1.0}).at(kPos, kPos) == S("+"));
  CHECK(poss_link_derivative(t, {1.0, 0.2}).at(kPos, kPos) == QSign::down());
  CHECK_THROWS_AS(poss_link_derivative(t, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("possibility link examples agree with sup-min finite differences") {
  PossCond1 t;
  t.pi[kPos] = {0.8, 0.3};
  t.pi[kNeg] = {1.0, 1.0};
  // [+] at (0.5, 1): both directions pass.
  {
    const Pair s{0.5, 1.0};
    const double base = ref::poss_child(t, s).pos;
    CHECK(ref::poss_child(t, poss_move(s, kPos, +1)).pos > base);
    CHECK(ref::poss_child(t, poss_move(s, kPos, -1)).pos < base);
  }
  // [v] at (1, 0.2): an increase is impossible; a small decrease is absorbed,
  // a decrease below 0.8 passes.
  {
    const Pair s{1.0, 0.2};
    const double base = ref::poss_child(t, s).pos;
    CHECK(ref::poss_child(t, poss_move(s, kPos, -1)).pos == base);
    CHECK(ref::poss_child(t, {0.7, 1.0}).pos < base);
  }
}

TEST_CASE("possibility link is sound under small moves") {
  ref::Rng r(22);
  std::size_t markers = 0;
  for (int i = 0; i < 3000; ++i) {
    const PossCond1 t = ref::random_poss1(r);
    const Pair s = ref::random_poss_state(r);
    const QMatrix m = poss_link_derivative(t, state(s));
    const Pair base = ref::poss_child(t, s);
    for (std::size_t y : {kPos, kNeg}) {
      for (int dir : {+1, -1}) {
        if (!can_move(s, y, dir)) continue;
        const Pair moved = ref::poss_child(t, poss_move(s, y, dir));
        // The moved outcome plus, for a jump, the other outcome rising to 1.
        const bool jump = dir < 0 && (y == kPos ? s.pos : s.neg) == 1.0 &&
                          (y == kPos ? s.neg : s.pos) < 1.0;
        for (std::size_t x : {kPos, kNeg}) {
          const double delta = x == kPos ? moved.pos - base.pos : moved.neg - base.neg;
          QSign predicted = qmul(dir > 0 ? S("+") : S("-"), m.at(x, y));
          if (jump) predicted = qadd(predicted, qmul(S("+"), m.at(x, 1 - y)));
          markers += m.at(x, y).is_marker();
          CHECK(sign_of(delta, 1e-12).subset_of(predicted));
        }
      }
    }
  }
  CHECK(markers > 0);
}

TEST_CASE("belief link") {
  BelCond1 t;
  t.bel[kPos] = {0.9, 0.0, 0.3};
  CHECK(bel_link_derivative(t).at(kPos, kPos) == S("+"));
  t.bel[kPos] = {0.3, 0.0, 0.3};
  CHECK(bel_link_derivative(t).at(kPos, kPos) == S("0"));
  t.bel[kPos] = {0.2, 0.0, 0.5};
  CHECK(bel_link_derivative(t).at(kPos, kPos) == S("-"));
}

TEST_CASE("belief link matches mass-sum finite differences") {
  ref::Rng r(23);
  for (int i = 0; i < 1000; ++i) {
    const BelCond1 t = ref::random_bel1(r);
    const Pair s = ref::random_bel_state(r);
    const QMatrix m = bel_link_derivative(t);
    const Pair base = ref::bel_child(t, s);
    // Moving bel(a) alone shifts mass between {a} and the frame.
    for (int dir : {+1, -1}) {
      const Pair moved{s.pos + dir * kEps, s.neg};
      if (moved.pos < 0 || moved.pos + moved.neg > 1) continue;
      const Pair after = ref::bel_child(t, moved);
      CHECK(admits(m.at(kPos, kPos), dir, after.pos - base.pos));
      CHECK(admits(m.at(kNeg, kPos), dir, after.neg - base.neg));
    }
  }
}

TEST_CASE("probability pair") {
  ProbCond2 arthritis;
  arthritis.p = {{{0.9, 0.6}, {0.6, 0.4}}};  // [d][s]
  const QMatrix m = prob_pair_derivative(arthritis);
  CHECK(m.at(kPos, 2) == S("+"));
  CHECK(m.at(kPos, 3) == S("-"));
  CHECK(m.at(kPos, 0) == S("+"));
  CHECK(m.at(kNeg, 2) == S("-"));

  ProbCond2 flat;
  flat.p = {{{0.3, 0.3}, {0.3, 0.3}}};
  CHECK(prob_pair_derivative(flat) == QMatrix(2, 4, S("0")));
}

TEST_CASE("probability pair contains finite differences for either parent") {
  ref::Rng r(24);
  for (int i = 0; i < 1000; ++i) {
    const ProbCond2 t = ref::random_prob2(r);
    const QMatrix m = prob_pair_derivative(t);
    const double pb = r.uniform(0.01, 0.99), pc = r.uniform(0.01, 0.99);
    const Pair base = ref::prob_child(t, pb, pc);
    for (int dir : {+1, -1}) {
      const Pair mb = ref::prob_child(t, pb + dir * kEps, pc);
      const Pair mc = ref::prob_child(t, pb, pc + dir * kEps);
      CHECK(admits(m.at(kPos, 0), dir, mb.pos - base.pos));
      CHECK(admits(m.at(kNeg, 0), dir, mb.neg - base.neg));
      CHECK(admits(m.at(kPos, 1), -dir, mb.pos - base.pos));
      CHECK(admits(m.at(kPos, 2), dir, mc.pos - base.pos));
      CHECK(admits(m.at(kPos, 3), -dir, mc.pos - base.pos));
    }
  }
}

TEST_CASE("independent probability pair") {
  const QMatrix m = prob_independent_pair_derivative({0.7, 0.2}, {0.8, 0.1});
  CHECK(m.at(kPos, 0) == S("+"));
  CHECK(m.at(kPos, 2) == S("+"));
  const QMatrix flat_b = prob_independent_pair_derivative({0.4, 0.4}, {0.8, 0.1});
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(flat_b.at(r, 0) == S("0"));
    CHECK(flat_b.at(r, 1) == S("0"));
  }
}

TEST_CASE("possibility pair") {
  PossCond2 ones;
  for (auto& a : ones.pi)
    for (auto& b : a) b = {1.0, 1.0};
  // Every joint term ties at 1, so a decrease is only ever allowed, never
  // forced, and an increase is impossible.
  const QMatrix flat = poss_pair_derivative(ones, {1, 1}, {1, 1});
  for (std::size_t z : {kPos, kNeg})
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK((flat.at(z, c) == S("0") || flat.at(z, c) == QSign::down()));
      CHECK(printed_poss_pair_case(ones, {1, 1}, {1, 1}, z, c % 2) == S("0"));
    }

  PossCond2 t;
  for (auto& b : t.pi[kPos]) b = {0.1, 0.1};
  for (auto& b : t.pi[kNeg]) b = {1.0, 1.0};
  t.pi[kPos][kPos][kPos] = 0.9;
  CHECK(poss_pair_derivative(t, {0.4, 1.0}, {1.0, 0.5}).at(kPos, 0) == S("+"));
  CHECK(poss_pair_derivative(t, {1.0, 0.3}, {1.0, 0.5}).at(kPos, 0) == QSign::down());
  CHECK_THROWS_AS(poss_pair_derivative(t, {0.4, 0.4}, {1, 1}), std::invalid_argument);
}

TEST_CASE("possibility pair equals the printed cases when nothing ties") {
  ref::Rng r(25);
  std::size_t compared = 0;
  for (int i = 0; i < 5000; ++i) {
    PossCond2 t;
    for (auto& a : t.pi)
      for (auto& b : a) b = {r.uniform(), r.uniform()};
    const Pair sb = r.coin() ? Pair{1.0, r.uniform()} : Pair{r.uniform(), 1.0};
    const Pair sc = r.coin() ? Pair{1.0, r.uniform()} : Pair{r.uniform(), 1.0};
    std::vector<double> values{sb.pos, sb.neg, sc.pos, sc.neg};
    for (auto& a : t.pi)
      for (auto& b : a) values.insert(values.end(), b.begin(), b.end());
    // Exact ties only arise through the two 1s.
    bool ties = false;
    std::sort(values.begin(), values.end());
    for (std::size_t k = 1; k < values.size(); ++k) ties |= values[k] == values[k - 1] && values[k] != 1.0;
    if (ties) continue;
    const QMatrix m = poss_pair_derivative(t, state(sb), state(sc));
    for (std::size_t z : {kPos, kNeg})
      for (std::size_t x : {kPos, kNeg}) {
        // Skip entries where a 1 in both states ties two joint terms.
        const double b[2] = {sb.pos, sb.neg}, c[2] = {sc.pos, sc.neg};
        std::vector<double> joints;
        for (std::size_t xo : {kPos, kNeg})
          for (std::size_t yo : {kPos, kNeg}) joints.push_back(std::min({t.pi[z][xo][yo], b[xo], c[yo]}));
        std::sort(joints.begin(), joints.end());
        if (std::adjacent_find(joints.begin(), joints.end()) != joints.end()) continue;
        ++compared;
        CHECK(m.at(z, x) == printed_poss_pair_case(t, sb, sc, z, x));
      }
  }
  CHECK(compared > 1000);
}

TEST_CASE("possibility pair widens the decreasing side at tied maxima") {
  // Both maximal joint terms contain c, so lowering Pi(c) lowers Pi(~z).
  PossCond2 t;
  t.pi[kPos] = {{{0.949, 1.0}, {0.472, 1.0}}};
  t.pi[kNeg] = {{{1.0, 0.021}, {1.0, 0.455}}};
  const QMatrix m = poss_pair_derivative(t, {1, 1}, {1, 1});
  const Pair before = ref::poss_child(t, {1, 1}, {1, 1});
  const Pair after = ref::poss_child(t, {1, 1}, {1.0 - kEps, 1.0});
  REQUIRE(after.neg < before.neg);
  CHECK(printed_poss_pair_case(t, {1, 1}, {1, 1}, kNeg, 2 - 2) == S("0"));
  CHECK(m.at(kNeg, 2) == QSign::down());
  CHECK(admits(m.at(kNeg, 2), -1, after.neg - before.neg));
}

TEST_CASE("possibility pair is sound under small moves of one parent") {
  ref::Rng r(26);
  for (int i = 0; i < 3000; ++i) {
    const PossCond2 t = ref::random_poss2(r);
    const Pair sb = ref::random_poss_state(r), sc = ref::random_poss_state(r);
    const QMatrix m = poss_pair_derivative(t, state(sb), state(sc));
    const Pair base = ref::poss_child(t, sb, sc);
    for (std::size_t parent : {0u, 1u}) {
      const Pair s = parent == 0 ? sb : sc;
      for (std::size_t y : {kPos, kNeg})
        for (int dir : {+1, -1}) {
          if (!can_move(s, y, dir)) continue;
          const Pair ms = poss_move(s, y, dir);
          const Pair moved = parent == 0 ? ref::poss_child(t, ms, sc) : ref::poss_child(t, sb, ms);
          const bool jump = dir < 0 && (y == kPos ? s.pos : s.neg) == 1.0 &&
                            (y == kPos ? s.neg : s.pos) < 1.0;
          const std::size_t col = 2 * parent + y;
          for (std::size_t z : {kPos, kNeg}) {
            QSign predicted = qmul(dir > 0 ? S("+") : S("-"), m.at(z, col));
            if (jump) predicted = qadd(predicted, qmul(S("+"), m.at(z, 2 * parent + 1 - y)));
            const double delta = z == kPos ? moved.pos - base.pos : moved.neg - base.neg;
            CHECK(sign_of(delta, 1e-12).subset_of(predicted));
          }
        }
    }
  }
}

TEST_CASE("belief pair, joint table") {
  BelCond2Joint pain;  // unlisted entries stay 0
  pain.bel[kPos][kPos][kPos] = 0.9;
  pain.bel[kPos][kPos][kNeg] = 0.7;
  pain.bel[kPos][kNeg][kPos] = 0.7;
  pain.bel[kPos][kFrame][kPos] = 0.6;
  pain.bel[kPos][kPos][kFrame] = 0.7;
  pain.bel[kNeg][kNeg][kNeg] = 0.5;
  pain.bel[kNeg][kNeg][kFrame] = 0.4;
  const QMatrix m = bel_pair_joint_derivative(pain);
  CHECK(m.at(kPos, 2) == S("+"));
  CHECK(m.at(kPos, 3) == S("0"));
  CHECK(m.at(kNeg, 2) == S("-"));
  CHECK(m.at(kNeg, 3) == S("+"));
  CHECK(bel_pair_joint_derivative(BelCond2Joint{}) == QMatrix(2, 4, S("0")));
}

TEST_CASE("belief pair, joint table, matches mass-product finite differences") {
  ref::Rng r(27);
  for (int i = 0; i < 1000; ++i) {
    const BelCond2Joint t = ref::random_bel2(r);
    const Pair sb = ref::random_bel_state(r), sc = ref::random_bel_state(r);
    const QMatrix m = bel_pair_joint_derivative(t);
    const Pair base = ref::bel_child(t, sb, sc);
    for (int dir : {+1, -1}) {
      const Pair mb{sb.pos + dir * kEps, sb.neg};
      if (mb.pos < 0 || mb.pos + mb.neg > 1) continue;
      const Pair after = ref::bel_child(t, mb, sc);
      CHECK(admits(m.at(kPos, 0), dir, after.pos - base.pos));
      CHECK(admits(m.at(kNeg, 0), dir, after.neg - base.neg));
    }
  }
}

TEST_CASE("belief pair, separate tables") {
  BelCond2Separate t;
  t.first.bel[kPos][kPos] = 0.7;
  t.first.bel[kPos][kFrame] = 0.2;
  t.second.bel[kPos][kPos] = 0.1;
  t.second.bel[kPos][kFrame] = 0.2;
  t.second.bel[kNeg][kNeg] = 0.3;
  t.second.bel[kNeg][kFrame] = 0.3;
  const QMatrix m = bel_pair_separate_derivative(t);
  CHECK(m.at(kPos, 0) == S("+"));
  CHECK(m.at(kPos, 2) == S("?"));
  CHECK(m.at(kNeg, 3) == S("+"));
}

TEST_CASE("swapping parents permutes columns only") {
  ref::Rng r(28);
  for (int i = 0; i < 300; ++i) {
    const ProbCond2 p = ref::random_prob2(r);
    ProbCond2 ps;
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) ps.p[c][b] = p.p[b][c];
    CHECK(prob_pair_derivative(ps) == swap_parents(prob_pair_derivative(p)));

    const PossCond2 q = ref::random_poss2(r);
    PossCond2 qs;
    for (int z = 0; z < 2; ++z)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) qs.pi[z][c][b] = q.pi[z][b][c];
    const Pair sb = ref::random_poss_state(r), sc = ref::random_poss_state(r);
    CHECK(poss_pair_derivative(qs, state(sc), state(sb)) ==
          swap_parents(poss_pair_derivative(q, state(sb), state(sc))));

    const BelCond2Joint j = ref::random_bel2(r);
    BelCond2Joint js;
    for (int z = 0; z < 2; ++z)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) js.bel[z][c][b] = j.bel[z][b][c];
    CHECK(bel_pair_joint_derivative(js) == swap_parents(bel_pair_joint_derivative(j)));
  }
}

TEST_CASE("rule and relation names") {
  CHECK(rule_name(LinkTable{ProbCond1{}}) == "probability link");
  CHECK(table_arity(LinkTable{PossCond2{}}) == 2);
  CHECK(table_formalism(LinkTable{BelCond2Separate{}}) == Formalism::belief);
  CHECK(relation_name(S("+")) == "follows");
  CHECK(relation_name(S("-")) == "varies inversely");
  CHECK(relation_name(S("0")) == "independent");
  CHECK(relation_name(QSign::up()) == "may follow up");
  CHECK(relation_name(QSign::down()) == "may follow down");
  CHECK(parse_formalism("poss") == Formalism::possibility);
  CHECK_FALSE(parse_formalism("fuzzy").has_value());
}
