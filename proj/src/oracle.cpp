#include "qnet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <set>

namespace qnet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTieWidth = 1e-9;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ b);
}

std::array<double, 3> masses(const Certainty& bel) {
  return {bel.pos, bel.neg, 1.0 - bel.pos - bel.neg};
}

Certainty sample_certainty(Formalism f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (f) {
    case Formalism::probability: {
      const double p = unit(rng);
      return {p, 1.0 - p};
    }
    case Formalism::possibility: {
      const double u = unit(rng);
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: return {1.0, u};
        case 1: return {u, 1.0};
        default: return {1.0, 1.0};
      }
    }
    case Formalism::belief: {
      std::exponential_distribution<double> e(1.0);
      const double a = e(rng), b = e(rng), c = e(rng);
      const double s = a + b + c;
      return {a / s, b / s};
    }
  }
  return {};
}

Certainty state_in(const Network& net, const std::string& name, Formalism f) {
  const Variable& v = net.at(name);
  if (v.formalism == f) {
    if (!v.prior) throw NetworkError("variable '" + name + "' has no numeric state");
    return *v.prior;
  }
  auto it = v.bridge_priors.find(f);
  if (it != v.bridge_priors.end()) return it->second;
  if (f == Formalism::possibility) return {1.0, 1.0};
  throw NetworkError("variable '" + name + "' has no " + std::string(formalism_keyword(f)) +
                     " state");
}

void require_valid(const Network& net) {
  const auto report = validate(net);
  if (report.ok()) return;
  std::string msg = "invalid network:";
  for (const auto& e : report.errors) msg += "\n  " + e;
  throw NetworkError(msg);
}

// Every comparison a derivative rule makes for `link` at the model's state, as
// (lhs, rhs) pairs.
std::vector<std::pair<double, double>> rule_comparisons(const Network& model, const Link& link) {
  std::vector<std::pair<double, double>> out;
  auto pstate = [&](std::size_t i) {
    return state_in(model, link.parents[i], Formalism::possibility);
  };
  std::visit(
      overloaded{
          [&](const ProbCond1& t) { out.emplace_back(t.given_pos, t.given_neg); },
          [&](const ProbCond2& t) {
            for (bool second : {false, true}) {
              auto at = [&](std::size_t x, std::size_t y) {
                return second ? t.p[y][x] : t.p[x][y];
              };
              out.emplace_back(at(0, 0) + at(1, 1), at(0, 1) + at(1, 0));
              out.emplace_back(at(0, 1), at(1, 1));
            }
          },
          [&](const ProbPairSeparate& t) {
            out.emplace_back(t.first.given_pos, t.first.given_neg);
            out.emplace_back(t.second.given_pos, t.second.given_neg);
          },
          [&](const PossCond1& t) {
            const Certainty a = pstate(0);
            for (std::size_t x : {0, 1}) {
              for (std::size_t y : {0, 1}) {
                out.emplace_back(std::min(t.pi[x][y], a[y]), std::min(t.pi[x][1 - y], a[1 - y]));
                out.emplace_back(a[y], t.pi[x][y]);
              }
            }
          },
          [&](const PossCond2& t) {
            const Certainty s[2] = {pstate(0), pstate(1)};
            for (bool second : {false, true}) {
              const Certainty& f = s[second ? 1 : 0];
              const Certainty& c = s[second ? 0 : 1];
              for (std::size_t z : {0, 1}) {
                auto cond = [&](std::size_t x, std::size_t y) {
                  return second ? t.pi[z][y][x] : t.pi[z][x][y];
                };
                auto joint = [&](std::size_t x, std::size_t y) {
                  return std::min({cond(x, y), f[x], c[y]});
                };
                for (std::size_t x : {0, 1}) {
                  for (std::size_t y : {0, 1}) {
                    out.emplace_back(joint(x, y), std::max({joint(1 - x, y), joint(x, 1 - y),
                                                            joint(1 - x, 1 - y)}));
                    out.emplace_back(f[x], std::min(cond(x, y), c[y]));
                  }
                }
              }
            }
          },
          [&](const BelCond1& t) {
            for (std::size_t x : {0, 1})
              for (std::size_t y : {0, 1}) out.emplace_back(t.bel[x][y], t.bel[x][2]);
          },
          [&](const BelCond2Joint& t) {
            for (std::size_t z : {0, 1}) {
              for (std::size_t x : {0, 1}) {
                for (std::size_t y = 0; y < 3; ++y) {
                  out.emplace_back(t.bel[z][x][y], t.bel[z][2][y]);
                  out.emplace_back(t.bel[z][y][x], t.bel[z][y][2]);
                }
              }
            }
          },
          [&](const BelCond2Separate&) {},
      },
      link.table);
  return out;
}

bool degenerate(const Network& model) {
  for (const auto& l : model.links()) {
    for (const auto& [lhs, rhs] : rule_comparisons(model, l)) {
      const double d = std::abs(lhs - rhs);
      if (d > 0.0 && d < kTieWidth) return true;
    }
  }
  return false;
}

double step(double v, int dir, double eps, bool& ok) {
  if (dir > 0) {
    if (v >= 1.0) ok = false;
    return std::min(1.0, v + eps);
  }
  if (dir < 0) {
    if (v <= 0.0) ok = false;
    return std::max(0.0, v - eps);
  }
  return v;
}

// Moves a state by eps in the given directions, respecting the coupling of
// the formalism. A possibility decrease that would break normalization is
// balanced by raising the other outcome (which must be rising) to 1.
std::optional<Certainty> perturb(Formalism f, const Certainty& c, int dx, int dnx, double eps) {
  bool ok = true;
  switch (f) {
    case Formalism::probability: {
      if (dnx != -dx) return std::nullopt;
      const double p = step(c.pos, dx, eps, ok);
      if (!ok) return std::nullopt;
      return dx == 0 ? c : Certainty{p, 1.0 - p};
    }
    case Formalism::possibility: {
      double x = step(c.pos, dx, eps, ok);
      double nx = step(c.neg, dnx, eps, ok);
      if (!ok) return std::nullopt;
      if (std::max(x, nx) < 1.0) {
        if (dnx > 0) {
          nx = 1.0;
        } else if (dx > 0) {
          x = 1.0;
        } else {
          return std::nullopt;
        }
      }
      return Certainty{x, nx};
    }
    case Formalism::belief: {
      const double x = step(c.pos, dx, eps, ok);
      const double nx = step(c.neg, dnx, eps, ok);
      if (!ok || x + nx > 1.0) return std::nullopt;
      return Certainty{x, nx};
    }
  }
  return std::nullopt;
}

std::vector<int> directions(QSign s) {
  std::vector<int> out;
  if (s.contains(QSign::kPlus)) out.push_back(1);
  if (s.contains(QSign::kZero)) out.push_back(0);
  if (s.contains(QSign::kMinus)) out.push_back(-1);
  return out;
}

// A random feasible perturbation whose directions are drawn from `allowed`.
std::optional<Certainty> random_perturbation(Formalism f, const Certainty& c, const Change& allowed,
                                             double eps, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> combos;
  for (int dx : directions(allowed.pos))
    for (int dnx : directions(allowed.neg)) combos.emplace_back(dx, dnx);
  std::shuffle(combos.begin(), combos.end(), rng);
  for (auto [dx, dnx] : combos) {
    if (auto out = perturb(f, c, dx, dnx, eps)) return out;
  }
  return std::nullopt;
}

std::size_t sign_slot(QSign s) {
  if (s == QSign::plus()) return 0;
  if (s == QSign::zero()) return 1;
  return 2;
}

Certainty exact_in(const QuantModel& model, const std::string& var, Formalism f) {
  const Network& net = model.network;
  if (net.at(var).formalism != f) {
    throw NetworkError("'" + var + "' is not a " + std::string(formalism_keyword(f)) +
                       " variable");
  }
  std::function<Certainty(const std::string&)> value = [&](const std::string& name) {
    const Variable& v = net.at(name);
    if (v.formalism != f) {
      throw NetworkError("ancestor '" + name + "' of '" + var + "' is quantified in " +
                         std::string(formalism_keyword(v.formalism)) +
                         "; exact evaluation covers single-formalism segments only");
    }
    const Link* l = net.link_into(name);
    if (!l) {
      if (!v.prior) throw NetworkError("root '" + name + "' has no prior");
      return *v.prior;
    }
    std::vector<Certainty> parents;
    for (const auto& p : l->parents) parents.push_back(value(p));
    try {
      return evaluate_link(l->table, parents);
    } catch (const std::invalid_argument& e) {
      throw NetworkError(e.what());
    }
  };
  return value(var);
}

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::skipped: return "SKIP";
  }
  return "?";
}

bool ContainmentReport::passed() const {
  return std::none_of(rows.begin(), rows.end(),
                      [](const ContainmentRow& r) { return r.verdict == Verdict::fail; }) &&
         completed == trials;
}

Certainty evaluate_link(const LinkTable& table, std::span<const Certainty> parents) {
  if (parents.size() != table_arity(table)) {
    throw std::invalid_argument("evaluate_link: wrong number of parent states");
  }
  return std::visit(
      overloaded{
          [&](const ProbCond1& t) {
            const Certainty& a = parents[0];
            return Certainty{a.pos * t.given_pos + a.neg * t.given_neg,
                             a.pos * (1.0 - t.given_pos) + a.neg * (1.0 - t.given_neg)};
          },
          [&](const ProbCond2& t) {
            double d = 0.0, nd = 0.0;
            for (std::size_t b : {0, 1}) {
              for (std::size_t c : {0, 1}) {
                const double w = parents[0][b] * parents[1][c];
                d += w * t.p[b][c];
                nd += w * (1.0 - t.p[b][c]);
              }
            }
            return Certainty{d, nd};
          },
          [&](const ProbPairSeparate& t) {
            const double via_b =
                parents[0].pos * t.first.given_pos + parents[0].neg * t.first.given_neg;
            const double via_c =
                parents[1].pos * t.second.given_pos + parents[1].neg * t.second.given_neg;
            const double none = (1.0 - via_b) * (1.0 - via_c);
            return Certainty{1.0 - none, none};
          },
          [&](const PossCond1& t) {
            const Certainty& a = parents[0];
            auto pi = [&](std::size_t x) {
              return std::max(std::min(t.pi[x][0], a.pos), std::min(t.pi[x][1], a.neg));
            };
            return Certainty{pi(0), pi(1)};
          },
          [&](const PossCond2& t) {
            auto pi = [&](std::size_t z) {
              double best = 0.0;
              for (std::size_t b : {0, 1})
                for (std::size_t c : {0, 1})
                  best = std::max(best, std::min({t.pi[z][b][c], parents[0][b], parents[1][c]}));
              return best;
            };
            return Certainty{pi(0), pi(1)};
          },
          [&](const BelCond1& t) {
            const auto m = masses(parents[0]);
            auto bel = [&](std::size_t x) {
              return m[0] * t.bel[x][0] + m[1] * t.bel[x][1] + m[2] * t.bel[x][2];
            };
            return Certainty{bel(0), bel(1)};
          },
          [&](const BelCond2Joint& t) {
            const auto mb = masses(parents[0]);
            const auto mc = masses(parents[1]);
            auto bel = [&](std::size_t z) {
              double s = 0.0;
              for (std::size_t b = 0; b < 3; ++b)
                for (std::size_t c = 0; c < 3; ++c) s += mb[b] * mc[c] * t.bel[z][b][c];
              return s;
            };
            return Certainty{bel(0), bel(1)};
          },
          [](const BelCond2Separate&) -> Certainty {
            throw std::invalid_argument(
                "separate-table belief pairs have no quantitative combination rule");
          },
      },
      table);
}

QuantModel sample_model(const Network& net, std::uint64_t seed) {
  require_valid(net);
  std::mt19937_64 rng(seed);
  QuantModel model{net};
  Network& out = model.network;
  for (const auto& name : out.topological_order()) {
    if (const Link* l = out.link_into(name)) {
      const Formalism f = out.at(name).formalism;
      std::vector<Certainty> parents;
      for (const auto& p : l->parents) parents.push_back(state_in(out, p, f));
      Certainty value{};
      if (!std::holds_alternative<BelCond2Separate>(l->table)) {
        value = evaluate_link(l->table, parents);
      } else if (const auto& given = out.at(name).prior) {
        value = *given;
      } else {
        value = sample_certainty(f, rng);
      }
      out.find(name)->prior = value;
    } else if (!out.at(name).prior) {
      out.find(name)->prior = sample_certainty(out.at(name).formalism, rng);
    }
    Variable& v = *out.find(name);
    for (const Link* child : out.links_from(name)) {
      const Formalism f = table_formalism(child->table);
      if (f == v.formalism || v.bridge_priors.count(f)) continue;
      v.bridge_priors[f] =
          f == Formalism::possibility ? Certainty{1.0, 1.0} : sample_certainty(f, rng);
    }
  }
  return model;
}

Certainty exact_probability(const QuantModel& model, const std::string& var) {
  return exact_in(model, var, Formalism::probability);
}

Certainty exact_possibility(const QuantModel& model, const std::string& var) {
  return exact_in(model, var, Formalism::possibility);
}

Certainty exact_belief(const QuantModel& model, const std::string& var) {
  return exact_in(model, var, Formalism::belief);
}

ContainmentReport check_containment(const Network& net, const Evidence& evidence,
                                    const PerturbationSpec& spec) {
  require_valid(net);
  if (!(spec.epsilon > 0.0) || spec.epsilon > 0.5) {
    throw std::invalid_argument("perturbation size must lie in (0, 0.5]");
  }
  for (const auto& [name, entry] : evidence) {
    const Variable* v = net.find(name);
    if (!v) throw EvidenceError("evidence names unknown variable '" + name + "'");
    if (net.link_into(name)) {
      throw EvidenceError("oracle evidence must be on root variables; '" + name +
                          "' has parents");
    }
    // A fixed prior is never resampled, so evidence impossible at it would
    // make every trial infeasible.
    if (v->prior) complete_change(*v, entry);
  }

  const auto order = net.topological_order();
  ContainmentReport report;
  report.trials = spec.trials;
  std::map<std::string, ContainmentRow> rows;
  std::set<std::string> bridged;
  for (const auto& name : order) {
    ContainmentRow row;
    row.variable = name;
    row.formalism = net.at(name).formalism;
    row.predicted = {QSign::zero(), QSign::zero()};
    if (const Link* l = net.link_into(name)) {
      for (const auto& p : l->parents) {
        if (bridged.count(p) || net.at(p).formalism != row.formalism) row.bridged = true;
      }
    }
    if (row.bridged) bridged.insert(name);
    rows[name] = row;
  }
  bool first_prediction = true;
  std::size_t checked = 0;
  std::size_t contained = 0;

  for (std::size_t trial = 0; trial < spec.trials; ++trial) {
    for (std::size_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
      const std::uint64_t seed = mix(spec.seed, trial, attempt);
      const QuantModel model = sample_model(net, seed);
      const Network& m = model.network;
      if (degenerate(m)) {
        ++report.degenerate;
        continue;
      }
      ChangeReport predicted;
      try {
        predicted = propagate(m, evidence);
      } catch (const EvidenceError&) {
        ++report.infeasible;
        continue;
      }

      std::mt19937_64 rng(splitmix(seed ^ 0x5eedf00dULL));
      std::map<std::string, Certainty> before;
      std::map<std::string, Certainty> after;
      bool feasible = true;
      for (const auto& [name, entry] : evidence) {
        const Variable& v = m.at(name);
        const Change allowed = complete_change(v, entry);
        auto moved = random_perturbation(v.formalism, *v.prior, allowed, spec.epsilon, rng);
        if (!moved) {
          feasible = false;
          break;
        }
        after[name] = *moved;
      }
      if (!feasible) {
        ++report.infeasible;
        continue;
      }

      std::set<std::string> unevaluable;
      std::map<std::pair<std::string, Formalism>, Certainty> bridged_after;
      auto observed_change = [&](const std::string& name) {
        const Certainty& b = before.at(name);
        const Certainty& a = after.at(name);
        return Change{sign_of(a.pos - b.pos, spec.zero_tolerance),
                      sign_of(a.neg - b.neg, spec.zero_tolerance)};
      };
      for (const auto& name : order) {
        const Variable& v = m.at(name);
        const Link* l = m.link_into(name);
        if (!l) {
          before[name] = *v.prior;
          after.try_emplace(name, *v.prior);
          continue;
        }
        bool skip = std::holds_alternative<BelCond2Separate>(l->table);
        for (const auto& p : l->parents) skip = skip || unevaluable.count(p) > 0;
        if (skip) {
          unevaluable.insert(name);
          continue;
        }
        std::vector<Certainty> pre, post;
        for (const auto& p : l->parents) {
          const Variable& pv = m.at(p);
          if (pv.formalism == v.formalism) {
            pre.push_back(before.at(p));
            post.push_back(after.at(p));
            continue;
          }
          const Certainty base = state_in(m, p, v.formalism);
          auto key = std::make_pair(p, v.formalism);
          auto it = bridged_after.find(key);
          if (it == bridged_after.end()) {
            const Change widened = bridge_change(observed_change(p), pv.formalism, v.formalism);
            auto moved = random_perturbation(v.formalism, base, widened, spec.epsilon, rng);
            it = bridged_after.emplace(key, moved.value_or(base)).first;
          }
          pre.push_back(base);
          post.push_back(it->second);
        }
        before[name] = evaluate_link(l->table, pre);
        after[name] = evaluate_link(l->table, post);
      }

      for (const auto& name : order) {
        ContainmentRow& row = rows[name];
        const Change& pred = predicted.changes.at(name);
        if (first_prediction) {
          row.predicted = pred;
        } else {
          row.predicted = {row.predicted.pos.unite(pred.pos), row.predicted.neg.unite(pred.neg)};
        }
        if (unevaluable.count(name)) continue;
        const Change obs = observed_change(name);
        ++row.observed[0][sign_slot(obs.pos)];
        ++row.observed[1][sign_slot(obs.neg)];
        ++row.checked;
        ++checked;
        if (obs.pos.subset_of(pred.pos) && obs.neg.subset_of(pred.neg)) {
          ++contained;
        } else {
          ++row.violations;
        }
      }
      first_prediction = false;
      ++report.completed;
      break;
    }
  }

  for (const auto& name : order) {
    ContainmentRow& row = rows[name];
    if (row.checked == 0) {
      row.verdict = Verdict::skipped;
    } else {
      row.verdict = row.violations == 0 ? Verdict::pass : Verdict::fail;
    }
  }
  std::vector<std::string> names(order.begin(), order.end());
  std::sort(names.begin(), names.end());
  for (const auto& name : names) report.rows.push_back(rows[name]);
  report.pass_rate = checked == 0 ? 1.0 : static_cast<double>(contained) / checked;
  return report;
}

}  // namespace qnet
