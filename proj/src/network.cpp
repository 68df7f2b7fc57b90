#include "qnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace qnet {

namespace {

constexpr double kProbSumTolerance = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::string fmt_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

class Checker {
 public:
  Checker(const Network& net, ValidationReport& report) : net_(net), report_(report) {}

  void run() {
    check_variables();
    bool endpoints_ok = check_links();
    if (!endpoints_ok) return;
    if (!check_acyclic()) return;
    check_singly_connected();
  }

 private:
  void error(std::string msg) { report_.errors.push_back(std::move(msg)); }
  void warn(std::string msg) { report_.warnings.push_back(std::move(msg)); }

  void check_certainty(const std::string& where, Formalism f, const Certainty& c) {
    if (!unit_interval(c.pos) || !unit_interval(c.neg)) {
      error(where + ": values must lie in [0, 1]");
      return;
    }
    switch (f) {
      case Formalism::probability:
        if (std::abs(c.pos + c.neg - 1.0) > kProbSumTolerance) {
          error(where + ": probabilities must sum to 1 (got " + fmt_value(c.pos + c.neg) + ")");
        }
        break;
      case Formalism::possibility:
        if (!PossState{c.pos, c.neg}.normalized()) {
          error(where + ": possibilities must be normalized, max(pi(x), pi(~x)) = 1");
        }
        break;
      case Formalism::belief:
        if (c.pos + c.neg > 1.0 + kProbSumTolerance) {
          error(where + ": beliefs must satisfy bel(x) + bel(~x) <= 1");
        }
        break;
    }
  }

  void check_variables() {
    for (const auto& v : net_.variables()) {
      if (v.prior) {
        check_certainty("prior of '" + v.name + "'", v.formalism, *v.prior);
      }
      for (const auto& [f, c] : v.bridge_priors) {
        check_certainty("prior of '" + v.name + "' in " + std::string(formalism_keyword(f)),
                        f, c);
      }
    }
  }

  bool check_links() {
    bool endpoints_ok = true;
    std::map<std::string, int> child_count;
    for (const auto& l : net_.links()) {
      const std::string label = describe(l);
      const Variable* child = net_.find(l.child);
      if (!child) {
        error(label + ": unknown child variable '" + l.child + "'");
        endpoints_ok = false;
      }
      for (const auto& p : l.parents) {
        if (!net_.find(p)) {
          error(label + ": unknown parent variable '" + p + "'");
          endpoints_ok = false;
        }
      }
      if (l.parents.empty() || l.parents.size() > 2) {
        error(label + ": a link must have one or two parents");
        endpoints_ok = false;
        continue;
      }
      if (l.parents.size() != table_arity(l.table)) {
        error(label + ": table expects " + std::to_string(table_arity(l.table)) +
              " parent(s) but link has " + std::to_string(l.parents.size()));
      }
      if (l.parents.size() == 2 && l.parents[0] == l.parents[1]) {
        error(label + ": parents of a two-parent link must be distinct");
      }
      if (++child_count[l.child] == 2) {
        error("variable '" + l.child + "' is the child of more than one link");
      }
      if (child && table_formalism(l.table) != child->formalism) {
        error(label + ": table is quantified in " +
              std::string(formalism_keyword(table_formalism(l.table))) + " but child '" +
              l.child + "' is a " + std::string(formalism_keyword(child->formalism)) +
              " variable");
      }
      check_table(label, l);
    }
    return endpoints_ok;
  }

  void check_table(const std::string& label, const Link& l) {
    auto range = [&](double v) {
      if (!unit_interval(v)) error(label + ": conditional value " + fmt_value(v) + " outside [0, 1]");
    };
    auto bel1 = [&](const BelCond1& t) {
      for (const auto& row : t.bel) std::for_each(row.begin(), row.end(), range);
      for (std::size_t s = 0; s < 3; ++s) {
        if (t.bel[kPos][s] + t.bel[kNeg][s] > 1.0 + kProbSumTolerance) {
          error(label + ": bel(x|.) + bel(~x|.) exceeds 1");
        }
      }
    };
    std::visit(
        overloaded{
            [&](const ProbCond1& t) {
              range(t.given_pos);
              range(t.given_neg);
            },
            [&](const ProbCond2& t) {
              for (const auto& row : t.p) std::for_each(row.begin(), row.end(), range);
            },
            [&](const ProbPairSeparate& t) {
              for (const auto* c : {&t.first, &t.second}) {
                range(c->given_pos);
                range(c->given_neg);
              }
            },
            [&](const PossCond1& t) {
              for (const auto& row : t.pi) std::for_each(row.begin(), row.end(), range);
              for (std::size_t y : {kPos, kNeg}) {
                if (std::max(t.pi[kPos][y], t.pi[kNeg][y]) < 1.0) {
                  warn(label + ": conditional possibilities given " +
                       outcome_label(l.parents[0], y) + " are not normalized");
                }
              }
              check_poss_parents(label, l);
            },
            [&](const PossCond2& t) {
              for (const auto& z : t.pi)
                for (const auto& row : z) std::for_each(row.begin(), row.end(), range);
              for (std::size_t b : {kPos, kNeg}) {
                for (std::size_t c : {kPos, kNeg}) {
                  if (std::max(t.pi[kPos][b][c], t.pi[kNeg][b][c]) < 1.0) {
                    warn(label + ": conditional possibilities given " +
                         outcome_label(l.parents[0], b) + ", " +
                         outcome_label(l.parents.size() > 1 ? l.parents[1] : "?", c) +
                         " are not normalized");
                  }
                }
              }
              check_poss_parents(label, l);
            },
            [&](const BelCond1& t) { bel1(t); },
            [&](const BelCond2Joint& t) {
              for (const auto& z : t.bel)
                for (const auto& row : z) std::for_each(row.begin(), row.end(), range);
              for (std::size_t b = 0; b < 3; ++b) {
                for (std::size_t c = 0; c < 3; ++c) {
                  if (t.bel[kPos][b][c] + t.bel[kNeg][b][c] > 1.0 + kProbSumTolerance) {
                    error(label + ": bel(x|.,.) + bel(~x|.,.) exceeds 1");
                  }
                }
              }
            },
            [&](const BelCond2Separate& t) {
              bel1(t.first);
              bel1(t.second);
            },
        },
        l.table);
  }

  void check_poss_parents(const std::string& label, const Link& l) {
    for (const auto& p : l.parents) {
      const Variable* v = net_.find(p);
      if (v && v->formalism == Formalism::possibility && !v->prior) {
        error(label + ": possibility variable '" + p +
              "' feeds a possibility link and needs an explicit prior");
      }
    }
  }

  bool check_acyclic() {
    try {
      (void)net_.topological_order();
      return true;
    } catch (const NetworkError& e) {
      error(e.what());
      return false;
    }
  }

  void check_singly_connected() {
    std::map<std::string, std::string> parent;
    for (const auto& v : net_.variables()) parent[v.name] = v.name;
    auto find = [&](std::string x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    for (const auto& l : net_.links()) {
      for (const auto& p : l.parents) {
        auto a = find(p);
        auto b = find(l.child);
        if (a == b) {
          error("network is not singly connected: edge " + p + " -> " + l.child +
                " closes an undirected cycle");
          return;
        }
        parent[a] = b;
      }
    }
  }

  static std::string describe(const Link& l) {
    std::string s = "link ";
    for (std::size_t i = 0; i < l.parents.size(); ++i) {
      if (i) s += " & ";
      s += l.parents[i];
    }
    return s + " -> " + l.child;
  }

  const Network& net_;
  ValidationReport& report_;
};

bool is_zero(const Change& c) { return c.pos == QSign::zero() && c.neg == QSign::zero(); }

std::uint8_t drop_infeasible(const Variable& var, std::uint8_t bits) {
  if (!var.prior) return bits;
  const double tol = var.formalism == Formalism::probability ? kProbSumTolerance : 0.0;
  if (var.prior->pos >= 1.0 - tol) bits &= ~QSign::kPlus;
  if (var.prior->pos <= tol) bits &= ~QSign::kMinus;
  return bits;
}

QSign derive_negation(const Variable& var, QSign pos) {
  switch (var.formalism) {
    case Formalism::probability:
      return pos.negated();
    case Formalism::belief:
      return QSign::unknown();
    case Formalism::possibility:
      break;
  }
  // pi(x) = 1: a steady x leaves ~x free, a falling x lets ~x rise.
  // pi(x) < 1 (so pi(~x) = 1): a rising x may let ~x fall, otherwise ~x holds.
  const bool known = var.prior.has_value();
  const bool at_one = known && var.prior->pos == 1.0;
  const bool below_one = known && var.prior->pos < 1.0;
  std::uint8_t out = 0;
  if (pos.contains(QSign::kPlus)) out |= QSign::kMinus | QSign::kZero;
  if (pos.contains(QSign::kZero)) {
    out |= below_one ? QSign::kZero : QSign::kAll;
  }
  if (pos.contains(QSign::kMinus)) {
    out |= at_one ? (QSign::kPlus | QSign::kZero)
                  : (below_one ? QSign::kZero : (QSign::kPlus | QSign::kZero));
  }
  return QSign::from_bits(out);
}

}  // namespace

std::string outcome_label(const std::string& name, std::size_t outcome) {
  if (outcome == kPos) return name;
  if (outcome == kNeg) return "~" + name;
  return name + "|~" + name;
}

void Network::add_variable(Variable v) {
  if (index_.count(v.name)) throw NetworkError("duplicate variable '" + v.name + "'");
  index_[v.name] = variables_.size();
  variables_.push_back(std::move(v));
}

void Network::add_link(Link l) { links_.push_back(std::move(l)); }

const Variable* Network::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &variables_[it->second];
}

Variable* Network::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &variables_[it->second];
}

const Variable& Network::at(const std::string& name) const {
  const Variable* v = find(name);
  if (!v) throw NetworkError("unknown variable '" + name + "'");
  return *v;
}

const Link* Network::link_into(const std::string& name) const {
  for (const auto& l : links_) {
    if (l.child == name) return &l;
  }
  return nullptr;
}

std::vector<const Link*> Network::links_from(const std::string& name) const {
  std::vector<const Link*> out;
  for (const auto& l : links_) {
    if (std::find(l.parents.begin(), l.parents.end(), name) != l.parents.end()) {
      out.push_back(&l);
    }
  }
  return out;
}

std::vector<std::string> Network::topological_order() const {
  std::map<std::string, std::set<std::string>> pending;
  for (const auto& v : variables_) pending[v.name];
  for (const auto& l : links_) {
    for (const auto& p : l.parents) {
      if (index_.count(p) && index_.count(l.child)) pending[l.child].insert(p);
    }
  }
  std::vector<std::string> order;
  std::set<std::string> done;
  while (order.size() < variables_.size()) {
    bool progressed = false;
    for (const auto& v : variables_) {
      if (done.count(v.name)) continue;
      const auto& deps = pending[v.name];
      if (std::all_of(deps.begin(), deps.end(), [&](const auto& d) { return done.count(d) > 0; })) {
        order.push_back(v.name);
        done.insert(v.name);
        progressed = true;
        break;
      }
    }
    if (!progressed) {
      std::string stuck;
      for (const auto& v : variables_) {
        if (!done.count(v.name)) stuck += (stuck.empty() ? "" : ", ") + v.name;
      }
      throw NetworkError("network has a directed cycle through: " + stuck);
    }
  }
  return order;
}

std::optional<PossState> Network::possibility_state(const std::string& name) const {
  const Variable& v = at(name);
  if (v.formalism == Formalism::possibility) {
    if (!v.prior) return std::nullopt;
    return PossState{v.prior->pos, v.prior->neg};
  }
  auto it = v.bridge_priors.find(Formalism::possibility);
  if (it == v.bridge_priors.end()) return PossState{1.0, 1.0};
  return PossState{it->second.pos, it->second.neg};
}

ValidationReport validate(const Network& net) {
  ValidationReport report;
  Checker(net, report).run();
  return report;
}

Change complete_change(const Variable& var, const EvidenceEntry& partial) {
  if (partial.pos.is_marker() || (partial.neg && partial.neg->is_marker())) {
    throw EvidenceError("evidence on '" + var.name + "' must be a sign set, not a marker");
  }
  const std::uint8_t bits = drop_infeasible(var, partial.pos.bits());
  if (bits == 0) {
    throw EvidenceError("inconsistent evidence on '" + var.name + "': " +
                        partial.pos.to_string() + " is impossible at its current value");
  }
  const QSign pos = QSign::from_bits(bits);
  const QSign derived = derive_negation(var, pos);
  if (!partial.neg) return {pos, derived};
  if ((partial.neg->bits() & derived.bits()) == 0) {
    throw EvidenceError("inconsistent evidence on '" + var.name + "': change " +
                        partial.neg->to_string() + " on ~" + var.name + " contradicts " +
                        pos.to_string() + " on " + var.name + " (expected " +
                        derived.to_string() + ")");
  }
  return {pos, *partial.neg};
}

Change bridge_change(const Change& delta, Formalism from, Formalism to, bool strict) {
  if (from == to) return delta;
  auto widen = [strict](QSign s) {
    if (s == QSign::zero()) return strict ? QSign::unknown() : s;
    return s.unite(QSign::zero());
  };
  return {widen(delta.pos), widen(delta.neg)};
}

QMatrix link_derivative(const Network& net, const Link& link) {
  auto state = [&](const std::string& name) {
    auto s = net.possibility_state(name);
    if (!s) throw NetworkError("possibility variable '" + name + "' has no prior");
    return *s;
  };
  return std::visit(
      overloaded{
          [](const ProbCond1& t) { return prob_link_derivative(t); },
          [](const ProbCond2& t) { return prob_pair_derivative(t); },
          [](const ProbPairSeparate& t) {
            return prob_independent_pair_derivative(t.first, t.second);
          },
          [&](const PossCond1& t) { return poss_link_derivative(t, state(link.parents[0])); },
          [&](const PossCond2& t) {
            return poss_pair_derivative(t, state(link.parents[0]), state(link.parents[1]));
          },
          [](const BelCond1& t) { return bel_link_derivative(t); },
          [](const BelCond2Joint& t) { return bel_pair_joint_derivative(t); },
          [](const BelCond2Separate& t) { return bel_pair_separate_derivative(t); },
      },
      link.table);
}

namespace {

void require_valid(const Network& net) {
  const auto report = validate(net);
  if (report.ok()) return;
  std::string msg = "invalid network:";
  for (const auto& e : report.errors) msg += "\n  " + e;
  throw NetworkError(msg);
}

}  // namespace

ChangeReport propagate(const Network& net, const Evidence& evidence,
                       const PropagationOptions& options) {
  require_valid(net);
  std::map<std::string, Change> completed;
  for (const auto& [name, entry] : evidence) {
    const Variable* v = net.find(name);
    if (!v) throw EvidenceError("evidence names unknown variable '" + name + "'");
    completed[name] = complete_change(*v, entry);
  }

  ChangeReport report;
  std::map<const Link*, std::size_t> matrix_index;
  for (const auto& l : net.links()) {
    matrix_index[&l] = report.derivatives.size();
    try {
      report.derivatives.push_back({&l, link_derivative(net, l)});
    } catch (const std::invalid_argument& e) {
      throw NetworkError(e.what());
    }
  }

  for (const auto& name : net.topological_order()) {
    const Variable& var = net.at(name);
    Change change;
    Provenance prov;
    if (const Link* link = net.link_into(name)) {
      QVector incoming;
      for (const auto& p : link->parents) {
        const Variable& pv = net.at(p);
        const Change bridged =
            bridge_change(report.changes.at(p), pv.formalism, var.formalism, options.strict_bridges);
        incoming.push_back(bridged.pos);
        incoming.push_back(bridged.neg);
        if (!is_zero(bridged)) {
          prov.sources.push_back(p);
          if (pv.formalism != var.formalism) {
            prov.bridges.push_back(p + ": " + std::string(formalism_keyword(pv.formalism)) +
                                   "->" + std::string(formalism_keyword(var.formalism)));
          }
        }
      }
      const QVector out = qmatvec(report.derivatives[matrix_index.at(link)].derivative, incoming);
      change = {out[kPos], out[kNeg]};
    }
    if (auto it = completed.find(name); it != completed.end()) {
      change = {qadd(change.pos, it->second.pos), qadd(change.neg, it->second.neg)};
      prov.evidence = true;
    }
    report.changes[name] = change;
    report.provenance[name] = std::move(prov);
  }
  return report;
}

std::vector<LinkExplanation> explain(const Network& net) {
  require_valid(net);
  std::vector<const Link*> links;
  for (const auto& l : net.links()) links.push_back(&l);
  std::stable_sort(links.begin(), links.end(),
                   [](const Link* a, const Link* b) { return a->child < b->child; });

  std::vector<LinkExplanation> out;
  for (const Link* l : links) {
    LinkExplanation ex;
    ex.link = l;
    ex.rule = std::string(rule_name(l->table));
    try {
      ex.derivative = link_derivative(net, *l);
    } catch (const std::invalid_argument& e) {
      throw NetworkError(e.what());
    }
    for (std::size_t r = 0; r < ex.derivative.rows(); ++r) {
      for (std::size_t c = 0; c < ex.derivative.cols(); ++c) {
        const QSign d = ex.derivative.at(r, c);
        ex.entries.push_back({outcome_label(l->child, r),
                              outcome_label(l->parents[c / 2], c % 2), d, relation_name(d)});
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace qnet
