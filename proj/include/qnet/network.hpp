#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/link.hpp"
#include "qnet/sign.hpp"

namespace qnet {

/// Numeric certainty values of a binary variable: (val(x), val(~x)).
struct Certainty {
  double pos = 0.0;
  double neg = 0.0;

  double operator[](std::size_t i) const { return i == kPos ? pos : neg; }
  friend bool operator==(const Certainty&, const Certainty&) = default;
};

struct Variable {
  std::string name;
  Formalism formalism = Formalism::probability;
  /// Prior in the variable's own formalism.
  std::optional<Certainty> prior;
  /// Numeric state of the variable in other formalisms, used where it feeds a
  /// link quantified in that formalism.
  std::map<Formalism, Certainty> bridge_priors;
};

struct Link {
  std::vector<std::string> parents;
  std::string child;
  LinkTable table;
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for evidence that names no variable or contradicts a variable's
/// extremal state.
class EvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singly connected network of binary variables. Build it with add_variable /
/// add_link, then treat it as immutable; validate() reports structural and
/// numeric problems without throwing.
class Network {
 public:
  void add_variable(Variable v);
  void add_link(Link l);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Link>& links() const { return links_; }
  std::vector<Variable>& mutable_variables() { return variables_; }

  const Variable* find(const std::string& name) const;
  Variable* find(const std::string& name);
  const Variable& at(const std::string& name) const;

  /// The link whose child is `name`, if any.
  const Link* link_into(const std::string& name) const;

  /// Links that have `name` among their parents.
  std::vector<const Link*> links_from(const std::string& name) const;

  /// Variable names in a topological order (parents first, ties by
  /// declaration order). Throws NetworkError on a directed cycle.
  std::vector<std::string> topological_order() const;

  /// Possibility state of `name` as seen by a possibility link: its own prior
  /// for a possibility variable, otherwise its possibility bridge prior, which
  /// defaults to total ignorance (1, 1).
  std::optional<PossState> possibility_state(const std::string& name) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Link> links_;
  std::map<std::string, std::size_t> index_;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

ValidationReport validate(const Network& net);

/// A change pair (delta val(x), delta val(~x)); sign sets only.
struct Change {
  QSign pos = QSign::zero();
  QSign neg = QSign::zero();

  friend bool operator==(const Change&, const Change&) = default;
};

/// Evidence on one variable. `neg` may be left open and is then completed
/// from the variable's formalism and extremal state.
struct EvidenceEntry {
  QSign pos = QSign::zero();
  std::optional<QSign> neg;
};

using Evidence = std::map<std::string, EvidenceEntry>;
using ChangeVector = std::map<std::string, Change>;

/// Completes a change on one outcome to a change pair following the
/// per-formalism coupling between x and ~x. Members of `partial.pos` that are
/// impossible at the variable's bound (an increase at value 1, a decrease at
/// value 0) are dropped; if nothing is left the evidence is rejected with
/// EvidenceError. An explicit `partial.neg` must be consistent with the
/// derived value and is kept as given.
Change complete_change(const Variable& var, const EvidenceEntry& partial);

/// Widens a change crossing from one formalism to another: any nonzero
/// direction becomes "that direction or zero". With `strict` a zero change
/// becomes unknown. Identity when from == to.
Change bridge_change(const Change& delta, Formalism from, Formalism to, bool strict = false);

struct PropagationOptions {
  /// Map [0] to [?] across formalism bridges.
  bool strict_bridges = false;
};

struct LinkEvaluation {
  const Link* link = nullptr;
  QMatrix derivative;
};

struct Provenance {
  bool evidence = false;
  /// Parents whose (bridged) change into this variable was nonzero.
  std::vector<std::string> sources;
  /// Bridges that carried a nonzero change, e.g. "a: prob->bel".
  std::vector<std::string> bridges;
};

struct ChangeReport {
  ChangeVector changes;
  std::vector<LinkEvaluation> derivatives;
  std::map<std::string, Provenance> provenance;
};

/// Derivative matrix of a link evaluated at the network's current numeric
/// state (only possibility links depend on it).
QMatrix link_derivative(const Network& net, const Link& link);

/// Forward propagation of qualitative evidence. Throws NetworkError if the
/// network does not validate and EvidenceError for bad evidence.
ChangeReport propagate(const Network& net, const Evidence& evidence,
                       const PropagationOptions& options = {});

struct EntryExplanation {
  std::string child_outcome;
  std::string parent_outcome;
  QSign derivative;
  std::string relation;
};

struct LinkExplanation {
  const Link* link = nullptr;
  std::string rule;
  QMatrix derivative;
  std::vector<EntryExplanation> entries;
};

/// Derivative matrices of every link with the relation each entry denotes,
/// ordered by child name. Throws NetworkError if the network does not
/// validate.
std::vector<LinkExplanation> explain(const Network& net);

/// Outcome label: "x" or "~x".
std::string outcome_label(const std::string& name, std::size_t outcome);

}  // namespace qnet
