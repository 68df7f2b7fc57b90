#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qnet/network.hpp"

// Line-oriented network files:
//
//   # comment
//   node NAME prob|poss|bel
//   prior NAME [prob|poss|bel] VALUE VALUE
//   link PARENT -> CHILD
//   link P1 & P2 -> CHILD [separate]
//   cond CHILD_OUTCOME | PARENT_OUTCOME[, PARENT_OUTCOME] = VALUE
//
// Outcomes are written x, ~x, or x|~x (whole frame; belief parents only).

namespace qnet {

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct NodeDecl {
  std::string name;
  Formalism formalism = Formalism::probability;
  friend bool operator==(const NodeDecl&, const NodeDecl&) = default;
};

struct PriorDecl {
  std::string name;
  /// Set when the prior is given in a formalism other than the node's own
  /// (or restated explicitly).
  std::optional<Formalism> formalism;
  double pos = 0.0;
  double neg = 0.0;
  friend bool operator==(const PriorDecl&, const PriorDecl&) = default;
};

struct LinkDecl {
  std::vector<std::string> parents;
  std::string child;
  bool separate = false;
  friend bool operator==(const LinkDecl&, const LinkDecl&) = default;
};

struct OutcomeRef {
  std::string variable;
  std::size_t outcome = kPos;
  friend auto operator<=>(const OutcomeRef&, const OutcomeRef&) = default;
};

struct CondDecl {
  OutcomeRef child;
  std::vector<OutcomeRef> parents;
  double value = 0.0;
  friend bool operator==(const CondDecl&, const CondDecl&) = default;
};

using Statement = std::variant<NodeDecl, PriorDecl, LinkDecl, CondDecl>;

struct LocatedStatement {
  Statement statement;
  SourcePos pos;
};

struct NetworkDocument {
  std::vector<LocatedStatement> statements;

  /// Compares statements only; source positions are ignored.
  friend bool operator==(const NetworkDocument& a, const NetworkDocument& b);
};

struct Diagnostic {
  SourcePos pos;
  std::string message;
};

std::string to_string(const Diagnostic& d);

struct ParseResult {
  NetworkDocument document;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Parses and resolves a network file. Never throws on malformed input; every
/// problem becomes a diagnostic with its line and column.
ParseResult parse_network(std::string_view text);

/// Canonical text form; parse_network(serialize(d)).document == d.
std::string serialize(const NetworkDocument& doc);

/// Converts a document to a Network. Throws NetworkError listing the
/// diagnostics if the document does not resolve.
Network build_network(const NetworkDocument& doc);

/// parse_network + build_network; throws NetworkError on any diagnostic.
Network load_network(std::string_view text);

}  // namespace qnet
