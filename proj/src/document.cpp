#include "qnet/document.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace qnet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  if (!head(s.front())) return false;
  for (char c : s) {
    if (!head(c) && !std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::string_view line, int number, std::vector<Diagnostic>& diags)
      : line_(line), number_(number), diags_(diags) {}

  std::optional<Statement> parse() {
    auto words = split_words(line_);
    if (words.empty()) return std::nullopt;
    const std::string_view kw = words[0];
    const std::string_view rest = line_.substr(kw.data() + kw.size() - line_.data());
    if (kw == "node") return parse_node(words);
    if (kw == "prior") return parse_prior(words);
    if (kw == "link") return parse_link(rest);
    if (kw == "cond") return parse_cond(rest);
    fail(kw, "unknown statement '" + std::string(kw) + "'");
    return std::nullopt;
  }

  SourcePos pos_of(std::string_view token) const {
    return {number_, static_cast<int>(token.data() - line_.data()) + 1};
  }

 private:
  void fail(std::string_view at, std::string msg) { diags_.push_back({pos_of(at), std::move(msg)}); }

  bool identifier(std::string_view tok) {
    if (is_identifier(tok)) return true;
    fail(tok.empty() ? line_ : tok, "expected a variable name, got '" + std::string(tok) + "'");
    return false;
  }

  std::optional<Statement> parse_node(const std::vector<std::string_view>& w) {
    if (w.size() != 3) {
      fail(w[0], "expected 'node NAME prob|poss|bel'");
      return std::nullopt;
    }
    if (!identifier(w[1])) return std::nullopt;
    auto f = parse_formalism(w[2]);
    if (!f) {
      fail(w[2], "unknown formalism '" + std::string(w[2]) + "' (expected prob, poss or bel)");
      return std::nullopt;
    }
    return NodeDecl{std::string(w[1]), *f};
  }

  std::optional<Statement> parse_prior(const std::vector<std::string_view>& w) {
    if (w.size() != 4 && w.size() != 5) {
      fail(w[0], "expected 'prior NAME [prob|poss|bel] VALUE VALUE'");
      return std::nullopt;
    }
    if (!identifier(w[1])) return std::nullopt;
    PriorDecl d;
    d.name = std::string(w[1]);
    std::size_t i = 2;
    if (w.size() == 5) {
      d.formalism = parse_formalism(w[2]);
      if (!d.formalism) {
        fail(w[2], "unknown formalism '" + std::string(w[2]) + "' (expected prob, poss or bel)");
        return std::nullopt;
      }
      i = 3;
    }
    auto a = parse_number(w[i]);
    auto b = parse_number(w[i + 1]);
    if (!a) fail(w[i], "expected a number, got '" + std::string(w[i]) + "'");
    if (!b) fail(w[i + 1], "expected a number, got '" + std::string(w[i + 1]) + "'");
    if (!a || !b) return std::nullopt;
    d.pos = *a;
    d.neg = *b;
    return d;
  }

  std::optional<Statement> parse_link(std::string_view rest) {
    const auto arrow = rest.find("->");
    if (arrow == std::string_view::npos) {
      fail(rest.empty() ? line_ : trim(rest), "expected 'link PARENT -> CHILD'");
      return std::nullopt;
    }
    LinkDecl d;
    for (auto part : split_on(rest.substr(0, arrow), '&')) {
      auto name = trim(part);
      if (!identifier(name)) return std::nullopt;
      d.parents.emplace_back(name);
    }
    auto right = split_words(rest.substr(arrow + 2));
    if (right.empty()) {
      fail(rest.substr(arrow, 2), "missing child after '->'");
      return std::nullopt;
    }
    if (!identifier(right[0])) return std::nullopt;
    d.child = std::string(right[0]);
    if (right.size() >= 2) {
      if (right[1] != "separate" || right.size() > 2) {
        fail(right[1], "unexpected '" + std::string(right[1]) + "' after link child");
        return std::nullopt;
      }
      d.separate = true;
    }
    if (d.parents.size() > 2) {
      fail(trim(rest), "a link has at most two parents");
      return std::nullopt;
    }
    return d;
  }

  std::optional<OutcomeRef> outcome(std::string_view tok) {
    tok = trim(tok);
    if (auto bar = tok.find('|'); bar != std::string_view::npos) {
      auto left = trim(tok.substr(0, bar));
      auto right = trim(tok.substr(bar + 1));
      if (!identifier(left)) return std::nullopt;
      if (right.size() < 2 || right[0] != '~' || right.substr(1) != left) {
        fail(tok, "frame outcome must be written '" + std::string(left) + "|~" +
                      std::string(left) + "'");
        return std::nullopt;
      }
      return OutcomeRef{std::string(left), kFrame};
    }
    if (!tok.empty() && tok[0] == '~') {
      auto name = trim(tok.substr(1));
      if (!identifier(name)) return std::nullopt;
      return OutcomeRef{std::string(name), kNeg};
    }
    if (!identifier(tok)) return std::nullopt;
    return OutcomeRef{std::string(tok), kPos};
  }

  std::optional<Statement> parse_cond(std::string_view rest) {
    const auto eq = rest.rfind('=');
    const auto bar = rest.find('|');
    if (eq == std::string_view::npos || bar == std::string_view::npos || bar > eq) {
      fail(trim(rest).empty() ? line_ : trim(rest),
           "expected 'cond CHILD_OUTCOME | PARENT_OUTCOMES = VALUE'");
      return std::nullopt;
    }
    CondDecl d;
    auto child = outcome(rest.substr(0, bar));
    if (!child) return std::nullopt;
    d.child = *child;
    for (auto part : split_on(rest.substr(bar + 1, eq - bar - 1), ',')) {
      auto o = outcome(part);
      if (!o) return std::nullopt;
      d.parents.push_back(*o);
    }
    auto value_text = trim(rest.substr(eq + 1));
    auto value = parse_number(value_text);
    if (!value) {
      fail(value_text.empty() ? rest.substr(eq, 1) : value_text,
           "expected a number, got '" + std::string(value_text) + "'");
      return std::nullopt;
    }
    d.value = *value;
    return d;
  }

  std::string_view line_;
  int number_;
  std::vector<Diagnostic>& diags_;
};

std::string outcome_text(const OutcomeRef& o) { return outcome_label(o.variable, o.outcome); }

// Resolves a document into a Network, collecting diagnostics.
class Resolver {
 public:
  explicit Resolver(std::vector<Diagnostic>& diags) : diags_(diags) {}

  Network run(const NetworkDocument& doc) {
    for (const auto& s : doc.statements) {
      if (auto* n = std::get_if<NodeDecl>(&s.statement)) add_node(*n, s.pos);
    }
    for (const auto& s : doc.statements) {
      std::visit(overloaded{
                     [](const NodeDecl&) {},
                     [&](const PriorDecl& p) { add_prior(p, s.pos); },
                     [&](const LinkDecl& l) { add_link(l, s.pos); },
                     [](const CondDecl&) {},
                 },
                 s.statement);
    }
    for (const auto& s : doc.statements) {
      if (auto* c = std::get_if<CondDecl>(&s.statement)) add_cond(*c, s.pos);
    }
    for (auto& pl : links_) {
      if (pl.usable) build_table(pl);
    }
    return std::move(net_);
  }

 private:
  struct PendingLink {
    LinkDecl decl;
    SourcePos pos;
    bool usable = true;
    std::map<std::pair<std::size_t, std::vector<OutcomeRef>>, double> values;
  };

  void diag(SourcePos pos, std::string msg) { diags_.push_back({pos, std::move(msg)}); }

  void add_node(const NodeDecl& n, SourcePos pos) {
    if (net_.find(n.name)) {
      diag(pos, "duplicate variable '" + n.name + "'");
      return;
    }
    net_.add_variable(Variable{n.name, n.formalism, std::nullopt, {}});
  }

  void add_prior(const PriorDecl& p, SourcePos pos) {
    Variable* v = net_.find(p.name);
    if (!v) {
      diag(pos, "prior for undeclared variable '" + p.name + "'");
      return;
    }
    const Formalism f = p.formalism.value_or(v->formalism);
    const Certainty c{p.pos, p.neg};
    if (f == v->formalism) {
      if (v->prior) diag(pos, "duplicate prior for '" + p.name + "'");
      v->prior = c;
    } else {
      if (v->bridge_priors.count(f)) {
        diag(pos, "duplicate " + std::string(formalism_keyword(f)) + " prior for '" + p.name + "'");
      }
      v->bridge_priors[f] = c;
    }
  }

  void add_link(const LinkDecl& l, SourcePos pos) {
    PendingLink pl{l, pos, true, {}};
    for (const auto& name : l.parents) {
      if (!net_.find(name)) {
        diag(pos, "link references undeclared variable '" + name + "'");
        pl.usable = false;
      }
    }
    const Variable* child = net_.find(l.child);
    if (!child) {
      diag(pos, "link references undeclared variable '" + l.child + "'");
      pl.usable = false;
    }
    if (l.parents.size() == 2 && l.parents[0] == l.parents[1]) {
      diag(pos, "parents of a two-parent link must be distinct");
      pl.usable = false;
    }
    if (l.separate && l.parents.size() != 2) {
      diag(pos, "'separate' applies to two-parent links only");
      pl.usable = false;
    }
    if (l.separate && child && child->formalism == Formalism::possibility) {
      diag(pos, "'separate' tables are not available for possibility links");
      pl.usable = false;
    }
    if (link_of_.count(l.child)) {
      diag(pos, "variable '" + l.child + "' is already the child of another link");
      pl.usable = false;
    } else {
      link_of_[l.child] = links_.size();
    }
    links_.push_back(std::move(pl));
  }

  void add_cond(const CondDecl& c, SourcePos pos) {
    const Variable* child = net_.find(c.child.variable);
    if (!child) {
      diag(pos, "conditional references undeclared variable '" + c.child.variable + "'");
      return;
    }
    for (const auto& p : c.parents) {
      if (!net_.find(p.variable)) {
        diag(pos, "conditional references undeclared variable '" + p.variable + "'");
        return;
      }
    }
    auto it = link_of_.find(c.child.variable);
    if (it == link_of_.end()) {
      diag(pos, "no link into '" + c.child.variable + "' for this conditional");
      return;
    }
    PendingLink& pl = links_[it->second];
    if (!pl.usable) return;
    if (c.child.outcome == kFrame) {
      diag(pos, "child outcome must be '" + c.child.variable + "' or '~" + c.child.variable + "'");
      return;
    }
    const auto& parents = pl.decl.parents;
    if (pl.decl.separate) {
      if (c.parents.size() != 1 ||
          (c.parents[0].variable != parents[0] && c.parents[0].variable != parents[1])) {
        diag(pos, "a separate-table conditional names exactly one parent outcome of " +
                      parents[0] + " or " + parents[1]);
        return;
      }
    } else {
      if (c.parents.size() != parents.size()) {
        diag(pos, "expected " + std::to_string(parents.size()) + " parent outcome(s), got " +
                      std::to_string(c.parents.size()));
        return;
      }
      for (std::size_t i = 0; i < parents.size(); ++i) {
        if (c.parents[i].variable != parents[i]) {
          diag(pos, "parent outcome '" + outcome_text(c.parents[i]) + "' does not match parent '" +
                        parents[i] + "' of the link into '" + c.child.variable + "'");
          return;
        }
      }
    }
    for (const auto& p : c.parents) {
      if (p.outcome == kFrame && child->formalism != Formalism::belief) {
        diag(pos, "frame outcome '" + outcome_text(p) + "' is only meaningful for belief links");
        return;
      }
    }
    auto key = std::make_pair(c.child.outcome, c.parents);
    if (pl.values.count(key)) {
      diag(pos, "duplicate conditional for " + outcome_text(c.child));
      return;
    }
    pl.values[key] = c.value;
  }

  std::optional<double> get(const PendingLink& pl, std::size_t z,
                            std::vector<OutcomeRef> parents) const {
    auto it = pl.values.find({z, std::move(parents)});
    if (it == pl.values.end()) return std::nullopt;
    return it->second;
  }

  std::string given(const std::vector<OutcomeRef>& parents) const {
    std::string s;
    for (const auto& p : parents) s += (s.empty() ? "" : ", ") + outcome_text(p);
    return s;
  }

  // p(z|parents) from either the direct entry or its complement.
  double probability(PendingLink& pl, const std::vector<OutcomeRef>& parents) {
    const std::string& child = pl.decl.child;
    auto direct = get(pl, kPos, parents);
    auto complement = get(pl, kNeg, parents);
    if (direct && complement && std::abs(*direct + *complement - 1.0) > 1e-9) {
      diag(pl.pos, "p(" + child + " | " + given(parents) + ") and p(~" + child + " | " +
                       given(parents) + ") do not sum to 1");
    }
    if (direct) return *direct;
    if (complement) return 1.0 - *complement;
    diag(pl.pos, "missing conditional p(" + child + " | " + given(parents) + ")");
    return 0.0;
  }

  double required(PendingLink& pl, std::size_t z, const std::vector<OutcomeRef>& parents) {
    if (auto v = get(pl, z, parents)) return *v;
    diag(pl.pos, "missing conditional possibility of " + outcome_label(pl.decl.child, z) +
                     " given " + given(parents));
    return 0.0;
  }

  double optional_zero(PendingLink& pl, std::size_t z, const std::vector<OutcomeRef>& parents) {
    return get(pl, z, parents).value_or(0.0);
  }

  BelCond1 bel1(PendingLink& pl, const std::string& parent) {
    BelCond1 t;
    for (std::size_t z : {kPos, kNeg})
      for (std::size_t s : {kPos, kNeg, kFrame})
        t.bel[z][s] = optional_zero(pl, z, {{parent, s}});
    return t;
  }

  ProbCond1 prob1(PendingLink& pl, const std::string& parent) {
    return {probability(pl, {{parent, kPos}}), probability(pl, {{parent, kNeg}})};
  }

  void build_table(PendingLink& pl) {
    const Variable* child = net_.find(pl.decl.child);
    const auto& ps = pl.decl.parents;
    const bool pair = ps.size() == 2;
    LinkTable table;
    switch (child->formalism) {
      case Formalism::probability:
        if (!pair) {
          table = prob1(pl, ps[0]);
        } else if (pl.decl.separate) {
          table = ProbPairSeparate{prob1(pl, ps[0]), prob1(pl, ps[1])};
        } else {
          ProbCond2 t;
          for (std::size_t b : {kPos, kNeg})
            for (std::size_t c : {kPos, kNeg})
              t.p[b][c] = probability(pl, {{ps[0], b}, {ps[1], c}});
          table = t;
        }
        break;
      case Formalism::possibility:
        if (!pair) {
          PossCond1 t;
          for (std::size_t z : {kPos, kNeg})
            for (std::size_t y : {kPos, kNeg}) t.pi[z][y] = required(pl, z, {{ps[0], y}});
          table = t;
        } else {
          PossCond2 t;
          for (std::size_t z : {kPos, kNeg})
            for (std::size_t b : {kPos, kNeg})
              for (std::size_t c : {kPos, kNeg})
                t.pi[z][b][c] = required(pl, z, {{ps[0], b}, {ps[1], c}});
          table = t;
        }
        break;
      case Formalism::belief:
        if (!pair) {
          table = bel1(pl, ps[0]);
        } else if (pl.decl.separate) {
          table = BelCond2Separate{bel1(pl, ps[0]), bel1(pl, ps[1])};
        } else {
          BelCond2Joint t;
          for (std::size_t z : {kPos, kNeg})
            for (std::size_t b : {kPos, kNeg, kFrame})
              for (std::size_t c : {kPos, kNeg, kFrame})
                t.bel[z][b][c] = optional_zero(pl, z, {{ps[0], b}, {ps[1], c}});
          table = t;
        }
        break;
    }
    net_.add_link(Link{ps, pl.decl.child, table});
  }

  std::vector<Diagnostic>& diags_;
  Network net_;
  std::vector<PendingLink> links_;
  std::map<std::string, std::size_t> link_of_;
};

}  // namespace

bool operator==(const NetworkDocument& a, const NetworkDocument& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    if (!(a.statements[i].statement == b.statements[i].statement)) return false;
  }
  return true;
}

std::string to_string(const Diagnostic& d) {
  return std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " + d.message;
}

ParseResult parse_network(std::string_view text) {
  ParseResult result;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++number;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    LineParser parser(line, number, result.diagnostics);
    if (auto stmt = parser.parse()) {
      auto words = split_words(line);
      result.document.statements.push_back({std::move(*stmt), parser.pos_of(words[0])});
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (result.diagnostics.empty()) {
    Resolver(result.diagnostics).run(result.document);
  }
  return result;
}

std::string serialize(const NetworkDocument& doc) {
  std::ostringstream os;
  for (const auto& s : doc.statements) {
    std::visit(
        overloaded{
            [&](const NodeDecl& n) {
              os << "node " << n.name << ' ' << formalism_keyword(n.formalism) << '\n';
            },
            [&](const PriorDecl& p) {
              os << "prior " << p.name << ' ';
              if (p.formalism) os << formalism_keyword(*p.formalism) << ' ';
              os << format_number(p.pos) << ' ' << format_number(p.neg) << '\n';
            },
            [&](const LinkDecl& l) {
              os << "link ";
              for (std::size_t i = 0; i < l.parents.size(); ++i) {
                os << (i ? " & " : "") << l.parents[i];
              }
              os << " -> " << l.child << (l.separate ? " separate" : "") << '\n';
            },
            [&](const CondDecl& c) {
              os << "cond " << outcome_text(c.child) << " | ";
              for (std::size_t i = 0; i < c.parents.size(); ++i) {
                os << (i ? ", " : "") << outcome_text(c.parents[i]);
              }
              os << " = " << format_number(c.value) << '\n';
            },
        },
        s.statement);
  }
  return os.str();
}

Network build_network(const NetworkDocument& doc) {
  std::vector<Diagnostic> diags;
  Network net = Resolver(diags).run(doc);
  if (!diags.empty()) {
    std::string msg = "network document does not resolve:";
    for (const auto& d : diags) msg += "\n  " + to_string(d);
    throw NetworkError(msg);
  }
  return net;
}

Network load_network(std::string_view text) {
  auto parsed = parse_network(text);
  if (!parsed.ok()) {
    std::string msg = "cannot parse network:";
    for (const auto& d : parsed.diagnostics) msg += "\n  " + to_string(d);
    throw NetworkError(msg);
  }
  return build_network(parsed.document);
}

}  // namespace qnet
