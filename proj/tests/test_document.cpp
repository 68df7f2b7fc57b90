#include <doctest.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "qnet/document.hpp"
#include "support/reference.hpp"

using namespace qnet;

namespace {

std::string read_medical() {
  std::ifstream file(std::string(QNET_DATA_DIR) + "/medical.qn");
  std::stringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

// Renders a Network as a network file, independently of serialize().
std::string render(const Network& net) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& v : net.variables()) os << "node " << v.name << ' ' << formalism_keyword(v.formalism) << '\n';
  for (const auto& v : net.variables())
    if (v.prior) os << "prior " << v.name << ' ' << v.prior->pos << ' ' << v.prior->neg << '\n';
  auto out = [](const std::string& n, std::size_t o) { return outcome_label(n, o); };
  for (const auto& l : net.links()) {
    const auto& c = l.child;
    const auto& p = l.parents;
    os << "link " << p[0];
    if (p.size() == 2) os << " & " << p[1];
    os << " -> " << c;
    const bool separate = std::holds_alternative<ProbPairSeparate>(l.table) ||
                          std::holds_alternative<BelCond2Separate>(l.table);
    os << (separate ? " separate\n" : "\n");
    auto cond = [&](std::size_t z, const std::string& given, double v) {
      os << "cond " << out(c, z) << " | " << given << " = " << v << '\n';
    };
    auto prob1 = [&](const ProbCond1& t, const std::string& parent) {
      cond(kPos, out(parent, kPos), t.given_pos);
      cond(kPos, out(parent, kNeg), t.given_neg);
    };
    auto bel1 = [&](const BelCond1& t, const std::string& parent) {
      for (std::size_t z : {kPos, kNeg})
        for (std::size_t y : {kPos, kNeg, kFrame}) cond(z, out(parent, y), t.bel[z][y]);
    };
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ProbCond1>) {
            prob1(t, p[0]);
          } else if constexpr (std::is_same_v<T, ProbCond2>) {
            for (std::size_t b : {kPos, kNeg})
              for (std::size_t d : {kPos, kNeg}) cond(kPos, out(p[0], b) + ", " + out(p[1], d), t.p[b][d]);
          } else if constexpr (std::is_same_v<T, ProbPairSeparate>) {
            prob1(t.first, p[0]);
            prob1(t.second, p[1]);
          } else if constexpr (std::is_same_v<T, PossCond1>) {
            for (std::size_t z : {kPos, kNeg})
              for (std::size_t y : {kPos, kNeg}) cond(z, out(p[0], y), t.pi[z][y]);
          } else if constexpr (std::is_same_v<T, PossCond2>) {
            for (std::size_t z : {kPos, kNeg})
              for (std::size_t b : {kPos, kNeg})
                for (std::size_t d : {kPos, kNeg}) cond(z, out(p[0], b) + ", " + out(p[1], d), t.pi[z][b][d]);
          } else if constexpr (std::is_same_v<T, BelCond1>) {
            bel1(t, p[0]);
          } else if constexpr (std::is_same_v<T, BelCond2Joint>) {
            for (std::size_t z : {kPos, kNeg})
              for (std::size_t b : {kPos, kNeg, kFrame})
                for (std::size_t d : {kPos, kNeg, kFrame})
                  cond(z, out(p[0], b) + ", " + out(p[1], d), t.bel[z][b][d]);
          } else {
            bel1(t.first, p[0]);
            bel1(t.second, p[1]);
          }
        },
        l.table);
  }
  return os.str();
}

bool same_network(const Network& a, const Network& b) {
  if (a.variables().size() != b.variables().size() || a.links().size() != b.links().size()) return false;
  for (std::size_t i = 0; i < a.variables().size(); ++i) {
    const auto& x = a.variables()[i];
    const auto& y = b.variables()[i];
    if (x.name != y.name || x.formalism != y.formalism || x.prior != y.prior) return false;
  }
  for (std::size_t i = 0; i < a.links().size(); ++i) {
    const auto& x = a.links()[i];
    const auto& y = b.links()[i];
    if (x.parents != y.parents || x.child != y.child || x.table.index() != y.table.index()) return false;
    if (!(link_derivative(a, x) == link_derivative(b, y))) return false;
  }
  return true;
}

std::vector<Diagnostic> diagnostics(const std::string& text) { return parse_network(text).diagnostics; }

}  // namespace

TEST_CASE("the medical network file") {
  const auto parsed = parse_network(read_medical());
  CHECK(parsed.ok());
  const Network net = build_network(parsed.document);
  CHECK(net.variables().size() == 8);
  CHECK(net.links().size() == 5);
  CHECK(net.at("l").formalism == Formalism::possibility);
  CHECK(net.at("p").formalism == Formalism::belief);
  const auto& pain = std::get<BelCond2Joint>(net.link_into("p")->table);
  CHECK(pain.bel[kPos][kPos][kPos] == 0.9);
  CHECK(pain.bel[kPos][kFrame][kPos] == 0.6);
  CHECK(pain.bel[kNeg][kPos][kPos] == 0.0);
  const auto& kt = std::get<ProbCond1>(net.link_into("k")->table);
  CHECK(kt.given_pos == 0.6);
  CHECK(kt.given_neg == 0.2);
}

TEST_CASE("empty and comment-only files") {
  CHECK(parse_network("").ok());
  CHECK(load_network("# nothing\n\n   \n").variables().empty());
}

TEST_CASE("diagnostics carry line and column") {
  SUBCASE("undeclared variable") {
    const auto d = diagnostics("node a prob\nlink q -> a\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].pos.line == 2);
    CHECK(d[0].message.find("'q'") != std::string::npos);
    CHECK(to_string(d[0]).rfind("2:", 0) == 0);
  }
  SUBCASE("bad number") {
    const auto d = diagnostics("node a prob\nprior a 0.5 x\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].pos.line == 2);
    CHECK(d[0].pos.column == 13);
  }
  SUBCASE("unknown statement") {
    const auto d = diagnostics("node a prob\n\n  frob a\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].pos.line == 3);
    CHECK(d[0].message.find("frob") != std::string::npos);
  }
  SUBCASE("missing formalism") { CHECK(diagnostics("node a\n").size() == 1); }
  SUBCASE("missing conditional") {
    const auto d = diagnostics("node a prob\nnode b prob\nlink a -> b\ncond b | a = 0.3\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].message.find("~a") != std::string::npos);
  }
  SUBCASE("complements must agree") {
    CHECK(diagnostics("node a prob\nnode b prob\nlink a -> b\ncond b | a = 0.3\n"
                      "cond b | ~a = 0.1\ncond ~b | a = 0.6\n")
              .size() == 1);
    CHECK(diagnostics("node a prob\nnode b prob\nlink a -> b\ncond b | a = 0.3\n"
                      "cond b | ~a = 0.1\ncond ~b | a = 0.7\n")
              .empty());
  }
  SUBCASE("duplicates") {
    CHECK(diagnostics("node a prob\nnode a prob\n").size() == 1);
    CHECK(diagnostics("node a prob\nprior a 0.5 0.5\nprior a 0.5 0.5\n").size() == 1);
  }
  SUBCASE("frame outcomes only for belief parents") {
    CHECK_FALSE(diagnostics("node a prob\nnode b prob\nlink a -> b\ncond b | a|~a = 0.3\n"
                            "cond b | a = 0.3\ncond b | ~a = 0.3\n")
                    .empty());
  }
  SUBCASE("separate only for two-parent, non-possibility links") {
    CHECK_FALSE(diagnostics("node a prob\nnode b prob\nlink a -> b separate\n").empty());
    CHECK_FALSE(diagnostics("node a poss\nnode c poss\nnode b poss\nlink a & c -> b separate\n").empty());
  }
  SUBCASE("a child belongs to one link") {
    CHECK_FALSE(diagnostics("node a bel\nnode c bel\nnode b bel\nlink a -> b\nlink c -> b\n").empty());
  }
}

TEST_CASE("belief conditionals default to zero") {
  const Network net = load_network("node a bel\nnode b bel\nlink a -> b\ncond b | a|~a = 0.3\n");
  const auto& t = std::get<BelCond1>(net.link_into("b")->table);
  CHECK(t.bel[kPos][kFrame] == 0.3);
  CHECK(t.bel[kPos][kPos] == 0.0);
  CHECK(t.bel[kNeg][kNeg] == 0.0);
}

TEST_CASE("prior formalism keywords") {
  const Network net = load_network("node a prob\nprior a 0.2 0.8\nprior a poss 1 0.5\n");
  CHECK(net.at("a").prior == Certainty{0.2, 0.8});
  CHECK(net.at("a").bridge_priors.at(Formalism::possibility) == Certainty{1.0, 0.5});
  CHECK(net.possibility_state("a")->pi_neg == 0.5);
}

TEST_CASE("malformed input never throws") {
  ref::Rng r(51);
  const std::string text = read_medical();
  const std::string alphabet = "nodeprilkcs&|~=,->0123456789.# \n\tabxyz";
  for (int i = 0; i < 3000; ++i) {
    std::string t = text;
    const std::size_t edits = 1 + r.pick(6);
    for (std::size_t e = 0; e < edits; ++e) {
      const std::size_t at = r.pick(t.size());
      switch (r.pick(3)) {
        case 0: t.erase(at, 1 + r.pick(4)); break;
        case 1: t.insert(at, 1, alphabet[r.pick(alphabet.size())]); break;
        default: t[at] = alphabet[r.pick(alphabet.size())]; break;
      }
    }
    ParseResult p;
    CHECK_NOTHROW(p = parse_network(t));
    for (const auto& d : p.diagnostics) {
      CHECK(d.pos.line >= 1);
      CHECK(d.pos.column >= 1);
    }
  }
  CHECK_NOTHROW(parse_network(std::string("\0\xff\xfe node", 8)));
}

TEST_CASE("serialize round-trips") {
  const auto medical = parse_network(read_medical()).document;
  const std::string once = serialize(medical);
  const auto again = parse_network(once);
  REQUIRE(again.ok());
  CHECK(again.document == medical);
  CHECK(serialize(again.document) == once);
}

TEST_CASE("random networks survive a trip through text") {
  ref::Rng r(52);
  for (int i = 0; i < 200; ++i) {
    const Network net = ref::random_network(r, 1 + r.pick(9));
    const std::string text = render(net);
    const auto parsed = parse_network(text);
    REQUIRE_MESSAGE(parsed.ok(), text);
    const Network back = build_network(parsed.document);
    CHECK(same_network(net, back));
    const auto reparsed = parse_network(serialize(parsed.document));
    REQUIRE(reparsed.ok());
    CHECK(reparsed.document == parsed.document);
  }
}
