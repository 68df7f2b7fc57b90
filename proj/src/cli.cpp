#include "qnet/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qnet/document.hpp"
#include "qnet/oracle.hpp"
#include "qnet/report.hpp"

namespace qnet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Exit statuses.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct LoadedNetwork {
  bool ok = false;
  Network net;
};

LoadedNetwork load_file(const std::string& path, std::ostream& err) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    err << "error: cannot read " << path << '\n';
    return {};
  }
  std::stringstream buf;
  buf << file.rdbuf();
  auto parsed = parse_network(buf.str());
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) err << path << ':' << to_string(d) << '\n';
    return {};
  }
  try {
    return {true, build_network(parsed.document)};
  } catch (const NetworkError& e) {
    err << "error: " << e.what() << '\n';
    return {};
  }
}

class Repl {
 public:
  Repl(const Network& net, bool strict, std::ostream& out, std::ostream& err)
      : net_(net), strict_(strict), out_(out), err_(err) {}

  void run(std::istream& in, bool interactive) {
    std::string line;
    while (true) {
      if (interactive) out_ << (hold_ ? "qnet(hold)> " : "qnet> ") << std::flush;
      if (!std::getline(in, line)) break;
      const auto cmd = trim(line);
      if (cmd.empty() || cmd.front() == '#') continue;
      if (cmd == "quit" || cmd == "exit") break;
      if (cmd == "hold") {
        hold_ = true;
      } else if (cmd == "reset") {
        hold_ = false;
        held_.clear();
      } else if (cmd == "help") {
        out_ << "VAR=SIGN[,VAR=SIGN...]  propagate evidence (VAR:neg=SIGN for ~VAR)\n"
                "hold                    compose later queries with the current changes\n"
                "reset                   drop held changes and answer queries independently\n"
                "quit                    leave\n";
      } else {
        query(cmd);
      }
    }
  }

 private:
  void query(std::string_view text) {
    ChangeReport report;
    try {
      PropagationOptions opts;
      opts.strict_bridges = strict_;
      report = propagate(net_, parse_evidence(text), opts);
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return;
    }
    if (hold_) {
      if (!held_.empty()) {
        for (auto& [name, change] : report.changes) {
          const Change& before = held_.at(name);
          change = {qadd(before.pos, change.pos), qadd(before.neg, change.neg)};
        }
      }
      held_ = report.changes;
    }
    write_changes(out_, net_, report);
  }

  const Network& net_;
  bool strict_;
  std::ostream& out_;
  std::ostream& err_;
  bool hold_ = false;
  ChangeVector held_;
};

}  // namespace

Evidence parse_evidence(std::string_view text) {
  Evidence ev;
  std::map<std::string, QSign> neg_only;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = trim(text.substr(start, end - start));
    start = end + 1;
    if (item.empty()) throw std::invalid_argument("empty evidence entry");
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("evidence entry '" + std::string(item) + "' lacks '='");
    }
    auto lhs = trim(item.substr(0, eq));
    const auto rhs = trim(item.substr(eq + 1));
    bool negative = false;
    if (auto colon = lhs.find(':'); colon != std::string_view::npos) {
      if (trim(lhs.substr(colon + 1)) != "neg") {
        throw std::invalid_argument("unknown evidence qualifier in '" + std::string(item) + "'");
      }
      negative = true;
      lhs = trim(lhs.substr(0, colon));
    }
    if (lhs.empty()) throw std::invalid_argument("missing variable in '" + std::string(item) + "'");
    const auto sign = QSign::parse(rhs);
    if (!sign || !sign->is_set()) {
      throw std::invalid_argument("bad sign '" + std::string(rhs) + "' (expected +, -, 0, ?, +0, -0)");
    }
    const std::string name(lhs);
    if (negative) {
      if (neg_only.count(name)) throw std::invalid_argument("duplicate evidence for ~" + name);
      neg_only[name] = *sign;
    } else {
      if (ev.count(name)) throw std::invalid_argument("duplicate evidence for " + name);
      ev[name].pos = *sign;
    }
    if (end == text.size()) break;
  }
  for (const auto& [name, sign] : neg_only) {
    auto it = ev.find(name);
    if (it == ev.end()) {
      throw std::invalid_argument("evidence for ~" + name + " needs evidence for " + name + " too");
    }
    it->second.neg = sign;
  }
  return ev;
}

int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                std::ostream& err, bool interactive) {
  CLI::App app{"Qualitative change propagation through mixed-formalism networks", "qnet"};
  app.require_subcommand(1);

  std::string file;
  std::vector<std::string> evidence_args;
  bool strict = false;
  PerturbationSpec spec;

  auto add_file = [&](CLI::App* sub) {
    sub->add_option("file", file, "network file")->required();
  };
  auto add_evidence = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("-e,--evidence", evidence_args, "VAR=SIGN[,VAR=SIGN...]");
    if (required) opt->required();
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a network file");
  add_file(validate_cmd);
  auto* explain_cmd = app.add_subcommand("explain", "print every link's derivative matrix");
  add_file(explain_cmd);
  auto* propagate_cmd = app.add_subcommand("propagate", "propagate evidence");
  add_file(propagate_cmd);
  add_evidence(propagate_cmd, false);
  propagate_cmd->add_flag("--strict-bridges", strict, "a zero change becomes unknown across formalisms");
  auto* verify_cmd = app.add_subcommand("verify", "check predictions against sampled numeric models");
  add_file(verify_cmd);
  add_evidence(verify_cmd, true);
  verify_cmd->add_option("--trials", spec.trials, "number of sampled models")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", spec.seed, "random seed");
  verify_cmd->add_option("--epsilon", spec.epsilon, "perturbation size")
      ->check(CLI::Range(1e-12, 0.5));
  auto* repl_cmd = app.add_subcommand("repl", "read evidence lines from standard input");
  add_file(repl_cmd);
  repl_cmd->add_flag("--strict-bridges", strict, "a zero change becomes unknown across formalisms");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  Evidence evidence;
  if (!evidence_args.empty()) {
    std::string joined;
    for (const auto& a : evidence_args) joined += (joined.empty() ? "" : ",") + a;
    try {
      evidence = parse_evidence(joined);
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
  }

  auto loaded = load_file(file, err);
  if (!loaded.ok) return kFailure;
  const Network& net = loaded.net;

  const auto validation = validate(net);
  write_validation(err, validation);
  if (!validation.ok()) return kFailure;

  try {
    if (*validate_cmd) {
      out << "ok\t" << net.variables().size() << " variables\t" << net.links().size() << " links\n";
    } else if (*explain_cmd) {
      write_explanation(out, explain(net));
    } else if (*propagate_cmd) {
      PropagationOptions opts;
      opts.strict_bridges = strict;
      write_changes(out, net, propagate(net, evidence, opts));
    } else if (*verify_cmd) {
      const auto report = check_containment(net, evidence, spec);
      write_containment(out, report);
      return report.passed() ? kOk : kFailure;
    } else if (*repl_cmd) {
      Repl(net, strict, out, err).run(in, interactive);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace qnet
