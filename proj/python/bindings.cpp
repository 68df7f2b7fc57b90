#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qnet/cli.hpp"
#include "qnet/document.hpp"
#include "qnet/oracle.hpp"
#include "qnet/report.hpp"

namespace py = pybind11;
using namespace qnet;

namespace {

QSign to_sign(const std::string& text) {
  auto s = QSign::parse(text);
  if (!s) throw py::value_error("bad sign '" + text + "'");
  return *s;
}

// Accepts "s=+,t=-0" or {"s": "+"} / {"s": ("+", "-")}.
Evidence to_evidence(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) {
    try {
      return parse_evidence(obj.cast<std::string>());
    } catch (const std::invalid_argument& e) {
      throw py::value_error(e.what());
    }
  }
  Evidence ev;
  for (auto [key, value] : obj.cast<py::dict>()) {
    EvidenceEntry entry;
    if (py::isinstance<py::str>(value)) {
      entry.pos = to_sign(value.cast<std::string>());
    } else {
      auto pair = value.cast<std::pair<std::string, std::string>>();
      entry.pos = to_sign(pair.first);
      entry.neg = to_sign(pair.second);
    }
    ev[key.cast<std::string>()] = entry;
  }
  return ev;
}

py::dict changes_dict(const ChangeVector& changes) {
  py::dict d;
  for (const auto& [name, c] : changes) {
    d[py::str(name)] = py::make_tuple(c.pos.to_string(), c.neg.to_string());
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_qnet, m) {
  m.doc() = "Qualitative change propagation";

  py::register_exception<NetworkError>(m, "NetworkError", PyExc_ValueError);
  py::register_exception<EvidenceError>(m, "EvidenceError", PyExc_ValueError);

  py::class_<QSign>(m, "Sign")
      .def(py::init(&to_sign), py::arg("text"))
      .def("is_marker", &QSign::is_marker)
      .def("subset_of", &QSign::subset_of)
      .def("unite", &QSign::unite)
      .def("negated", &QSign::negated)
      .def("__str__", &QSign::to_string)
      .def("__repr__", [](QSign s) { return "Sign('" + s.to_string() + "')"; })
      .def("__eq__", [](QSign a, QSign b) { return a == b; })
      .def("__hash__", [](QSign s) { return std::hash<std::string>{}(s.to_string()); });

  m.def("qadd", &qadd, py::arg("a"), py::arg("b"));
  m.def("qmul", &qmul, py::arg("change"), py::arg("derivative"));

  py::class_<Network>(m, "Network")
      .def_property_readonly("variables",
                             [](const Network& n) {
                               std::vector<std::string> names;
                               for (const auto& v : n.variables()) names.push_back(v.name);
                               return names;
                             })
      .def("formalism",
           [](const Network& n, const std::string& name) {
             return std::string(formalism_keyword(n.at(name).formalism));
           })
      .def("links",
           [](const Network& n) {
             std::vector<std::string> out;
             for (const auto& l : n.links()) out.push_back(link_label(l));
             return out;
           })
      .def("validate", [](const Network& n) {
        auto r = validate(n);
        return py::make_tuple(r.errors, r.warnings);
      });

  m.def("load_network", &load_network, py::arg("text"),
        "Parse and resolve network text; raises NetworkError with positioned messages.");
  m.def(
      "parse_diagnostics",
      [](const std::string& text) {
        std::vector<std::tuple<int, int, std::string>> out;
        for (const auto& d : parse_network(text).diagnostics) {
          out.emplace_back(d.pos.line, d.pos.column, d.message);
        }
        return out;
      },
      py::arg("text"));

  m.def(
      "propagate",
      [](const Network& net, const py::object& evidence, bool strict_bridges) {
        PropagationOptions opts;
        opts.strict_bridges = strict_bridges;
        return changes_dict(propagate(net, to_evidence(evidence), opts).changes);
      },
      py::arg("network"), py::arg("evidence"), py::arg("strict_bridges") = false,
      "Returns {variable: (d_x, d_not_x)} as sign strings.");

  m.def(
      "explain",
      [](const Network& net) {
        py::list out;
        for (const auto& l : explain(net)) {
          for (const auto& e : l.entries) {
            py::dict row;
            row["link"] = link_label(*l.link);
            row["rule"] = l.rule;
            row["child_outcome"] = e.child_outcome;
            row["parent_outcome"] = e.parent_outcome;
            row["derivative"] = e.derivative.to_string();
            row["relation"] = e.relation;
            out.append(row);
          }
        }
        return out;
      },
      py::arg("network"));

  py::class_<ContainmentReport>(m, "ContainmentReport")
      .def_readonly("trials", &ContainmentReport::trials)
      .def_readonly("completed", &ContainmentReport::completed)
      .def_readonly("degenerate", &ContainmentReport::degenerate)
      .def_readonly("pass_rate", &ContainmentReport::pass_rate)
      .def("passed", &ContainmentReport::passed)
      .def_property_readonly("verdicts",
                             [](const ContainmentReport& r) {
                               py::dict d;
                               for (const auto& row : r.rows) {
                                 d[py::str(row.variable)] = std::string(verdict_name(row.verdict));
                               }
                               return d;
                             })
      .def("__str__", [](const ContainmentReport& r) {
        std::ostringstream os;
        write_containment(os, r);
        return os.str();
      });

  m.def(
      "check_containment",
      [](const Network& net, const py::object& evidence, std::size_t trials, std::uint64_t seed,
         double epsilon) {
        PerturbationSpec spec;
        spec.trials = trials;
        spec.seed = seed;
        spec.epsilon = epsilon;
        return check_containment(net, to_evidence(evidence), spec);
      },
      py::arg("network"), py::arg("evidence"), py::arg("trials") = 1000, py::arg("seed") = 0,
      py::arg("epsilon") = 1e-4);

  m.def(
      "run_command",
      [](const std::vector<std::string>& args, const std::string& input) {
        std::istringstream in(input);
        std::ostringstream out, err;
        int code = run_command(args, in, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "",
      "Runs the command line tool in-process; returns (exit_status, stdout, stderr).");
}
