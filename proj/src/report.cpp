#include "qnet/report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

namespace qnet {

namespace {

std::string counts(const std::array<std::size_t, 3>& c) {
  return "+=" + std::to_string(c[0]) + ",0=" + std::to_string(c[1]) + ",-=" + std::to_string(c[2]);
}

}  // namespace

std::string link_label(const Link& link) {
  std::string s;
  for (std::size_t i = 0; i < link.parents.size(); ++i) s += (i ? "&" : "") + link.parents[i];
  return s + "->" + link.child;
}

void write_changes(std::ostream& os, const Network& net, const ChangeReport& report) {
  os << "variable\tformalism\td_x\td_not_x\n";
  for (const auto& [name, change] : report.changes) {
    os << name << '\t' << formalism_keyword(net.at(name).formalism) << '\t'
       << change.pos.to_string() << '\t' << change.neg.to_string() << '\n';
  }
}

void write_explanation(std::ostream& os, const std::vector<LinkExplanation>& links) {
  os << "link\trule\tchild_outcome\tparent_outcome\tderivative\trelation\n";
  for (const auto& l : links) {
    const std::string label = link_label(*l.link);
    for (const auto& e : l.entries) {
      os << label << '\t' << l.rule << '\t' << e.child_outcome << '\t' << e.parent_outcome << '\t'
         << e.derivative.to_string() << '\t' << e.relation << '\n';
    }
  }
}

void write_containment(std::ostream& os, const ContainmentReport& report) {
  os << "variable\tformalism\tpredicted\tobserved\tverdict\n";
  for (const auto& r : report.rows) {
    os << r.variable << '\t' << formalism_keyword(r.formalism) << '\t' << r.predicted.pos.to_string()
       << '/' << r.predicted.neg.to_string() << '\t' << counts(r.observed[0]) << '/'
       << counts(r.observed[1]) << '\t' << verdict_name(r.verdict) << '\n';
  }
  std::ostringstream rate;
  rate << std::fixed << std::setprecision(4) << report.pass_rate;
  os << "# trials=" << report.trials << " completed=" << report.completed
     << " degenerate=" << report.degenerate << " infeasible=" << report.infeasible
     << " pass_rate=" << rate.str() << " result=" << (report.passed() ? "PASS" : "FAIL") << '\n';
}

void write_validation(std::ostream& os, const ValidationReport& report) {
  for (const auto& e : report.errors) os << "error: " << e << '\n';
  for (const auto& w : report.warnings) os << "warning: " << w << '\n';
}

}  // namespace qnet
