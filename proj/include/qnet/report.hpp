#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qnet/network.hpp"
#include "qnet/oracle.hpp"

// Deterministic tab-separated output, LF line endings.

namespace qnet {

/// Link label such as "d&s->a".
std::string link_label(const Link& link);

/// Header `variable formalism d_x d_not_x`, one row per variable by name.
void write_changes(std::ostream& os, const Network& net, const ChangeReport& report);

/// One row per derivative entry, grouped by link in child order.
void write_explanation(std::ostream& os, const std::vector<LinkExplanation>& links);

/// Per-variable verdicts followed by a `#` summary line.
void write_containment(std::ostream& os, const ContainmentReport& report);

/// "error: ..." / "warning: ..." lines, errors first.
void write_validation(std::ostream& os, const ValidationReport& report);

}  // namespace qnet
