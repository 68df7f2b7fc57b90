#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/network.hpp"

namespace qnet {

/// Parses `VAR=SIGN[,VAR=SIGN...]`, where `VAR:neg=SIGN` fixes the negative
/// outcome. Throws std::invalid_argument on malformed text.
Evidence parse_evidence(std::string_view text);

/// Runs one command line (without the program name). Returns 0 on success, 1
/// on a validation, propagation or verification failure and 2 on a usage
/// error. `interactive` only controls the REPL prompt.
int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                std::ostream& err, bool interactive = false);

}  // namespace qnet
