#pragma once

#include <ostream>

namespace jumpldp {

// Entry point of the jumpldp command. Returns 0 on success, 2 on invalid
// input and 3 on numeric failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jumpldp
