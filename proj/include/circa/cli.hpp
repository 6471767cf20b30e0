#pragma once

#include <ostream>

namespace circa {

// Entry point for the `circa` tool: simulate, graph, analyze, evaluate.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace circa
