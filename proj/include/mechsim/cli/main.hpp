#pragma once

#include <iosfwd>

namespace mechsim::cli {

/// Entry point of the `mechsim` tool. Exit status: 0 ok, 1 failed computation
/// or verification, 2 usage or configuration error.
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mechsim::cli
