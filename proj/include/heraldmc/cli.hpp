#pragma once

#include <string>
#include <vector>

namespace heraldmc::cli {

// argv-style entry point. Exit codes: 0 ok, 2 usage/config error,
// 3 runtime/model error.
int run_main(int argc, const char* const* argv);

// Convenience for in-process tests; `args` excludes the program name.
int run_main(const std::vector<std::string>& args);

}  // namespace heraldmc::cli
