#pragma once

#include <iosfwd>

namespace codegraph::service {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBuild = 3;

// Entry point of the cgraph tool: build | chat | query | serve | eval.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace codegraph::service
