#pragma once

#include <ostream>

namespace qaoalab {

inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

/// Entry point of the qaoalab command. Results go to `out`; failures are reported on
/// `err` as one JSON object and mapped to exit codes 2 (configuration), 3 (numerics)
/// and 4 (I/O).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qaoalab
