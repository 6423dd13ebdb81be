#pragma once

#include <iosfwd>
#include <string>

namespace vnw::cli {

// Exit codes of the command-line tool.
inline constexpr int exit_ok = 0;
inline constexpr int exit_numeric_failure = 1;
inline constexpr int exit_usage = 2;

// Runs one subcommand (potential, wavefunction, verify, classify, sweep).
// Results go to --out when given, otherwise to `out`; diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// printf %.{precision}g, the text form used in every CSV and JSON output.
std::string format_number(double value, int precision);

}  // namespace vnw::cli
