#pragma once

#include <array>
#include <iosfwd>
#include <string_view>

#include "vertexcalc/branch_arith.hpp"

namespace vertexcalc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

// "a+bi", "-0.5i", "2"; "mag@k" or "a+bi@k" rotates the principal value by k half-turns.
LogPoint parse_point(std::string_view text);
cplx parse_complex(std::string_view text);
// "a,b,c"
std::array<double, 3> parse_momenta(std::string_view text);

// Runs one subcommand; the JSON report goes to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vertexcalc::cli
