#pragma once

// Batch experiment runner. Subcommands: count, units, zeta, elemsum, bound, curves, pep,
// simulate, mac, check. Series go to CSV, fitted summaries to JSON; both start with a header
// carrying the tool version, the full config and the master seed.

#include <iosfwd>
#include <string>
#include <vector>

namespace stc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitBudget = 2;

/// `args` excludes the program name. With --out STEM the results go to STEM.csv and STEM.json,
/// otherwise the CSV and then the JSON document are written to `out`. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace stc::cli
