// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bhfr::cli {

inline constexpr const char* kVersion = "0.3.0";

/// Runs one command line (args[0] is the program name) and returns the exit
/// code: 0 ok, 2 usage, 3 config, 4 data, 5 comparison. Errors are printed to
/// `err` as a single "error[<kind>]: <reason>" line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace bhfr::cli
