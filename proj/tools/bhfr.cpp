// SPDX-License-Identifier: Apache-2.0
#include "bhfr/cli.hpp"

int main(int argc, char** argv) { return bhfr::cli::main(argc, argv); }
