// Copyright 2026 nestmatch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef NESTMATCH_CLI_H
#define NESTMATCH_CLI_H

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nestmatch/nest.h"

namespace nm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInvariant = 2;

/// Everything a run depends on. Written next to the outputs so the run can be repeated.
struct RunConfig {
    LatticeSpec lattice;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string events_path;
    std::string matching_path;
    std::string duals_path;
    // parallel-sim
    std::uint32_t grid_l = 8;
    std::uint32_t patch_n = 16;
    std::uint32_t history_window = 64;
    std::optional<std::uint32_t> burst_round;
    std::uint32_t burst_width = 1;
    double burst_p = 0.02;
    std::size_t certify_limit = 500;
    // analyze
    double p = 0.001;
    std::uint64_t trials = 10000;
    // bench
    std::vector<std::uint32_t> sizes{10, 20, 40, 80};
    std::uint64_t min_events = 20000;
    std::vector<std::uint32_t> dense_sizes;
};

int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_match(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);
int cmd_parallel_sim(const RunConfig& config, std::ostream& log);
int cmd_analyze(const RunConfig& config, std::ostream& log);
int cmd_bench(const RunConfig& config, std::ostream& log);

/// Parses the command line and dispatches to a subcommand. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace nm

#endif  // NESTMATCH_CLI_H
