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

#ifndef NESTMATCH_KERNELS_H
#define NESTMATCH_KERNELS_H

#include <cstdint>
#include <vector>

#include "nestmatch/matcher.h"
#include "nestmatch/nest.h"

namespace nm {

/// counts[s] = number of connected highlighted-stick components with s sticks, summed over
/// all trials. counts[0] is always 0.
using ClusterCounts = std::vector<std::uint64_t>;

/// Component sizes of one highlight set. Two highlighted sticks are connected when they share
/// a ball; the boundary joins nothing.
std::vector<std::uint32_t> cluster_sizes(const Nest& nest, const ErrorSample& sample);

/// Histogram over `trials` independent samples, trial i seeded with derive_seed(seed, i)
/// and every stick highlighted with probability p. The serial and OpenMP versions return
/// identical results.
ClusterCounts cluster_histogram_serial(const Nest& nest, double p, std::uint64_t trials, std::uint64_t seed);
ClusterCounts cluster_histogram_parallel(const Nest& nest, double p, std::uint64_t trials, std::uint64_t seed);

/// One independent matching problem.
struct Instance {
    std::vector<DetectionEvent> events;
};

/// Solves every instance with match_all. The OpenMP version distributes instances over
/// threads; the output order and contents match the serial version.
std::vector<MatchResult> match_batch_serial(const Nest& nest, const std::vector<Instance>& instances,
                                            const MatcherOptions& options = {});
std::vector<MatchResult> match_batch_parallel(const Nest& nest, const std::vector<Instance>& instances,
                                              const MatcherOptions& options = {});

}  // namespace nm

#endif  // NESTMATCH_KERNELS_H
