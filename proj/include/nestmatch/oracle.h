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

#ifndef NESTMATCH_ORACLE_H
#define NESTMATCH_ORACLE_H

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nestmatch/matcher.h"
#include "nestmatch/nest.h"

namespace nm {

/// Explicit complete graph over a set of events: pairwise path weights plus the weight of
/// each event's cheapest boundary connection. Unreachable entries are +inf.
struct EventMetric {
    std::vector<std::vector<double>> pair;
    std::vector<double> boundary;

    std::size_t size() const { return boundary.size(); }
};

EventMetric build_metric(const Nest& nest, std::span<const DetectionEvent> events);

/// Largest instance brute_force_mwpm accepts.
inline constexpr std::size_t kBruteForceLimit = 20;

/// Exhaustive minimum-weight perfect matching with boundary. Memoized over subsets of
/// still-unmatched events; ties go to the lexicographically smallest pair list, where a
/// boundary match sorts before any pairing. Throws std::invalid_argument above the limit.
Matching brute_force_mwpm(const EventMetric& metric);

struct Certificate {
    double primal = 0;
    double dual = 0;
    double gap = 0;
    bool perfect = true;           // condition 1: every event matched exactly once
    bool odd_set_cover = true;     // condition 2 on singletons and on every listed set
    bool nonnegative = true;       // condition 3: y_S >= 0
    bool edge_constraints = true;  // condition 4: covering duals never exceed w_e
    bool laminar = true;           // listed sets are odd and pairwise nested or disjoint
    bool matched_tight = true;     // x_e = 1 implies the edge is tight
    bool set_slackness = true;     // y_S > eps implies exactly one matched hair edge
    bool weights_consistent = true;
    bool valid = true;
    std::vector<std::string> diagnostics;
};

/// Verifies the primal-dual pair against the explicit edge set of `metric`. Every violated
/// condition is flagged and described; `valid` also requires |gap| <= n * eps.
Certificate check_certificate(const Matching& matching, const DualState& duals, const EventMetric& metric,
                              double eps);

Certificate check_certificate(const Matching& matching, const DualState& duals, const Nest& nest,
                              std::span<const DetectionEvent> events);

struct TriangleReport {
    std::size_t checked = 0;
    std::vector<std::array<BallId, 3>> violations;  // (i, j, k) with w_ik > w_ij + w_jk + eps

    bool ok() const { return violations.empty(); }
};

/// Checks w_ik <= w_ij + w_jk + eps on explicit triples.
TriangleReport check_triangle(const Nest& nest, std::span<const std::array<BallId, 3>> triples);

/// Checks `count` uniformly sampled ball triples.
TriangleReport check_triangle(const Nest& nest, std::size_t count, std::uint64_t seed);

}  // namespace nm

#endif  // NESTMATCH_ORACLE_H
