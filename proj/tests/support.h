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


// Shared instance generators for the test suites.

#ifndef NESTMATCH_TESTS_SUPPORT_H
#define NESTMATCH_TESTS_SUPPORT_H

#include <algorithm>
#include <cstdint>
#include <vector>

#include "nestmatch/nest.h"

namespace nm::testing {

/// Lattice side giving roughly eight detection events per sample at probability p.
inline std::uint32_t small_side(double p) {
    if (p <= 0.002) return 10;
    if (p <= 0.007) return 6;
    return 5;
}

/// Events of one sample, keeping at most `max_events` of the lowest ball ids. Any subset of
/// detection events is itself a valid matching problem, since the boundary absorbs parity.
inline std::vector<DetectionEvent> small_events(const Nest& nest, std::uint64_t seed, std::size_t max_events = 12) {
    std::vector<DetectionEvent> events = detection_events(nest, sample_errors(nest, seed));
    if (events.size() > max_events) events.resize(max_events);
    return events;
}

/// Events packed into a small block so that trees grow, blossoms nest and expand.
inline std::vector<DetectionEvent> crowded_events(const Nest& nest, std::uint64_t seed, std::size_t count) {
    std::vector<BallId> balls;
    std::uint64_t state = seed;
    const std::size_t lx = nest.spec().lx, ly = nest.spec().ly, rounds = nest.spec().rounds;
    const std::size_t side = 3;
    while (balls.size() < count) {
        state = derive_seed(state, balls.size());
        std::size_t x = lx / 2 - 1 + state % side, y = ly / 2 - 1 + (state >> 8) % side,
                    t = rounds / 2 - 1 + (state >> 16) % side;
        BallId b = *nest.ball_at(x, y, t);
        if (std::find(balls.begin(), balls.end(), b) == balls.end()) balls.push_back(b);
    }
    std::sort(balls.begin(), balls.end());
    std::vector<DetectionEvent> events;
    for (BallId b : balls) events.push_back({b, nest.coords(b).t});
    return events;
}

inline std::vector<DetectionEvent> vertex_events(std::size_t n) {
    std::vector<DetectionEvent> events;
    for (std::size_t i = 0; i < n; i++) events.push_back({static_cast<BallId>(i), 0});
    return events;
}

}  // namespace nm::testing

#endif  // NESTMATCH_TESTS_SUPPORT_H
