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

#ifndef NESTMATCH_SHORTEST_PATHS_H
#define NESTMATCH_SHORTEST_PATHS_H

#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "nestmatch/nest.h"

namespace nm {

/// Resumable single-source Dijkstra over the balls of a nest.
///
/// Balls are settled lazily in nondecreasing distance order (ties by ball id), so the
/// settled prefix at any moment is exactly the set of balls inside some radius. The
/// boundary is a sink: it is settled like a ball but never relaxed out of, so no path
/// passes through it.
class DijkstraSearch {
   public:
    struct Settled {
        BallId ball;
        double dist;
    };

    DijkstraSearch(const Nest& nest, BallId source);

    const std::vector<Settled>& settled() const { return settled_; }

    /// Distance of the next ball to be settled; +inf when exhausted.
    double frontier() const;

    /// Settles one more ball. Returns false when nothing reachable is left.
    bool settle_next();

    /// Settles every ball at distance <= radius.
    void expand_to(double radius);

    /// Distance to `target`, settling as far as needed. nullopt if unreachable.
    std::optional<double> distance_to(BallId target);

    /// Distance to `target` if it is already settled.
    std::optional<double> settled_distance(BallId target) const;

    std::size_t footprint() const { return settled_.size() + best_.size(); }

   private:
    struct Entry {
        double dist;
        BallId ball;
        bool operator>(const Entry& o) const { return dist != o.dist ? dist > o.dist : ball > o.ball; }
    };
    struct Label {
        double dist;
        bool settled;
    };

    void drop_stale();

    const Nest* nest_;
    std::vector<Settled> settled_;
    absl::flat_hash_map<BallId, Label> best_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
};

/// Per-problem memo of shortest-path searches. Never shared across problems; the nest
/// itself stays immutable.
class PathWeights {
   public:
    explicit PathWeights(const Nest& nest) : nest_(&nest) {}

    /// Minimum-weight stick path from ball `a` to ball `b` (or to the boundary when
    /// b == kBoundaryBall). nullopt when no path exists.
    std::optional<double> path_weight(BallId a, BallId b);

    DijkstraSearch& search_from(BallId a);

    const Nest& nest() const { return *nest_; }

   private:
    const Nest* nest_;
    absl::flat_hash_map<BallId, std::unique_ptr<DijkstraSearch>> searches_;
};

}  // namespace nm

#endif  // NESTMATCH_SHORTEST_PATHS_H
