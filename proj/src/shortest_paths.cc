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

#include "nestmatch/shortest_paths.h"

#include <limits>
#include <stdexcept>

namespace nm {

DijkstraSearch::DijkstraSearch(const Nest& nest, BallId source) : nest_(&nest) {
    if (source >= nest.num_balls()) throw std::out_of_range("search source is not a ball of the nest");
    best_.reserve(64);
    settled_.reserve(16);
    best_.emplace(source, Label{0.0, false});
    heap_.push({0.0, source});
}

void DijkstraSearch::drop_stale() {
    while (!heap_.empty()) {
        const Entry& top = heap_.top();
        const Label& label = best_.find(top.ball)->second;
        if (!label.settled && label.dist == top.dist) return;
        heap_.pop();
    }
}

double DijkstraSearch::frontier() const {
    const_cast<DijkstraSearch*>(this)->drop_stale();
    return heap_.empty() ? std::numeric_limits<double>::infinity() : heap_.top().dist;
}

bool DijkstraSearch::settle_next() {
    drop_stale();
    if (heap_.empty()) return false;
    Entry top = heap_.top();
    heap_.pop();
    best_[top.ball].settled = true;
    settled_.push_back({top.ball, top.dist});
    if (top.ball == kBoundaryBall) return true;
    nest_->for_each_incident(top.ball, [&](StickId, BallId other, double w) {
        double d = top.dist + w;
        auto [it, inserted] = best_.try_emplace(other, Label{d, false});
        if (!inserted) {
            if (it->second.settled || it->second.dist <= d) return;
            it->second.dist = d;
        }
        heap_.push({d, other});
    });
    return true;
}

void DijkstraSearch::expand_to(double radius) {
    while (frontier() <= radius) settle_next();
}

std::optional<double> DijkstraSearch::distance_to(BallId target) {
    while (true) {
        if (auto d = settled_distance(target)) return d;
        if (!settle_next()) return std::nullopt;
    }
}

std::optional<double> DijkstraSearch::settled_distance(BallId target) const {
    auto it = best_.find(target);
    if (it == best_.end() || !it->second.settled) return std::nullopt;
    return it->second.dist;
}

DijkstraSearch& PathWeights::search_from(BallId a) {
    auto& slot = searches_[a];
    if (!slot) slot = std::make_unique<DijkstraSearch>(*nest_, a);
    return *slot;
}

std::optional<double> PathWeights::path_weight(BallId a, BallId b) {
    if (a == b) return 0.0;
    return search_from(a).distance_to(b);
}

}  // namespace nm
