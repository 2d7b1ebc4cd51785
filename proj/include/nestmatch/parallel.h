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


#ifndef NESTMATCH_PARALLEL_H
#define NESTMATCH_PARALLEL_H

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nestmatch/matcher.h"
#include "nestmatch/nest.h"

namespace nm {

using PatchId = std::uint32_t;

struct GridConfig {
    std::uint32_t grid_l = 8;          // patches per side
    std::uint32_t patch_n = 16;        // balls per patch per round; must be a perfect square
    std::uint32_t history_window = 64; // rounds of history held locally
    double tq_ratio = 2.0;             // T_q / T_c
    /// Fixed T_c in ticks. When unset, T_c is calibrated from a warm-up run.
    std::optional<double> t_c;
    std::uint32_t warmup_rounds = 500;
};

class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

struct PatchCoord {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    bool operator==(const PatchCoord&) const = default;
};

enum class PatchState : std::uint8_t { Idle, Busy, Stalled };

struct Patch {
    PatchCoord coord;
    double clock = 0;          // local time at which all accepted work is done
    PatchState state = PatchState::Idle;
    PatchId stalled_by = 0;    // meaningful while Stalled
    std::uint64_t queued = 0;  // work items accepted so far
    double busy = 0;           // ticks spent on own work
    double stalled = 0;        // ticks spent waiting for another owner
};

/// One alternating tree of the serial schedule, replayed as a unit of patch work.
struct WorkItem {
    std::uint64_t index = 0;
    std::vector<VertexId> vertices;
    std::vector<PatchId> footprint;  // sorted, unique; always contains root_patch
    PatchId root_patch = 0;
    std::uint64_t cost = 0;          // primitive operations, one tick each
    std::uint32_t ready_round = 0;   // last round whose data the tree reads
    std::uint32_t min_round = 0;     // earliest round the tree reads
};

enum class ItemKind : std::uint8_t { Local, Neighborhood, Spanning };

struct Placement {
    ItemKind kind = ItemKind::Local;
    PatchId owner = 0;
    double start = 0;
    double end = 0;
    std::vector<PatchId> stalled;
    std::uint64_t messages = 0;
    bool repaired = false;
};

struct RoundMetrics {
    std::uint32_t round = 0;
    std::uint64_t events = 0;
    double mean_backlog = 0;
    double max_backlog = 0;
    std::uint64_t stalls = 0;
    std::uint64_t messages = 0;
    std::uint64_t repairs = 0;
    std::uint64_t spills = 0;
    double idle_fraction = 1;
};

/// The L x L array of patch processors and its clocks.
///
/// Time is measured in ticks. Round r occupies [r T_q, (r + 1) T_q). Work items are
/// accepted in (ready round, index) order; a patch runs its items back to back.
class PatchGrid {
   public:
    PatchGrid(const GridConfig& config, std::uint32_t rounds, double t_q);

    std::uint32_t side() const { return config_.grid_l; }
    std::size_t num_patches() const { return patches_.size(); }
    const Patch& patch(PatchId id) const { return patches_[id]; }
    PatchId id_of(PatchCoord c) const { return c.row * config_.grid_l + c.col; }
    PatchCoord coord_of(PatchId id) const { return {id / config_.grid_l, id % config_.grid_l}; }
    double t_q() const { return t_q_; }

    /// True when every footprint patch lies in the 3 x 3 block centred on `center`.
    bool within_neighborhood(PatchId center, std::span<const PatchId> footprint) const;
    static std::uint32_t hops(PatchCoord a, PatchCoord b);

    /// Places one item, resolving ownership and conflicts, and records its effects.
    Placement schedule(const WorkItem& item);

    /// Gives a tree that leaves the 3 x 3 block to the lowest (row, col) footprint patch and
    /// stalls the rest until it finishes. Remote accesses cost their hop distance.
    Placement resolve_spanning_tree(const WorkItem& item);

    /// Dissolves matches that conflict with concurrent edits by other owners. The events
    /// are re-matched by the item's owner and the conflicting patches stall meanwhile.
    /// Returns true when anything conflicted.
    bool repair_inconsistency(const WorkItem& item, Placement& placement);

    /// Closes round r and reports its metrics.
    RoundMetrics account_round(std::uint32_t round, std::uint64_t events);

    /// Ticks needed after the last round until every patch is idle.
    double finish_algorithm() const;

    /// Fraction of patch time spent idle by choice over the simulated rounds.
    double idle_fraction() const;

   private:
    struct Edit {
        PatchId owner;
        double end;
        std::uint64_t item;
    };

    void occupy(PatchId p, double start, double end, bool own_work, PatchId owner);
    std::uint32_t round_at(double tick) const;
    Placement run_spanning(const WorkItem& item, std::span<const PatchId> footprint, double ready);

    GridConfig config_;
    std::uint32_t rounds_;
    double t_q_;
    std::vector<Patch> patches_;
    std::vector<double> stall_until_;
    std::vector<double> round_load_;  // patch ticks of busy or stalled time per round
    std::vector<RoundMetrics> pending_;
    std::vector<Edit> last_edit_;     // by vertex
};

struct ParallelResult {
    Matching matching;
    std::vector<RoundMetrics> metrics;
    double t_c = 0;
    double t_q = 0;
    double drain_time = 0;
    double idle_fraction = 0;
    std::uint64_t local_items = 0;
    std::uint64_t neighborhood_items = 0;
    std::uint64_t spanning_items = 0;
    std::uint64_t repairs = 0;
};

/// Side of a patch in balls, or ConfigError when patch_n is not a perfect square or the
/// grid does not tile the nest's spatial extent.
std::uint32_t patch_side(const Nest& nest, const GridConfig& config);

/// Work items of the serial schedule for `events`, in phase order, plus the matching.
std::vector<WorkItem> trace_work(const Nest& nest, std::span<const DetectionEvent> events,
                                 const GridConfig& config, Matching* matching = nullptr);

/// Mean work per patch per round of a work list, in ticks.
double mean_patch_load(std::span<const WorkItem> items, std::size_t num_patches, std::uint32_t rounds);

/// Simulates the patch grid decoding `events` round by round. The matching is the serial
/// match_all result; only its cost accounting differs.
ParallelResult run_parallel(const Nest& nest, std::span<const DetectionEvent> events, const GridConfig& config,
                            std::uint64_t seed);

/// Adds the syndrome of a dense error burst covering rounds [first, first + width).
std::vector<DetectionEvent> inject_burst(const Nest& nest, std::span<const DetectionEvent> events,
                                         std::uint32_t first, std::uint32_t width, double p, std::uint64_t seed);

/// Rounds after the burst until the mean backlog is back under the largest value seen
/// before it; nullopt if that never happens.
std::optional<std::uint32_t> catch_up_rounds(std::span<const RoundMetrics> metrics, std::uint32_t first,
                                             std::uint32_t width);

}  // namespace nm

#endif  // NESTMATCH_PARALLEL_H
