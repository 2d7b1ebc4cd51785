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


#include "nestmatch/parallel.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nm {
namespace {

struct Extent {
    std::uint32_t lx = 0, ly = 0, rounds = 0;
};

Extent extent_of(const Nest& nest) {
    if (nest.is_lattice()) return {nest.spec().lx, nest.spec().ly, nest.spec().rounds};
    Extent e;
    for (BallId b = 0; b < nest.num_balls(); b++) {
        Coords c = nest.coords(b);
        e.lx = std::max<std::uint32_t>(e.lx, c.x + 1);
        e.ly = std::max<std::uint32_t>(e.ly, c.y + 1);
        e.rounds = std::max<std::uint32_t>(e.rounds, c.t + 1);
    }
    return e;
}

bool within_neighborhood_of(std::uint32_t l, PatchId center, std::span<const PatchId> footprint) {
    const std::int64_t r0 = center / l, c0 = center % l;
    for (PatchId p : footprint) {
        std::int64_t r = p / l, c = p % l;
        if (std::abs(r - r0) > 1 || std::abs(c - c0) > 1) return false;
    }
    return true;
}

double item_load(const WorkItem& item, std::uint32_t l) {
    const auto& fp = item.footprint;
    if (within_neighborhood_of(l, item.root_patch, fp)) return static_cast<double>(item.cost + fp.size() - 1);
    PatchCoord owner{fp.front() / l, fp.front() % l};
    std::uint64_t comm = 0;
    for (PatchId p : fp) comm += PatchGrid::hops(owner, {p / l, p % l});
    return static_cast<double>((item.cost + comm) * fp.size());
}

}  // namespace

PatchGrid::PatchGrid(const GridConfig& config, std::uint32_t rounds, double t_q)
    : config_(config), rounds_(rounds), t_q_(t_q) {
    if (config.grid_l == 0) throw ConfigError("grid_l must be positive");
    if (!(t_q > 0)) throw ConfigError("T_q must be positive");
    patches_.resize(std::size_t{config.grid_l} * config.grid_l);
    for (PatchId id = 0; id < patches_.size(); id++) patches_[id].coord = coord_of(id);
    stall_until_.assign(patches_.size(), 0.0);
    round_load_.assign(std::size_t{rounds} + 1, 0.0);
    pending_.resize(std::size_t{rounds} + 1);
}

bool PatchGrid::within_neighborhood(PatchId center, std::span<const PatchId> footprint) const {
    return within_neighborhood_of(config_.grid_l, center, footprint);
}

std::uint32_t PatchGrid::hops(PatchCoord a, PatchCoord b) {
    auto d = [](std::uint32_t u, std::uint32_t v) { return u > v ? u - v : v - u; };
    return d(a.row, b.row) + d(a.col, b.col);
}

std::uint32_t PatchGrid::round_at(double tick) const {
    double r = std::floor(tick / t_q_);
    if (r >= rounds_) return rounds_;
    return r < 0 ? 0 : static_cast<std::uint32_t>(r);
}

void PatchGrid::occupy(PatchId p, double start, double end, bool own_work, PatchId owner) {
    Patch& patch = patches_[p];
    patch.clock = std::max(patch.clock, end);
    if (own_work) {
        patch.busy += end - start;
    } else {
        patch.stalled += end - start;
        patch.stalled_by = owner;
        stall_until_[p] = std::max(stall_until_[p], end);
    }
    for (std::uint32_t r = round_at(start); r <= round_at(end) && r < rounds_; r++) {
        double lo = std::max(start, r * t_q_), hi = std::min(end, (r + 1) * t_q_);
        if (hi > lo) round_load_[r] += hi - lo;
    }
}

Placement PatchGrid::run_spanning(const WorkItem& item, std::span<const PatchId> footprint, double ready) {
    Placement pl;
    pl.kind = ItemKind::Spanning;
    pl.owner = *std::min_element(footprint.begin(), footprint.end());
    pl.start = ready;
    std::uint64_t comm = 0;
    for (PatchId p : footprint) {
        pl.start = std::max(pl.start, patches_[p].clock);
        comm += hops(coord_of(pl.owner), coord_of(p));
    }
    pl.end = pl.start + static_cast<double>(item.cost + comm);
    pl.messages = comm;
    for (PatchId p : footprint) {
        if (p == pl.owner) continue;
        pl.stalled.push_back(p);
        occupy(p, pl.start, pl.end, false, pl.owner);
    }
    occupy(pl.owner, pl.start, pl.end, true, pl.owner);
    return pl;
}

Placement PatchGrid::resolve_spanning_tree(const WorkItem& item) {
    return run_spanning(item, item.footprint, item.ready_round * t_q_);
}

bool PatchGrid::repair_inconsistency(const WorkItem& item, Placement& pl) {
    std::vector<PatchId> conflicts;
    double detected = pl.start;
    for (VertexId v : item.vertices) {
        if (v >= last_edit_.size()) continue;
        const Edit& e = last_edit_[v];
        if (e.owner == pl.owner || e.end <= pl.start) continue;
        conflicts.push_back(e.owner);
        detected = std::max(detected, e.end + hops(coord_of(e.owner), coord_of(pl.owner)));
    }
    if (conflicts.empty()) return false;
    std::sort(conflicts.begin(), conflicts.end());
    conflicts.erase(std::unique(conflicts.begin(), conflicts.end()), conflicts.end());

    std::vector<PatchId> merged = item.footprint;
    merged.insert(merged.end(), conflicts.begin(), conflicts.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    if (!within_neighborhood(pl.owner, merged)) {
        pl = run_spanning(item, merged, pl.start);
        pl.repaired = true;
        return true;
    }
    // Dissolve and re-match at the middle patch once the conflicting edit is known.
    const double cost = pl.end - pl.start;
    pl.start = detected;
    pl.end = detected + cost;
    pl.messages += conflicts.size();
    pl.repaired = true;
    for (PatchId q : conflicts) {
        double from = std::max(patches_[q].clock, pl.start);
        if (pl.end > from) occupy(q, from, pl.end, false, pl.owner);
        pl.stalled.push_back(q);
    }
    return true;
}

Placement PatchGrid::schedule(const WorkItem& item) {
    const double ready = item.ready_round * t_q_;
    Placement pl;
    if (within_neighborhood(item.root_patch, item.footprint)) {
        pl.owner = item.root_patch;
        pl.kind = item.footprint.size() == 1 ? ItemKind::Local : ItemKind::Neighborhood;
        pl.messages = item.footprint.size() - 1;
        pl.start = std::max(ready, patches_[pl.owner].clock);
        pl.end = pl.start + static_cast<double>(item.cost + pl.messages);
        repair_inconsistency(item, pl);
        if (pl.kind != ItemKind::Spanning) occupy(pl.owner, pl.start, pl.end, true, pl.owner);
    } else {
        pl = resolve_spanning_tree(item);
    }
    patches_[pl.owner].queued++;

    VertexId top = 0;
    for (VertexId v : item.vertices) top = std::max(top, v + 1);
    if (top > last_edit_.size()) last_edit_.resize(top, Edit{0, -1, 0});
    for (VertexId v : item.vertices) last_edit_[v] = Edit{pl.owner, pl.end, item.index};

    RoundMetrics& m = pending_[round_at(pl.start)];
    m.messages += pl.messages;
    m.stalls += pl.stalled.size();
    m.repairs += pl.repaired ? 1 : 0;
    if (item.min_round + config_.history_window < item.ready_round) pending_[item.ready_round].spills++;
    return pl;
}

RoundMetrics PatchGrid::account_round(std::uint32_t round, std::uint64_t events) {
    RoundMetrics m = round < pending_.size() ? pending_[round] : RoundMetrics{};
    m.round = round;
    m.events = events;
    const double global = (round + 1.0) * t_q_;
    double sum = 0;
    m.max_backlog = 0;
    for (Patch& p : patches_) {
        double backlog = std::max(0.0, p.clock - global);
        sum += backlog;
        m.max_backlog = std::max(m.max_backlog, backlog);
        if (backlog == 0) p.state = PatchState::Idle;
        else p.state = stall_until_[&p - patches_.data()] > global ? PatchState::Stalled : PatchState::Busy;
    }
    m.mean_backlog = sum / static_cast<double>(patches_.size());
    double load = round < rounds_ ? round_load_[round] : 0.0;
    m.idle_fraction = 1.0 - std::min(1.0, load / (t_q_ * static_cast<double>(patches_.size())));
    return m;
}

double PatchGrid::finish_algorithm() const {
    double last = 0;
    for (const Patch& p : patches_) last = std::max(last, p.clock);
    return std::max(0.0, last - rounds_ * t_q_);
}

double PatchGrid::idle_fraction() const {
    if (rounds_ == 0) return 1.0;
    double load = 0;
    for (std::uint32_t r = 0; r < rounds_; r++) load += round_load_[r];
    return 1.0 - load / (t_q_ * rounds_ * static_cast<double>(patches_.size()));
}

std::uint32_t patch_side(const Nest& nest, const GridConfig& config) {
    auto side = static_cast<std::uint32_t>(std::llround(std::sqrt(static_cast<double>(config.patch_n))));
    if (config.patch_n == 0 || side * side != config.patch_n)
        throw ConfigError("patch_n must be a positive perfect square");
    if (config.grid_l == 0) throw ConfigError("grid_l must be positive");
    Extent e = extent_of(nest);
    if (e.lx != config.grid_l * side || e.ly != config.grid_l * side)
        throw ConfigError("patch grid does not tile the nest: need " + std::to_string(config.grid_l * side) +
                          " x " + std::to_string(config.grid_l * side) + " balls per round, nest has " +
                          std::to_string(e.lx) + " x " + std::to_string(e.ly));
    return side;
}

std::vector<WorkItem> trace_work(const Nest& nest, std::span<const DetectionEvent> events, const GridConfig& config,
                                 Matching* matching) {
    const std::uint32_t side = patch_side(nest, config);
    const std::uint32_t last_round = std::max<std::uint32_t>(extent_of(nest).rounds, 1) - 1;
    auto patch_of = [&](BallId b) {
        Coords c = nest.coords(b);
        return static_cast<PatchId>((c.y / side) * config.grid_l + c.x / side);
    };

    std::vector<WorkItem> items;
    MatcherOptions options;
    options.on_phase = [&](const PhaseTrace& trace) {
        WorkItem item;
        item.index = items.size();
        item.vertices = trace.vertices;
        item.cost = trace.ops;
        item.root_patch = patch_of(events[trace.root].ball);
        std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 0;
        auto touch = [&](BallId b) {
            if (b == kBoundaryBall) return;
            item.footprint.push_back(patch_of(b));
            std::int64_t t = nest.coords(b).t;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        };
        for (VertexId v : trace.vertices) touch(events[v].ball);
        for (BallId b : trace.region_balls) touch(b);
        std::sort(item.footprint.begin(), item.footprint.end());
        item.footprint.erase(std::unique(item.footprint.begin(), item.footprint.end()), item.footprint.end());
        item.min_round = static_cast<std::uint32_t>(std::min<std::int64_t>(lo, last_round));
        item.ready_round = static_cast<std::uint32_t>(std::min<std::int64_t>(hi, last_round));
        items.push_back(std::move(item));
    };
    MatchResult result = match_all(nest, events, options);
    if (matching) *matching = std::move(result.matching);
    return items;
}

double mean_patch_load(std::span<const WorkItem> items, std::size_t num_patches, std::uint32_t rounds) {
    if (num_patches == 0 || rounds == 0) return 0;
    auto l = static_cast<std::uint32_t>(std::llround(std::sqrt(static_cast<double>(num_patches))));
    double load = 0;
    for (const WorkItem& item : items) load += item_load(item, l);
    return load / (static_cast<double>(num_patches) * rounds);
}

ParallelResult run_parallel(const Nest& nest, std::span<const DetectionEvent> events, const GridConfig& config,
                            std::uint64_t seed) {
    patch_side(nest, config);
    if (!(config.tq_ratio > 0)) throw ConfigError("tq_ratio must be positive");
    if (!std::is_sorted(events.begin(), events.end(),
                        [](const DetectionEvent& a, const DetectionEvent& b) { return a.round < b.round; }))
        throw ConfigError("event stream must be ordered by round");
    const std::uint32_t rounds = extent_of(nest).rounds;
    const std::size_t num_patches = std::size_t{config.grid_l} * config.grid_l;

    ParallelResult out;
    std::vector<WorkItem> items = trace_work(nest, events, config, &out.matching);

    if (config.t_c) {
        out.t_c = *config.t_c;
    } else if (nest.is_lattice() && config.warmup_rounds > 0) {
        LatticeSpec spec = nest.spec();
        spec.rounds = std::min(config.warmup_rounds, rounds);
        Nest warm = Nest::lattice(spec);
        auto warm_events = detection_events(warm, sample_errors(warm, derive_seed(seed, 0)));
        auto warm_items = trace_work(warm, warm_events, config);
        out.t_c = mean_patch_load(warm_items, num_patches, spec.rounds);
    } else {
        out.t_c = mean_patch_load(items, num_patches, rounds);
    }
    if (!(out.t_c > 0)) out.t_c = 1.0;
    out.t_q = config.tq_ratio * out.t_c;

    std::vector<std::uint64_t> per_round(rounds, 0);
    for (const DetectionEvent& e : events)
        if (e.round >= 0 && static_cast<std::uint32_t>(e.round) < rounds) per_round[e.round]++;

    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); i++) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return items[a].ready_round < items[b].ready_round; });

    PatchGrid grid(config, rounds, out.t_q);
    std::size_t next = 0;
    out.metrics.reserve(rounds);
    for (std::uint32_t r = 0; r < rounds; r++) {
        for (; next < order.size() && items[order[next]].ready_round == r; next++) {
            Placement pl = grid.schedule(items[order[next]]);
            switch (pl.kind) {
                case ItemKind::Local: out.local_items++; break;
                case ItemKind::Neighborhood: out.neighborhood_items++; break;
                case ItemKind::Spanning: out.spanning_items++; break;
            }
            out.repairs += pl.repaired ? 1 : 0;
        }
        out.metrics.push_back(grid.account_round(r, per_round[r]));
    }
    out.drain_time = grid.finish_algorithm();
    out.idle_fraction = grid.idle_fraction();
    return out;
}

std::vector<DetectionEvent> inject_burst(const Nest& nest, std::span<const DetectionEvent> events,
                                         std::uint32_t first, std::uint32_t width, double p, std::uint64_t seed) {
    if (!nest.is_lattice()) throw ConfigError("bursts need a lattice nest");
    if (width == 0 || first + width > nest.spec().rounds) throw ConfigError("burst rounds outside the nest");
    LatticeSpec spec = nest.spec();
    spec.rounds = width;
    std::erase_if(spec.stick_classes, [](const StickClass& c) { return c.kind == "time_boundary"; });
    Nest window = Nest::lattice(spec);
    std::vector<DetectionEvent> extra;
    for (const DetectionEvent& e : detection_events(window, sample_errors_uniform(window, p, seed))) {
        Coords c = window.coords(e.ball);
        extra.push_back({*nest.ball_at(c.x, c.y, c.t + first), static_cast<std::int32_t>(c.t + first)});
    }
    auto by_ball = [](const DetectionEvent& a, const DetectionEvent& b) { return a.ball < b.ball; };
    std::vector<DetectionEvent> base(events.begin(), events.end());
    std::sort(base.begin(), base.end(), by_ball);
    std::vector<DetectionEvent> merged;
    std::set_symmetric_difference(base.begin(), base.end(), extra.begin(), extra.end(), std::back_inserter(merged),
                                  by_ball);
    return merged;
}

std::optional<std::uint32_t> catch_up_rounds(std::span<const RoundMetrics> metrics, std::uint32_t first,
                                             std::uint32_t width) {
    double baseline = 0;
    for (std::uint32_t r = 0; r < first && r < metrics.size(); r++)
        baseline = std::max(baseline, metrics[r].mean_backlog);
    for (std::size_t r = first + width; r < metrics.size(); r++)
        if (metrics[r].mean_backlog <= baseline) return static_cast<std::uint32_t>(r - (first + width));
    return std::nullopt;
}

}  // namespace nm
