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

#ifndef NESTMATCH_MATCHER_H
#define NESTMATCH_MATCHER_H

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/inlined_vector.h"
#include "nestmatch/ball_table.h"
#include "nestmatch/nest.h"
#include "nestmatch/shortest_paths.h"

namespace nm {

using VertexId = std::uint32_t;
using NodeId = std::uint32_t;

/// The boundary vertex v0. It never joins a tree and carries no dual variable.
inline constexpr VertexId kBoundaryVertex = std::numeric_limits<VertexId>::max();
inline constexpr VertexId kNoVertex = kBoundaryVertex - 1;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Blossom node ids carry this bit; vertex node ids equal their vertex id.
inline constexpr NodeId kBlossomBit = NodeId{1} << 31;
inline bool is_blossom(NodeId id) { return id != kNoNode && (id & kBlossomBit) != 0; }

struct MatchedEdge {
    VertexId a = 0;
    VertexId b = 0;  // kBoundaryVertex for a boundary match
    double weight = 0;
    bool operator==(const MatchedEdge&) const = default;
};

struct Matching {
    std::vector<MatchedEdge> pairs;            // a < b, sorted by a
    std::vector<MatchedEdge> boundary_matches;  // b == kBoundaryVertex, sorted by a
    double total_weight = 0;

    /// mate[v] for every vertex: partner vertex, kBoundaryVertex or kNoVertex.
    std::vector<VertexId> mates(std::size_t num_vertices) const;
    bool operator==(const Matching&) const = default;
};

/// One odd set S of the dual with its variable y_S.
struct DualSet {
    std::vector<VertexId> members;  // sorted
    double y = 0;
};

struct DualState {
    std::vector<double> singleton_y;
    std::vector<DualSet> blossoms;

    double objective() const;
};

struct BlossomInfo {
    NodeId id = kNoNode;
    std::vector<NodeId> children;  // odd cycle, children[0] holds the base vertex
    NodeId parent = kNoNode;
    double y = 0;
};

struct BlossomForest {
    std::vector<BlossomInfo> blossoms;  // live blossoms only, by id
};

struct MatcherStats {
    std::uint64_t phases = 0;
    std::uint64_t dual_adjusts = 0;
    std::uint64_t grows = 0;
    std::uint64_t blossoms_made = 0;
    std::uint64_t nested_blossoms = 0;  // blossoms with at least one blossom child
    std::uint64_t expansions = 0;
    std::uint64_t augments = 0;
    std::uint64_t boundary_matched_augments = 0;  // augmentations ending at a boundary-matched node
    std::uint64_t region_steps = 0;                // balls newly covered by exploratory regions
    std::uint64_t resets = 0;                      // streaming arrivals that forced a re-solve
    std::uint64_t validations = 0;
    std::uint64_t violations = 0;

    std::uint64_t primitive_ops() const {
        return dual_adjusts + grows + blossoms_made + expansions + augments + region_steps;
    }
};

struct MatchResult {
    Matching matching;
    DualState duals;
    BlossomForest forest;
    MatcherStats stats;
};

/// Record of one alternating tree, from root selection to augmentation.
struct PhaseTrace {
    VertexId root = 0;
    std::vector<VertexId> vertices;      // every vertex in the tree or re-matched by the augmentation
    std::vector<BallId> region_balls;    // balls covered by the tree's exploratory regions
    std::uint64_t ops = 0;               // primitive operations executed during the phase
};

struct MatcherOptions {
    /// Sweep every invariant after every primitive operation (quadratic cost).
    bool validate = false;
    /// Called once per completed phase.
    std::function<void(const PhaseTrace&)> on_phase;
    /// Cached search entries kept across phases before the memo is dropped.
    std::size_t cache_budget = std::size_t{1} << 15;
};

struct GrowthEdge {
    VertexId from = 0;  // vertex inside an outer node
    VertexId to = 0;    // target vertex, or kBoundaryVertex
    double weight = 0;  // implicit edge weight (nest path weight)
    double slack = 0;
};

struct DualDelta {
    enum class Bound { GrowthEdge, InnerBlossom };
    double delta = 0;
    Bound bound = Bound::GrowthEdge;
    NodeId blossom = kNoNode;
};

enum class Label : std::uint8_t { None, Outer, Inner };

/// Serial single-tree blossom algorithm with a boundary vertex over the implicit complete
/// graph whose edge weights are nest path weights.
///
/// Edges are never materialized. Each vertex owns an exploratory region: the balls within
/// its accumulated dual radius. Growth edges are discovered by searching outward from the
/// outer vertices of the current tree and stopping once no region beyond the search
/// frontier can produce a smaller slack.
///
/// Besides `solve()`, the individual primitives are public so they can be driven and
/// inspected step by step.
class Matcher {
   public:
    explicit Matcher(const Nest& nest, MatcherOptions options = {});

    /// Appends detection events as new unmatched vertices. Matched structure is kept
    /// unless a new event lies inside an existing region closer than that region's radius,
    /// in which case the problem restarts from zero duals.
    void add_events(std::span<const DetectionEvent> events);

    /// Runs the main loop until every vertex is matched.
    MatchResult solve();

    /// One iteration of the main loop. Returns false once every vertex is matched.
    bool step();

    // Primitives.
    std::optional<VertexId> select_root() const;
    void begin_tree(VertexId root);
    DualDelta adjust_duals();
    std::optional<GrowthEdge> find_growth_edge();
    void grow_tree(const GrowthEdge& edge);
    NodeId make_blossom(const GrowthEdge& edge);
    void augment(const GrowthEdge& edge);
    void expand_blossom(NodeId blossom);
    std::optional<NodeId> zero_inner_blossom() const;

    // Inspection.
    bool tree_active() const { return tree_active_; }
    std::size_t num_vertices() const { return vertices_.size(); }
    NodeId top(VertexId v) const;
    Label label(NodeId node) const { return node_ref(node).label; }
    double y(NodeId node) const { return node_ref(node).y; }
    VertexId mate(VertexId v) const { return vertices_[v].mate; }
    VertexId base(NodeId node) const;
    const std::vector<NodeId>& children(NodeId blossom) const { return node_ref(blossom).children; }
    NodeId parent(NodeId node) const { return node_ref(node).parent; }
    std::vector<NodeId> tree_nodes() const;
    /// Sum of y over every set containing v (its region radius).
    double radius(VertexId v) const;
    /// Nest path weight between two event vertices (or to the boundary).
    double edge_weight(VertexId a, VertexId b);
    const MatcherStats& stats() const { return stats_; }

    /// Sweeps the dual and primal invariants over every vertex pair. Returns one message
    /// per violation.
    std::vector<std::string> validate();

    MatchResult result() const;

   private:
    struct CycleEdge {
        VertexId a;  // in children[i]
        VertexId b;  // in children[i + 1]
        double w;
    };
    struct TreeEdge {
        VertexId child = kNoVertex;   // inside this node
        VertexId parent = kNoVertex;  // inside the parent node
        double w = 0;
    };
    struct NodeData {
        double y = 0;
        NodeId parent = kNoNode;
        std::vector<NodeId> children;
        std::vector<CycleEdge> cycle;
        std::vector<VertexId> members;
        Label label = Label::None;
        TreeEdge tree_edge;
        bool alive = true;
    };
    struct VertexData {
        NodeData node;
        BallId ball = 0;
        VertexId mate = kNoVertex;
        double mate_weight = 0;
        double region_cap = 0;          // largest radius ever registered
        std::uint32_t registered = 0;   // prefix of the search already registered
        std::size_t footprint = 0;      // search size last counted against the cache budget
        std::uint64_t last_used = 0;    // last phase that used the search
        NodeId top = kNoNode;           // outermost node containing the vertex
        double radius = 0;              // sum of y over the vertex and its enclosing blossoms
    };
    struct Candidate {
        VertexId from;
        VertexId to;
        double weight;
        double slack;
        int rate;
    };

    NodeData& node_ref(NodeId id);
    const NodeData& node_ref(NodeId id) const;
    DijkstraSearch& search(VertexId v);
    template <typename F>
    void for_each_member(NodeId node, F&& f) const;
    std::vector<VertexId> outer_vertices() const;
    double scan_from(VertexId u, double best, std::vector<Candidate>& out, bool tight_mode);
    void update_regions();
    void rotate(NodeId node, VertexId new_base);
    void set_mate(VertexId a, VertexId b, double w);
    void end_phase(std::vector<VertexId> extra);
    void after_primitive();
    void reset_state();
    double radius_from_duals(VertexId v) const;
    std::optional<GrowthEdge> best_tight(const std::vector<Candidate>& cands) const;

    const Nest* nest_;
    MatcherOptions options_;
    double eps_;
    std::vector<VertexData> vertices_;
    std::vector<NodeData> blossoms_;
    BallTable<VertexId> ball_vertex_;  // vertex id + 1, 0 for balls without an event
    BallTable<absl::InlinedVector<VertexId, 2>, 10> coverage_;
    absl::flat_hash_map<VertexId, std::unique_ptr<DijkstraSearch>> searches_;
    std::size_t cached_entries_ = 0;
    std::uint64_t phases_ended_ = 0;
    std::vector<VertexId> touched_;
    std::vector<std::uint32_t> seen_;      // per-scan visit stamps
    std::vector<std::uint32_t> resolved_;  // per-scan stamps of vertices with an exact distance
    std::uint32_t stamp_ = 0;

    bool tree_active_ = false;
    VertexId root_ = kNoVertex;
    mutable std::vector<NodeId> tree_;
    mutable VertexId next_root_hint_ = 0;
    absl::flat_hash_map<VertexId, std::vector<Candidate>> tight_cache_;  // per outer vertex, at current duals
    std::uint64_t phase_ops_start_ = 0;
    std::vector<VertexId> phase_vertices_;

    MatcherStats stats_;
};

/// Matches every event to another event or to the boundary with minimum total weight.
MatchResult match_all(const Nest& nest, std::span<const DetectionEvent> events, MatcherOptions options = {});

}  // namespace nm

#endif  // NESTMATCH_MATCHER_H
