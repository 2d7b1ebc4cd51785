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

#include "nestmatch/matcher.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace nm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sort key placing the boundary before every real vertex.
std::int64_t target_key(VertexId v) { return v == kBoundaryVertex ? -1 : std::int64_t{v}; }

}  // namespace

template <typename F>
void Matcher::for_each_member(NodeId node, F&& f) const {
    if (!is_blossom(node)) {
        f(node);
        return;
    }
    for (VertexId v : node_ref(node).members) f(v);
}

std::vector<VertexId> Matching::mates(std::size_t num_vertices) const {
    std::vector<VertexId> out(num_vertices, kNoVertex);
    for (const MatchedEdge& e : pairs) {
        out[e.a] = e.b;
        out[e.b] = e.a;
    }
    for (const MatchedEdge& e : boundary_matches) out[e.a] = kBoundaryVertex;
    return out;
}

double DualState::objective() const {
    double total = 0;
    for (double y : singleton_y) total += y;
    for (const DualSet& s : blossoms) total += s.y;
    return total;
}

Matcher::Matcher(const Nest& nest, MatcherOptions options)
    : nest_(&nest), options_(std::move(options)), eps_(nest.epsilon()) {
}

Matcher::NodeData& Matcher::node_ref(NodeId id) {
    return is_blossom(id) ? blossoms_[id & ~kBlossomBit] : vertices_[id].node;
}

const Matcher::NodeData& Matcher::node_ref(NodeId id) const {
    return is_blossom(id) ? blossoms_[id & ~kBlossomBit] : vertices_[id].node;
}

NodeId Matcher::top(VertexId v) const { return vertices_[v].top; }

VertexId Matcher::base(NodeId node) const {
    while (is_blossom(node)) node = node_ref(node).children.front();
    return node;
}

double Matcher::radius(VertexId v) const { return vertices_[v].radius; }

double Matcher::radius_from_duals(VertexId v) const {
    double r = 0;
    for (NodeId n = v; n != kNoNode; n = node_ref(n).parent) r += node_ref(n).y;
    return r;
}

DijkstraSearch& Matcher::search(VertexId v) {
    auto& slot = searches_[v];
    if (!slot) slot = std::make_unique<DijkstraSearch>(*nest_, vertices_[v].ball);
    touched_.push_back(v);
    return *slot;
}

double Matcher::edge_weight(VertexId a, VertexId b) {
    BallId target = b == kBoundaryVertex ? kBoundaryBall : vertices_[b].ball;
    if (a != kBoundaryVertex && b != kBoundaryVertex && a == b) return 0;
    auto d = search(a).distance_to(target);
    return d ? *d : kInf;
}

void Matcher::add_events(std::span<const DetectionEvent> events) {
    if (tree_active_) throw std::logic_error("events can only be added between phases");
    bool conflict = false;
    vertices_.reserve(vertices_.size() + events.size());
    for (const DetectionEvent& e : events) {
        if (e.ball >= nest_->num_balls()) throw std::invalid_argument("detection event references an unknown ball");
        if (const VertexId* known = ball_vertex_.find(e.ball); known && *known) {
            throw std::invalid_argument("two detection events on ball " + std::to_string(e.ball));
        }
        // A region already reaching past this ball would make the new zero-dual edge
        // infeasible.
        if (const auto* cov = coverage_.find(e.ball)) {
            for (VertexId u : *cov) {
                auto d = search(u).distance_to(e.ball);
                if (d && *d < radius(u) - eps_) conflict = true;
            }
        }
        VertexId v = static_cast<VertexId>(vertices_.size());
        vertices_.emplace_back();
        vertices_.back().ball = e.ball;
        vertices_.back().top = v;
        ball_vertex_[e.ball] = v + 1;
    }
    if (conflict) {
        reset_state();
        stats_.resets++;
    }
}

void Matcher::reset_state() {
    for (VertexId v = 0; v < vertices_.size(); v++) {
        const BallId ball = vertices_[v].ball;
        vertices_[v] = VertexData{};
        vertices_[v].ball = ball;
        vertices_[v].top = v;
    }
    blossoms_.clear();
    coverage_.clear();
    searches_.clear();
    touched_.clear();
    cached_entries_ = 0;
    next_root_hint_ = 0;
    tight_cache_.clear();
}

std::optional<VertexId> Matcher::select_root() const {
    while (next_root_hint_ < vertices_.size() && vertices_[next_root_hint_].mate != kNoVertex) next_root_hint_++;
    if (next_root_hint_ >= vertices_.size()) return std::nullopt;
    return next_root_hint_;
}

void Matcher::begin_tree(VertexId root) {
    if (tree_active_) throw std::logic_error("a tree is already active");
    if (root >= vertices_.size() || vertices_[root].mate != kNoVertex || top(root) != root) {
        throw std::logic_error("tree root must be an unmatched vertex");
    }
    tree_active_ = true;
    root_ = root;
    NodeData& n = node_ref(root);
    n.label = Label::Outer;
    n.tree_edge = TreeEdge{};
    tree_ = {root};
    tight_cache_.clear();
    phase_ops_start_ = stats_.primitive_ops();
    phase_vertices_.clear();
    stats_.phases++;
    after_primitive();
}

std::vector<NodeId> Matcher::tree_nodes() const {
    // Compacts the append-only node list in place: drops dead, nested and duplicate entries.
    std::sort(tree_.begin(), tree_.end());
    tree_.erase(std::unique(tree_.begin(), tree_.end()), tree_.end());
    tree_.erase(std::remove_if(tree_.begin(), tree_.end(),
                               [&](NodeId id) {
                                   const NodeData& n = node_ref(id);
                                   return !n.alive || n.parent != kNoNode || n.label == Label::None;
                               }),
                tree_.end());
    return tree_;
}

std::vector<VertexId> Matcher::outer_vertices() const {
    std::vector<VertexId> out;
    for (NodeId id : tree_nodes()) {
        if (node_ref(id).label == Label::Outer) for_each_member(id, [&](VertexId v) { out.push_back(v); });
    }
    return out;
}

// Searches outward from outer vertex u and collects candidate edges.
//
// In label-aware mode a candidate is any edge to a non-inner vertex outside u's node whose
// effective slack (slack / rate) is at most the running minimum `best`, which is returned.
// In tight mode every edge with slack <= 2 eps is collected regardless of labels.
//
// For a vertex v whose region has not touched any ball settled from u, the shortest u-v
// path enters v's region from outside, so slack(u, v) exceeds frontier - w_max - radius(u).
// Regions that have touched the settled set are tracked individually until their exact
// distance is known or their bound clears the minimum.
double Matcher::scan_from(VertexId u, double best, std::vector<Candidate>& out, bool tight_mode) {
    const double w_max = nest_->params().w_max;
    const double ru = radius(u);
    const NodeId home = top(u);
    const double limit = tight_mode ? 2 * eps_ : 0;
    DijkstraSearch& s = search(u);
    // Regions touched but not yet resolved, by rate, largest radius on top. Resolved
    // entries are dropped lazily.
    std::priority_queue<std::pair<double, VertexId>> pending[2];
    if (seen_.size() < vertices_.size()) {
        seen_.resize(vertices_.size(), 0);
        resolved_.resize(vertices_.size(), 0);
    }
    if (++stamp_ == 0) {
        std::fill(seen_.begin(), seen_.end(), 0);
        std::fill(resolved_.begin(), resolved_.end(), 0);
        stamp_ = 1;
    }
    const std::uint32_t stamp = stamp_;
    auto seen = [&](VertexId v) { return seen_[v] == stamp; };
    auto widest = [&](int k) {
        while (!pending[k].empty() && resolved_[pending[k].top().second] == stamp) pending[k].pop();
        return pending[k].empty() ? -kInf : pending[k].top().first;
    };
    std::size_t idx = 0;

    auto rate_of = [&](VertexId v) { return !tight_mode && node_ref(top(v)).label == Label::Outer ? 2 : 1; };
    auto eligible = [&](VertexId v) {
        if (tight_mode) return true;
        const NodeId other = top(v);
        return other != home && node_ref(other).label != Label::Inner;
    };
    auto accept = [&](VertexId v, double d, double slack, int rate) {
        if (tight_mode) {
            if (slack <= limit) out.push_back({u, v, d, slack, 1});
            return;
        }
        const double eff = slack / rate;
        if (eff <= best + eps_) {
            out.push_back({u, v, d, slack, rate});
            best = std::min(best, eff);
        }
    };

    while (true) {
        const auto& settled = s.settled();
        const double next = idx < settled.size() ? settled[idx].dist : s.frontier();
        if (next == kInf) break;
        const double margin = tight_mode ? 3 * eps_ : 2 * best + 2 * eps_;
        bool done = next >= ru + w_max + margin;
        for (int k = 0; k < 2 && done; k++) {
            const double need = tight_mode ? 3 * eps_ : (k + 1) * (best + eps_);
            if (next - ru - widest(k) < need) done = false;
        }
        if (done) break;
        if (idx == settled.size()) {
            s.settle_next();
            continue;
        }
        const DijkstraSearch::Settled entry = settled[idx++];
        if (entry.ball == kBoundaryBall) {
            accept(kBoundaryVertex, entry.dist, entry.dist - ru, 1);
            continue;
        }
        const VertexId* hit = ball_vertex_.find(entry.ball);
        if (hit && *hit && *hit - 1 != u) {
            const VertexId v = *hit - 1;
            seen_[v] = stamp;
            resolved_[v] = stamp;
            if (eligible(v)) accept(v, entry.dist, entry.dist - ru - radius(v), rate_of(v));
        }
        if (const auto* cov = coverage_.find(entry.ball)) {
            for (VertexId v : *cov) {
                if (v == u || seen(v)) continue;
                seen_[v] = stamp;
                if (eligible(v)) pending[rate_of(v) - 1].emplace(radius(v), v);
            }
        }
    }
    return best;
}

std::optional<GrowthEdge> Matcher::best_tight(const std::vector<Candidate>& cands) const {
    const Candidate* pick = nullptr;
    for (const Candidate& c : cands) {
        if (c.slack > eps_) continue;
        if (c.to != kBoundaryVertex) {
            NodeId other = top(c.to);
            if (other == top(c.from) || node_ref(other).label == Label::Inner) continue;
        }
        if (!pick || target_key(c.to) < target_key(pick->to) || (c.to == pick->to && c.from < pick->from)) {
            pick = &c;
        }
    }
    if (!pick) return std::nullopt;
    return GrowthEdge{pick->from, pick->to, pick->weight, pick->slack};
}

// Tight edges depend only on the duals, so each outer vertex's list stays valid until the
// next dual adjustment; structural steps only change which of them qualify.
std::optional<GrowthEdge> Matcher::find_growth_edge() {
    if (!tree_active_) return std::nullopt;
    std::vector<Candidate> cands;
    for (VertexId u : outer_vertices()) {
        auto [it, fresh] = tight_cache_.try_emplace(u);
        if (fresh) scan_from(u, 0, it->second, true);
        cands.insert(cands.end(), it->second.begin(), it->second.end());
    }
    return best_tight(cands);
}

std::optional<NodeId> Matcher::zero_inner_blossom() const {
    for (NodeId id : tree_nodes()) {
        const NodeData& n = node_ref(id);
        if (is_blossom(id) && n.label == Label::Inner && n.y <= eps_) return id;
    }
    return std::nullopt;
}

DualDelta Matcher::adjust_duals() {
    if (!tree_active_) throw std::logic_error("adjust_duals needs an active tree");
    DualDelta result;
    double bound = kInf;
    for (NodeId id : tree_nodes()) {
        const NodeData& n = node_ref(id);
        if (is_blossom(id) && n.label == Label::Inner && n.y < bound) {
            bound = n.y;
            result.bound = DualDelta::Bound::InnerBlossom;
            result.blossom = id;
        }
    }
    std::vector<std::pair<VertexId, std::vector<Candidate>>> per_vertex;
    double best = bound;
    for (VertexId u : outer_vertices()) {
        per_vertex.emplace_back(u, std::vector<Candidate>{});
        best = scan_from(u, best, per_vertex.back().second, false);
    }
    if (best == kInf) throw std::logic_error("dual adjustment is unbounded: no reachable boundary");
    if (best < bound) {
        result.bound = DualDelta::Bound::GrowthEdge;
        result.blossom = kNoNode;
    }
    const double delta = std::max(0.0, best);
    result.delta = delta;
    for (NodeId id : tree_nodes()) {
        NodeData& n = node_ref(id);
        const double before = n.y;
        if (n.label == Label::Outer) {
            n.y += delta;
        } else {
            n.y -= delta;
            if (n.y < 0 && n.y > -eps_) n.y = 0;
        }
        const double change = n.y - before;
        for_each_member(id, [&](VertexId v) { vertices_[v].radius += change; });
    }
    stats_.dual_adjusts++;
    update_regions();
    // The scan already saw every edge that the step can make tight.
    tight_cache_.clear();
    for (auto& [u, cands] : per_vertex) {
        std::vector<Candidate>& list = tight_cache_[u];
        for (Candidate c : cands) {
            c.slack -= c.rate * delta;
            c.rate = 1;
            if (c.slack <= 2 * eps_) list.push_back(c);
        }
    }
    after_primitive();
    return result;
}

void Matcher::update_regions() {
    for (VertexId v : outer_vertices()) {
        VertexData& vd = vertices_[v];
        const double r = radius(v);
        if (r <= vd.region_cap) continue;
        vd.region_cap = r;
        DijkstraSearch& s = search(v);
        s.expand_to(r);
        const auto& settled = s.settled();
        while (vd.registered < settled.size() && settled[vd.registered].dist <= r) {
            BallId b = settled[vd.registered].ball;
            if (b != kBoundaryBall) {
                coverage_[b].push_back(v);
                stats_.region_steps++;
            }
            vd.registered++;
        }
    }
}

void Matcher::set_mate(VertexId a, VertexId b, double w) {
    vertices_[a].mate = b;
    vertices_[a].mate_weight = w;
    if (b != kBoundaryVertex && b != kNoVertex) {
        vertices_[b].mate = a;
        vertices_[b].mate_weight = w;
    }
}

void Matcher::grow_tree(const GrowthEdge& edge) {
    if (edge.to == kBoundaryVertex) throw std::logic_error("cannot grow onto the boundary");
    const NodeId target = top(edge.to);
    NodeData& t = node_ref(target);
    if (t.label == Label::Inner) return;  // outer-inner tight edges carry no information
    if (t.label == Label::Outer) throw std::logic_error("grow_tree target is already outer");
    const VertexId b = base(target);
    const VertexId m = vertices_[b].mate;
    if (m == kNoVertex || m == kBoundaryVertex) throw std::logic_error("grow_tree target must be matched to a vertex");
    t.label = Label::Inner;
    t.tree_edge = TreeEdge{edge.to, edge.from, edge.weight};
    const NodeId mate_node = top(m);
    NodeData& mn = node_ref(mate_node);
    mn.label = Label::Outer;
    mn.tree_edge = TreeEdge{m, b, vertices_[b].mate_weight};
    tree_.push_back(target);
    tree_.push_back(mate_node);
    stats_.grows++;
    after_primitive();
}

NodeId Matcher::make_blossom(const GrowthEdge& edge) {
    const NodeId left = top(edge.from);
    const NodeId right = top(edge.to);
    if (node_ref(left).label != Label::Outer || node_ref(right).label != Label::Outer || left == right) {
        throw std::logic_error("make_blossom needs two distinct outer nodes of the tree");
    }
    auto parent_of = [&](NodeId n) -> NodeId {
        const TreeEdge& te = node_ref(n).tree_edge;
        return te.parent == kNoVertex ? kNoNode : top(te.parent);
    };
    std::vector<NodeId> up_left{left};
    while (parent_of(up_left.back()) != kNoNode) up_left.push_back(parent_of(up_left.back()));
    std::unordered_set<NodeId> on_left(up_left.begin(), up_left.end());
    std::vector<NodeId> up_right{right};
    while (!on_left.count(up_right.back())) {
        NodeId p = parent_of(up_right.back());
        if (p == kNoNode) throw std::logic_error("make_blossom endpoints lie in different trees");
        up_right.push_back(p);
    }
    const NodeId lca = up_right.back();
    up_right.pop_back();
    const std::size_t a = static_cast<std::size_t>(std::find(up_left.begin(), up_left.end(), lca) - up_left.begin());

    NodeData blossom;
    // children: lca, then down the left path to `left`, then up the right path.
    for (std::size_t i = a + 1; i-- > 0;) blossom.children.push_back(up_left[i]);
    for (NodeId n : up_right) blossom.children.push_back(n);
    for (std::size_t i = 0; i < a; i++) {
        const TreeEdge& te = node_ref(up_left[a - i - 1]).tree_edge;
        blossom.cycle.push_back({te.parent, te.child, te.w});
    }
    blossom.cycle.push_back({edge.from, edge.to, edge.weight});
    for (NodeId n : up_right) {
        const TreeEdge& te = node_ref(n).tree_edge;
        blossom.cycle.push_back({te.child, te.parent, te.w});
    }
    blossom.tree_edge = node_ref(lca).tree_edge;
    blossom.label = Label::Outer;
    blossom.y = 0;
    const NodeId id = static_cast<NodeId>(blossoms_.size()) | kBlossomBit;
    bool nested = false;
    for (NodeId c : blossom.children) {
        for_each_member(c, [&](VertexId v) { blossom.members.push_back(v); });
        nested |= is_blossom(c);
    }
    std::sort(blossom.members.begin(), blossom.members.end());
    for (NodeId c : blossom.children) {
        NodeData& cn = node_ref(c);
        cn.parent = id;
        cn.label = Label::None;
        cn.tree_edge = TreeEdge{};
    }
    for (VertexId v : blossom.members) vertices_[v].top = id;
    blossoms_.push_back(std::move(blossom));
    tree_.push_back(id);
    stats_.blossoms_made++;
    if (nested) stats_.nested_blossoms++;
    after_primitive();
    return id;
}

void Matcher::rotate(NodeId node, VertexId new_base) {
    if (!is_blossom(node)) return;
    NodeData& b = node_ref(node);
    NodeId child = new_base;
    while (node_ref(child).parent != node) child = node_ref(child).parent;
    const std::size_t k = b.children.size();
    const std::size_t j = static_cast<std::size_t>(std::find(b.children.begin(), b.children.end(), child) - b.children.begin());
    rotate(child, new_base);
    if (j % 2 == 0) {
        for (std::size_t i = j; i >= 2; i -= 2) {
            CycleEdge e = node_ref(node).cycle[i - 2];
            rotate(node_ref(node).children[i - 2], e.a);
            rotate(node_ref(node).children[i - 1], e.b);
            set_mate(e.a, e.b, e.w);
        }
    } else {
        for (std::size_t i = j + 1; i < k; i += 2) {
            CycleEdge e = node_ref(node).cycle[i];
            rotate(node_ref(node).children[i], e.a);
            rotate(node_ref(node).children[(i + 1) % k], e.b);
            set_mate(e.a, e.b, e.w);
        }
    }
    NodeData& nb = node_ref(node);
    std::rotate(nb.children.begin(), nb.children.begin() + j, nb.children.end());
    std::rotate(nb.cycle.begin(), nb.cycle.begin() + j, nb.cycle.end());
}

void Matcher::augment(const GrowthEdge& edge) {
    std::vector<VertexId> extra;
    VertexId partner = edge.to;
    if (edge.to != kBoundaryVertex) {
        const NodeId target = top(edge.to);
        if (node_ref(target).label != Label::None) throw std::logic_error("augment target must be outside the tree");
        const VertexId tb = base(target);
        const VertexId tm = vertices_[tb].mate;
        if (tm == kBoundaryVertex) {
            stats_.boundary_matched_augments++;
            vertices_[tb].mate = kNoVertex;
        } else if (tm != kNoVertex) {
            throw std::logic_error("augment target must be unmatched or matched to the boundary");
        }
        rotate(target, edge.to);
        for_each_member(target, [&](VertexId v) { extra.push_back(v); });
    }
    VertexId x = edge.from;
    double w = edge.weight;
    while (true) {
        const NodeId xn = top(x);
        const VertexId old_base = base(xn);
        const VertexId ext = vertices_[old_base].mate;
        const TreeEdge te = node_ref(xn).tree_edge;
        rotate(xn, x);
        set_mate(x, partner, w);
        if (te.parent == kNoVertex) break;  // reached the root
        // xn is a non-root outer node: its matched edge (old_base, ext) to the inner parent flips
        // to unmatched, and the inner parent's own tree edge flips to matched.
        (void)ext;
        const NodeId inner = top(te.parent);
        const TreeEdge ie = node_ref(inner).tree_edge;
        rotate(inner, ie.child);
        partner = ie.child;
        x = ie.parent;
        w = ie.w;
    }
    stats_.augments++;
    end_phase(std::move(extra));
    after_primitive();
}

void Matcher::expand_blossom(NodeId id) {
    if (!is_blossom(id) || node_ref(id).label != Label::Inner || node_ref(id).y > eps_ || node_ref(id).parent != kNoNode) {
        throw std::logic_error("only top-level inner blossoms with zero dual can be expanded");
    }
    NodeData b = std::move(node_ref(id));
    node_ref(id) = NodeData{};
    node_ref(id).alive = false;
    const std::size_t k = b.children.size();
    NodeId entry_child = b.tree_edge.child;
    while (node_ref(entry_child).parent != id) entry_child = node_ref(entry_child).parent;
    const std::size_t j = static_cast<std::size_t>(std::find(b.children.begin(), b.children.end(), entry_child) - b.children.begin());
    for (NodeId c : b.children) {
        NodeData& cn = node_ref(c);
        cn.parent = kNoNode;
        cn.label = Label::None;
        cn.tree_edge = TreeEdge{};
        for_each_member(c, [&](VertexId v) {
            vertices_[v].top = c;
            vertices_[v].radius -= b.y;
        });
    }
    // Even-length alternating path from the entry child to the base child.
    std::vector<std::size_t> path{j};
    if (j % 2 == 0) {
        for (std::size_t i = j; i > 0; i--) path.push_back(i - 1);
    } else {
        for (std::size_t i = j + 1; i <= k; i++) path.push_back(i % k);
    }
    node_ref(b.children[j]).tree_edge = b.tree_edge;
    for (std::size_t s = 0; s < path.size(); s++) {
        NodeData& cn = node_ref(b.children[path[s]]);
        cn.label = s % 2 == 0 ? Label::Inner : Label::Outer;
        if (s == 0) continue;
        const std::size_t prev = path[s - 1], cur = path[s];
        if (j % 2 == 0) {
            const CycleEdge& e = b.cycle[cur];  // joins children[cur] and children[prev]
            cn.tree_edge = TreeEdge{e.a, e.b, e.w};
        } else {
            const CycleEdge& e = b.cycle[prev];  // joins children[prev] and children[cur]
            cn.tree_edge = TreeEdge{e.b, e.a, e.w};
        }
        tree_.push_back(b.children[cur]);
    }
    tree_.push_back(b.children[j]);
    // Children leaving the tree become plain matched targets. Tight edges are symmetric, so
    // scanning from their vertices finds every cached outer vertex that now sees them.
    for (NodeId c : b.children) {
        if (node_ref(c).label != Label::None) continue;
        for_each_member(c, [&](VertexId w) {
            std::vector<Candidate> found;
            scan_from(w, 0, found, true);
            for (const Candidate& f : found) {
                if (f.to == kBoundaryVertex || node_ref(top(f.to)).label != Label::Outer) continue;
                auto it = tight_cache_.find(f.to);
                if (it != tight_cache_.end()) it->second.push_back({f.to, w, f.weight, f.slack, 1});
            }
        });
    }
    stats_.expansions++;
    after_primitive();
}

void Matcher::end_phase(std::vector<VertexId> extra) {
    std::vector<NodeId> nodes = tree_nodes();
    PhaseTrace trace;
    const bool tracing = static_cast<bool>(options_.on_phase);
    for (NodeId id : nodes) {
        NodeData& n = node_ref(id);
        if (tracing) for_each_member(id, [&](VertexId v) { trace.vertices.push_back(v); });
        n.label = Label::None;
        n.tree_edge = TreeEdge{};
    }
    tree_.clear();
    tree_active_ = false;
    if (tracing) {
        trace.root = root_;
        for (VertexId v : extra) trace.vertices.push_back(v);
        std::sort(trace.vertices.begin(), trace.vertices.end());
        trace.vertices.erase(std::unique(trace.vertices.begin(), trace.vertices.end()), trace.vertices.end());
        for (VertexId v : trace.vertices) {
            const VertexData& vd = vertices_[v];
            trace.region_balls.push_back(vd.ball);
            const double r = radius(v);
            if (r <= 0) continue;
            DijkstraSearch& s = search(v);
            s.expand_to(r);
            const auto& settled = s.settled();
            for (std::size_t i = 0; i < vd.registered && i < settled.size(); i++) {
                if (settled[i].dist > r) break;
                if (settled[i].ball != kBoundaryBall) trace.region_balls.push_back(settled[i].ball);
            }
        }
        std::sort(trace.region_balls.begin(), trace.region_balls.end());
        trace.region_balls.erase(std::unique(trace.region_balls.begin(), trace.region_balls.end()), trace.region_balls.end());
        trace.ops = stats_.primitive_ops() - phase_ops_start_;
    }
    root_ = kNoVertex;
    if (tracing) options_.on_phase(trace);

    std::sort(touched_.begin(), touched_.end());
    touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
    const std::uint64_t phase = ++phases_ended_;
    for (VertexId v : touched_) {
        vertices_[v].last_used = phase;
        auto it = searches_.find(v);
        if (it == searches_.end()) continue;
        const std::size_t fp = it->second->footprint();
        cached_entries_ += fp - vertices_[v].footprint;
        vertices_[v].footprint = fp;
    }
    touched_.clear();
    if (cached_entries_ > options_.cache_budget) {
        // Keep the working set of the phase that just ended; drop the rest.
        for (auto it = searches_.begin(); it != searches_.end();) {
            VertexData& vd = vertices_[it->first];
            if (vd.last_used == phase) {
                ++it;
                continue;
            }
            cached_entries_ -= vd.footprint;
            vd.footprint = 0;
            searches_.erase(it++);
        }
    }
}

bool Matcher::step() {
    if (!tree_active_) {
        auto root = select_root();
        if (!root) return false;
        begin_tree(*root);
        return true;
    }
    auto edge = find_growth_edge();
    if (!edge) {
        if (auto zb = zero_inner_blossom()) {
            expand_blossom(*zb);
        } else {
            adjust_duals();
        }
        return true;
    }
    if (edge->to == kBoundaryVertex) {
        augment(*edge);
        return true;
    }
    const NodeId target = top(edge->to);
    if (node_ref(target).label == Label::Outer) {
        make_blossom(*edge);
        return true;
    }
    const VertexId tm = vertices_[base(target)].mate;
    if (tm == kNoVertex || tm == kBoundaryVertex) {
        augment(*edge);
    } else {
        grow_tree(*edge);
    }
    return true;
}

MatchResult Matcher::solve() {
    while (step()) {
    }
    return result();
}

void Matcher::after_primitive() {
    if (!options_.validate) return;
    stats_.validations++;
    auto problems = validate();
    stats_.violations += problems.size();
}

std::vector<std::string> Matcher::validate() {
    std::vector<std::string> problems;
    auto report = [&](const std::string& what) { problems.push_back(what); };
    const std::size_t n = vertices_.size();
    const double tol = 10 * eps_;

    // Matching structure.
    for (VertexId v = 0; v < n; v++) {
        VertexId m = vertices_[v].mate;
        if (m != kNoVertex && m != kBoundaryVertex && (m >= n || vertices_[m].mate != v)) {
            report("mate of " + std::to_string(v) + " is not symmetric");
        }
    }
    // Non-negative duals and blossom shape.
    for (VertexId v = 0; v < n; v++) {
        if (vertices_[v].node.y < -tol) report("negative dual on vertex " + std::to_string(v));
    }
    for (std::size_t i = 0; i < blossoms_.size(); i++) {
        const NodeData& b = blossoms_[i];
        if (!b.alive) continue;
        if (b.y < -tol) report("negative dual on blossom " + std::to_string(i));
        if (b.children.size() < 3 || b.children.size() % 2 == 0) report("blossom cycle is not odd");
        if (b.members.size() % 2 == 0) report("blossom has an even vertex set");
        for (std::size_t c = 0; c < b.cycle.size(); c++) {
            const CycleEdge& e = b.cycle[c];
            bool matched = vertices_[e.a].mate == e.b;
            if (matched != (c % 2 == 1)) report("blossom cycle edge matching out of phase");
        }
    }
    // Edge constraints over the complete implicit graph.
    auto common = [&](VertexId a, VertexId b) {
        std::unordered_set<NodeId> anc;
        for (NodeId x = node_ref(a).parent; x != kNoNode; x = node_ref(x).parent) anc.insert(x);
        double s = 0;
        for (NodeId x = node_ref(b).parent; x != kNoNode; x = node_ref(x).parent) {
            if (anc.count(x)) s += node_ref(x).y;
        }
        return s;
    };
    for (VertexId a = 0; a < n; a++) {
        const double ra = radius(a);
        const double wb = edge_weight(a, kBoundaryVertex);
        if (ra > wb + tol) report("boundary edge of " + std::to_string(a) + " over-covered");
        if (vertices_[a].mate == kBoundaryVertex && std::abs(ra - wb) > tol) {
            report("boundary match of " + std::to_string(a) + " is not tight");
        }
        for (VertexId b = a + 1; b < n; b++) {
            const double w = edge_weight(a, b);
            const double cover = ra + radius(b) - 2 * common(a, b);
            if (cover > w + tol) report("edge " + std::to_string(a) + "-" + std::to_string(b) + " over-covered");
            if (vertices_[a].mate == b && std::abs(cover - w) > tol) {
                report("matched edge " + std::to_string(a) + "-" + std::to_string(b) + " is not tight");
            }
        }
    }
    for (VertexId v = 0; v < n; v++) {
        if (std::abs(radius(v) - radius_from_duals(v)) > tol) report("cached radius of " + std::to_string(v) + " drifted");
        NodeId t = v;
        while (node_ref(t).parent != kNoNode) t = node_ref(t).parent;
        if (t != top(v)) report("cached top node of " + std::to_string(v) + " is stale");
    }
    // Unmatched vertices outside the tree carry no dual.
    for (VertexId v = 0; v < n; v++) {
        if (vertices_[v].mate != kNoVertex) continue;
        if (node_ref(top(v)).label == Label::None && radius(v) > tol) {
            report("unmatched non-tree vertex " + std::to_string(v) + " has a dual");
        }
    }
    // Tree edges stay tight.
    if (tree_active_) {
        for (NodeId id : tree_nodes()) {
            const TreeEdge& te = node_ref(id).tree_edge;
            if (te.parent == kNoVertex) continue;
            const double cover = radius(te.child) + radius(te.parent);
            if (std::abs(cover - te.w) > tol) report("tree edge into node " + std::to_string(id) + " is not tight");
        }
    }
    return problems;
}

MatchResult Matcher::result() const {
    MatchResult r;
    const std::size_t n = vertices_.size();
    for (VertexId v = 0; v < n; v++) {
        const VertexData& vd = vertices_[v];
        if (vd.mate == kBoundaryVertex) {
            r.matching.boundary_matches.push_back({v, kBoundaryVertex, vd.mate_weight});
        } else if (vd.mate != kNoVertex && v < vd.mate) {
            r.matching.pairs.push_back({v, vd.mate, vd.mate_weight});
        }
    }
    for (const MatchedEdge& e : r.matching.pairs) r.matching.total_weight += e.weight;
    for (const MatchedEdge& e : r.matching.boundary_matches) r.matching.total_weight += e.weight;
    r.duals.singleton_y.resize(n);
    for (VertexId v = 0; v < n; v++) r.duals.singleton_y[v] = vertices_[v].node.y;
    for (std::size_t i = 0; i < blossoms_.size(); i++) {
        const NodeData& b = blossoms_[i];
        if (!b.alive) continue;
        r.duals.blossoms.push_back({b.members, b.y});
        r.forest.blossoms.push_back({static_cast<NodeId>(i) | kBlossomBit, b.children, b.parent, b.y});
    }
    r.stats = stats_;
    return r;
}

MatchResult match_all(const Nest& nest, std::span<const DetectionEvent> events, MatcherOptions options) {
    Matcher m(nest, std::move(options));
    m.add_events(events);
    return m.solve();
}

}  // namespace nm
