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

#include "nestmatch/oracle.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nestmatch/shortest_paths.h"

namespace nm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

EventMetric build_metric(const Nest& nest, std::span<const DetectionEvent> events) {
    const std::size_t n = events.size();
    EventMetric m;
    m.pair.assign(n, std::vector<double>(n, kInf));
    m.boundary.assign(n, kInf);
    PathWeights pw(nest);
    for (std::size_t i = 0; i < n; i++) {
        m.pair[i][i] = 0;
        if (auto d = pw.path_weight(events[i].ball, kBoundaryBall)) m.boundary[i] = *d;
        for (std::size_t j = i + 1; j < n; j++) {
            auto d = pw.path_weight(events[i].ball, events[j].ball);
            m.pair[i][j] = m.pair[j][i] = d ? *d : kInf;
        }
    }
    return m;
}

Matching brute_force_mwpm(const EventMetric& metric) {
    const std::size_t n = metric.size();
    if (n > kBruteForceLimit) {
        throw std::invalid_argument("brute_force_mwpm refuses instances with more than " +
                                    std::to_string(kBruteForceLimit) + " events");
    }
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;
    // best[mask]: minimum weight to match the events in `mask`; choice[mask]: partner of
    // the lowest event in `mask` (n means the boundary).
    std::vector<double> best(std::size_t{full} + 1, kInf);
    std::vector<std::uint8_t> choice(std::size_t{full} + 1, 0);
    best[0] = 0;
    for (std::uint32_t mask = 1; mask <= full && mask != 0; mask++) {
        const int i = std::countr_zero(mask);
        const std::uint32_t rest = mask & ~(std::uint32_t{1} << i);
        double b = kInf;
        std::uint8_t c = 0;
        if (metric.boundary[i] < kInf && best[rest] < kInf) {
            b = metric.boundary[i] + best[rest];
            c = static_cast<std::uint8_t>(n);
        }
        for (std::size_t j = i + 1; j < n; j++) {
            if (!(rest >> j & 1)) continue;
            const std::uint32_t sub = rest & ~(std::uint32_t{1} << j);
            const double v = metric.pair[i][j] + best[sub];
            if (v < b) {
                b = v;
                c = static_cast<std::uint8_t>(j);
            }
        }
        best[mask] = b;
        choice[mask] = c;
        if (mask == full) break;
    }
    if (best[full] == kInf) throw std::runtime_error("no perfect matching exists");

    Matching m;
    std::uint32_t mask = full;
    while (mask) {
        const int i = std::countr_zero(mask);
        const std::size_t c = choice[mask];
        mask &= ~(std::uint32_t{1} << i);
        if (c == n) {
            m.boundary_matches.push_back({static_cast<VertexId>(i), kBoundaryVertex, metric.boundary[i]});
        } else {
            m.pairs.push_back({static_cast<VertexId>(i), static_cast<VertexId>(c), metric.pair[i][c]});
            mask &= ~(std::uint32_t{1} << c);
        }
    }
    m.total_weight = best[full];
    return m;
}

Certificate check_certificate(const Matching& matching, const DualState& duals, const EventMetric& metric,
                              double eps) {
    Certificate cert;
    const std::size_t n = metric.size();
    auto fail = [&](bool& flag, const std::string& why) {
        flag = false;
        cert.diagnostics.push_back(why);
    };

    // Condition 1 and primal weight.
    std::vector<int> degree(n, 0);
    std::vector<VertexId> mate(n, kNoVertex);
    for (const MatchedEdge& e : matching.pairs) {
        if (e.a >= n || e.b >= n || e.a == e.b) {
            fail(cert.perfect, "matched pair references an unknown event");
            continue;
        }
        degree[e.a]++;
        degree[e.b]++;
        mate[e.a] = e.b;
        mate[e.b] = e.a;
        const double w = metric.pair[e.a][e.b];
        cert.primal += w;
        if (std::abs(w - e.weight) > eps) {
            fail(cert.weights_consistent, "pair " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                                              " reports weight " + fmt(e.weight) + " but the path weight is " + fmt(w));
        }
    }
    for (const MatchedEdge& e : matching.boundary_matches) {
        if (e.a >= n) {
            fail(cert.perfect, "boundary match references an unknown event");
            continue;
        }
        degree[e.a]++;
        mate[e.a] = kBoundaryVertex;
        const double w = metric.boundary[e.a];
        cert.primal += w;
        if (std::abs(w - e.weight) > eps) {
            fail(cert.weights_consistent, "boundary match of " + std::to_string(e.a) + " reports weight " +
                                              fmt(e.weight) + " but the path weight is " + fmt(w));
        }
    }
    for (std::size_t v = 0; v < n; v++) {
        if (degree[v] != 1) {
            fail(cert.perfect, "condition 1: event " + std::to_string(v) + " is matched " + std::to_string(degree[v]) +
                                   " times");
        }
    }

    // Dual structure.
    if (duals.singleton_y.size() != n) {
        fail(cert.laminar, "dual state lists " + std::to_string(duals.singleton_y.size()) + " singletons for " +
                               std::to_string(n) + " events");
    }
    for (std::size_t v = 0; v < duals.singleton_y.size(); v++) {
        cert.dual += duals.singleton_y[v];
        if (duals.singleton_y[v] < -eps) {
            fail(cert.nonnegative, "condition 3: singleton " + std::to_string(v) + " has y = " + fmt(duals.singleton_y[v]));
        }
    }
    std::vector<std::vector<char>> in_set;
    for (std::size_t s = 0; s < duals.blossoms.size(); s++) {
        const DualSet& set = duals.blossoms[s];
        cert.dual += set.y;
        if (set.y < -eps) fail(cert.nonnegative, "condition 3: set " + std::to_string(s) + " has y = " + fmt(set.y));
        std::vector<char> mask(n, 0);
        bool ok = set.members.size() >= 3 && set.members.size() % 2 == 1;
        for (VertexId v : set.members) {
            if (v >= n || mask[v]) {
                ok = false;
                continue;
            }
            mask[v] = 1;
        }
        if (!ok) fail(cert.laminar, "set " + std::to_string(s) + " is not an odd set of at least 3 distinct events");
        in_set.push_back(std::move(mask));
    }
    for (std::size_t s = 0; s < in_set.size(); s++) {
        for (std::size_t t = s + 1; t < in_set.size(); t++) {
            bool st = false, s_only = false, t_only = false;
            for (std::size_t v = 0; v < n; v++) {
                st |= in_set[s][v] && in_set[t][v];
                s_only |= in_set[s][v] && !in_set[t][v];
                t_only |= in_set[t][v] && !in_set[s][v];
            }
            if (st && s_only && t_only) {
                fail(cert.laminar, "sets " + std::to_string(s) + " and " + std::to_string(t) + " cross (not laminar)");
            }
        }
    }
    if (!cert.laminar || duals.singleton_y.size() != n) {
        cert.valid = false;
        cert.gap = cert.primal - cert.dual;
        return cert;
    }

    // Per-vertex membership lists.
    std::vector<std::vector<std::size_t>> sets_of(n);
    for (std::size_t s = 0; s < in_set.size(); s++) {
        for (std::size_t v = 0; v < n; v++) {
            if (in_set[s][v]) sets_of[v].push_back(s);
        }
    }
    auto cover = [&](std::size_t a, std::size_t b) {
        double c = duals.singleton_y[a] + duals.singleton_y[b];
        for (std::size_t s : sets_of[a]) {
            if (!in_set[s][b]) c += duals.blossoms[s].y;
        }
        for (std::size_t s : sets_of[b]) {
            if (!in_set[s][a]) c += duals.blossoms[s].y;
        }
        return c;
    };
    auto boundary_cover = [&](std::size_t a) {
        double c = duals.singleton_y[a];
        for (std::size_t s : sets_of[a]) c += duals.blossoms[s].y;
        return c;
    };

    // Condition 4 and tightness of matched edges.
    for (std::size_t a = 0; a < n; a++) {
        const double cb = boundary_cover(a);
        if (cb > metric.boundary[a] + eps) {
            fail(cert.edge_constraints, "condition 4: boundary edge of " + std::to_string(a) + " covered " + fmt(cb) +
                                            " > w = " + fmt(metric.boundary[a]));
        }
        if (mate[a] == kBoundaryVertex && std::abs(cb - metric.boundary[a]) > eps) {
            fail(cert.matched_tight, "matched boundary edge of " + std::to_string(a) + " is not tight");
        }
        for (std::size_t b = a + 1; b < n; b++) {
            const double c = cover(a, b);
            if (c > metric.pair[a][b] + eps) {
                fail(cert.edge_constraints, "condition 4: edge " + std::to_string(a) + "-" + std::to_string(b) +
                                                " covered " + fmt(c) + " > w = " + fmt(metric.pair[a][b]));
            }
            if (mate[a] == b && std::abs(c - metric.pair[a][b]) > eps) {
                fail(cert.matched_tight, "matched edge " + std::to_string(a) + "-" + std::to_string(b) + " is not tight");
            }
        }
    }

    // Condition 2 and slackness on listed sets (singletons are covered by condition 1).
    for (std::size_t s = 0; s < in_set.size(); s++) {
        int hair = 0;
        for (std::size_t v = 0; v < n; v++) {
            if (!in_set[s][v] || mate[v] == kNoVertex) continue;
            if (mate[v] == kBoundaryVertex || !in_set[s][mate[v]]) hair++;
        }
        if (hair < 1) fail(cert.odd_set_cover, "condition 2: set " + std::to_string(s) + " has no matched hair edge");
        if (duals.blossoms[s].y > eps && hair != 1) {
            fail(cert.set_slackness, "set " + std::to_string(s) + " has y > 0 but " + std::to_string(hair) +
                                         " matched hair edges");
        }
    }
    for (std::size_t v = 0; v < n; v++) {
        if (degree[v] < 1) cert.odd_set_cover = false;
    }

    cert.gap = cert.primal - cert.dual;
    const double tol = std::max<double>(1.0, static_cast<double>(n)) * eps;
    const bool gap_ok = std::abs(cert.gap) <= tol;
    if (!gap_ok) cert.diagnostics.push_back("primal-dual gap " + fmt(cert.gap) + " exceeds " + fmt(tol));
    cert.valid = gap_ok && cert.perfect && cert.odd_set_cover && cert.nonnegative && cert.edge_constraints &&
                 cert.laminar && cert.matched_tight && cert.set_slackness && cert.weights_consistent;
    return cert;
}

Certificate check_certificate(const Matching& matching, const DualState& duals, const Nest& nest,
                              std::span<const DetectionEvent> events) {
    return check_certificate(matching, duals, build_metric(nest, events), nest.epsilon());
}

TriangleReport check_triangle(const Nest& nest, std::span<const std::array<BallId, 3>> triples) {
    TriangleReport report;
    PathWeights pw(nest);
    const double eps = nest.epsilon();
    auto w = [&](BallId a, BallId b) {
        auto d = pw.path_weight(a, b);
        return d ? *d : kInf;
    };
    for (const auto& t : triples) {
        for (BallId b : t) {
            if (b >= nest.num_balls()) throw std::out_of_range("triangle check references a ball outside the nest");
        }
        report.checked++;
        const double ik = w(t[0], t[2]);
        const double ij = w(t[0], t[1]);
        const double jk = w(t[1], t[2]);
        if (ik > ij + jk + eps) report.violations.push_back(t);
    }
    return report;
}

TriangleReport check_triangle(const Nest& nest, std::size_t count, std::uint64_t seed) {
    if (nest.num_balls() == 0) return {};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<BallId> pick(0, static_cast<BallId>(nest.num_balls() - 1));
    std::vector<std::array<BallId, 3>> triples(count);
    for (auto& t : triples) t = {pick(rng), pick(rng), pick(rng)};
    return check_triangle(nest, triples);
}

}  // namespace nm
