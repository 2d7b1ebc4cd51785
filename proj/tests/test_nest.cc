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


#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "nestmatch/nest.h"
#include "nestmatch/shortest_paths.h"

namespace nm {
namespace {

LatticeSpec axial_spec(std::uint32_t lx, std::uint32_t ly, std::uint32_t rounds, double p) {
    LatticeSpec spec;
    spec.lx = lx;
    spec.ly = ly;
    spec.rounds = rounds;
    spec.stick_classes = {{"x", p}, {"y", p}, {"t", p}, {"boundary", p}};
    return spec;
}

TEST(Nest, SmallestLatticeHasOnlyBoundarySticks) {
    Nest nest = Nest::lattice(axial_spec(1, 1, 1, 0.01));
    EXPECT_EQ(nest.num_balls(), 1u);
    EXPECT_EQ(nest.num_sticks(), 2u);  // the x = 0 and x = lx - 1 faces coincide
    nest.for_each_stick([](StickId, const Stick& s) {
        EXPECT_EQ(s.a, 0u);
        EXPECT_EQ(s.b, kBoundaryBall);
    });
}

TEST(Nest, UniformInverseEGivesUnitWeights) {
    const double p = std::exp(-1.0);
    LatticeSpec spec = axial_spec(3, 3, 3, p);
    spec.stick_classes.push_back({"xy", p});
    Nest uniform = Nest::lattice(spec);
    std::size_t seen = 0;
    uniform.for_each_stick([&](StickId, const Stick& s) {
        EXPECT_DOUBLE_EQ(s.w, 1.0);
        seen++;
    });
    EXPECT_EQ(seen, uniform.num_sticks());
    EXPECT_GT(uniform.num_sticks(), 0u);
}

TEST(Nest, SurfaceCodeLikeDefaultsReachDegreeTwelveAndRTwo) {
    Nest nest = Nest::lattice(surface_code_like_spec(6, 6, 6, 0.01));
    EXPECT_EQ(nest.max_degree(), 12u);
    EXPECT_EQ(nest.params().b_max, 12u);
    EXPECT_EQ(nest.params().R, 2u);
    for (BallId b = 0; b < nest.num_balls(); b++) EXPECT_LE(nest.degree(b), 12u);
}

TEST(Nest, RejectsInvalidClasses) {
    LatticeSpec spec = axial_spec(2, 2, 2, 0.01);
    spec.stick_classes[0].p = 0;
    EXPECT_THROW(Nest::lattice(spec), std::invalid_argument);
    spec.stick_classes[0].p = 1;
    EXPECT_THROW(Nest::lattice(spec), std::invalid_argument);
    spec.stick_classes[0].p = -0.1;
    EXPECT_THROW(Nest::lattice(spec), std::invalid_argument);

    spec = axial_spec(2, 2, 2, 0.01);
    spec.stick_classes.push_back({"x", 0.02});
    EXPECT_THROW(Nest::lattice(spec), std::invalid_argument);

    spec = axial_spec(2, 2, 2, 0.01);
    spec.stick_classes.push_back({"zz", 0.02});
    EXPECT_THROW(Nest::lattice(spec), std::invalid_argument);

    spec = surface_code_like_spec(3, 3, 3, 0.01);
    spec.b_max = 10;
    EXPECT_THROW(Nest::lattice(spec), std::invalid_argument);
}

TEST(Nest, CoordsRoundTrip) {
    Nest nest = Nest::lattice(surface_code_like_spec(4, 3, 5, 0.01));
    std::set<std::tuple<int, int, int>> seen;
    for (BallId b = 0; b < nest.num_balls(); b++) {
        Coords c = nest.coords(b);
        EXPECT_EQ(nest.ball_at(c.x, c.y, c.t), b);
        EXPECT_TRUE(seen.emplace(c.x, c.y, c.t).second);
    }
    EXPECT_FALSE(nest.ball_at(4, 0, 0));
    EXPECT_FALSE(nest.ball_at(0, -1, 0));
}

TEST(Nest, StickEndpointsAreValid) {
    Nest nest = Nest::lattice(surface_code_like_spec(4, 4, 4, 0.02));
    const NestParams& params = nest.params();
    std::size_t count = 0;
    nest.for_each_stick([&](StickId id, const Stick& s) {
        EXPECT_LT(s.a, nest.num_balls());
        EXPECT_TRUE(s.b == kBoundaryBall || s.b < nest.num_balls());
        EXPECT_GE(s.w, params.w_min);
        EXPECT_LE(s.w, params.w_max);
        EXPECT_NEAR(s.w, -std::log(s.p), 1e-12);
        auto again = nest.stick(id);
        ASSERT_TRUE(again);
        EXPECT_EQ(again->a, s.a);
        count++;
    });
    EXPECT_EQ(count, nest.num_sticks());
    // Degrees agree with the incidence lists.
    std::vector<std::size_t> deg(nest.num_balls(), 0);
    nest.for_each_stick([&](StickId, const Stick& s) {
        deg[s.a]++;
        if (s.b != kBoundaryBall) deg[s.b]++;
    });
    for (BallId b = 0; b < nest.num_balls(); b++) EXPECT_EQ(deg[b], nest.degree(b));
}

TEST(Nest, TinyProbabilityExpectedHighlightCount) {
    Nest nest = Nest::lattice(surface_code_like_spec(4, 4, 4, 1e-12));
    double expected = 0;
    nest.for_each_stick([&](StickId, const Stick& s) { expected += s.p; });
    EXPECT_LT(expected, 1e-8);
    EXPECT_TRUE(sample_errors(nest, 42).highlighted.empty());
}

TEST(Nest, NearCertainStickIsHighlighted) {
    Nest nest = Nest::explicit_graph({{0, 0, 0}, {1, 0, 0}}, {{0, 1, 1 - 1e-15, 0}});
    for (std::uint64_t seed = 0; seed < 20; seed++) EXPECT_EQ(sample_errors(nest, seed).highlighted.size(), 1u);
}

TEST(Nest, SamplingIsDeterministic) {
    Nest nest = Nest::lattice(surface_code_like_spec(10, 10, 10, 0.01));
    ErrorSample a = sample_errors(nest, 5), b = sample_errors(nest, 5), c = sample_errors(nest, 6);
    EXPECT_EQ(a.highlighted, b.highlighted);
    EXPECT_NE(a.highlighted, c.highlighted);
    EXPECT_TRUE(std::is_sorted(a.highlighted.begin(), a.highlighted.end()));
}

TEST(Nest, SamplingMatchesStickProbabilities) {
    // Mean highlight count over many samples against sum p, within 5 standard errors.
    Nest nest = Nest::lattice(surface_code_like_spec(8, 8, 8, 0.02));
    double mean = 0, var = 0;
    nest.for_each_stick([&](StickId, const Stick& s) {
        mean += s.p;
        var += s.p * (1 - s.p);
    });
    const int trials = 400;
    double total = 0;
    for (int i = 0; i < trials; i++) total += sample_errors(nest, derive_seed(3, i)).highlighted.size();
    EXPECT_NEAR(total / trials, mean, 5 * std::sqrt(var / trials));
}

TEST(DetectionEvents, EmptySampleHasNoEvents) {
    Nest nest = Nest::lattice(surface_code_like_spec(4, 4, 4, 0.01));
    EXPECT_TRUE(detection_events(nest, ErrorSample{}).empty());
}

TEST(DetectionEvents, IsolatedSticks) {
    Nest nest = Nest::lattice(surface_code_like_spec(5, 5, 5, 0.01));
    nest.for_each_stick([&](StickId id, const Stick& s) {
        auto events = detection_events(nest, ErrorSample{{id}, 0});
        if (s.b == kBoundaryBall) {
            ASSERT_EQ(events.size(), 1u);
            EXPECT_EQ(events[0].ball, s.a);
        } else {
            ASSERT_EQ(events.size(), 2u);
            EXPECT_EQ(events[0].ball, std::min(s.a, s.b));
            EXPECT_EQ(events[1].ball, std::max(s.a, s.b));
        }
        for (const DetectionEvent& e : events) EXPECT_EQ(e.round, nest.coords(e.ball).t);
    });
}

TEST(DetectionEvents, ParityMatchesIncidenceCount) {
    Nest nest = Nest::lattice(surface_code_like_spec(6, 6, 6, 0.05));
    for (std::uint64_t seed = 0; seed < 20; seed++) {
        ErrorSample sample = sample_errors(nest, seed);
        std::vector<int> parity(nest.num_balls(), 0);
        std::size_t boundary_hits = 0;
        for (StickId id : sample.highlighted) {
            Stick s = *nest.stick(id);
            parity[s.a] ^= 1;
            if (s.b != kBoundaryBall) parity[s.b] ^= 1;
            else boundary_hits++;
        }
        std::vector<BallId> expected;
        for (BallId b = 0; b < nest.num_balls(); b++)
            if (parity[b]) expected.push_back(b);
        auto events = detection_events(nest, sample);
        ASSERT_EQ(events.size(), expected.size());
        for (std::size_t i = 0; i < events.size(); i++) EXPECT_EQ(events[i].ball, expected[i]);
        EXPECT_EQ(events.size() % 2, boundary_hits % 2);
    }
}

TEST(DetectionEvents, XorGivesSymmetricDifference) {
    Nest nest = Nest::lattice(surface_code_like_spec(6, 6, 6, 0.03));
    for (std::uint64_t seed = 0; seed < 10; seed++) {
        ErrorSample a = sample_errors(nest, seed), b = sample_errors(nest, seed + 100);
        auto ea = detection_events(nest, a), eb = detection_events(nest, b);
        std::set<BallId> diff;
        for (auto& e : ea) diff.insert(e.ball);
        for (auto& e : eb)
            if (!diff.erase(e.ball)) diff.insert(e.ball);
        auto ex = detection_events(nest, xor_samples(a, b));
        std::vector<BallId> got;
        for (auto& e : ex) got.push_back(e.ball);
        EXPECT_EQ(got, std::vector<BallId>(diff.begin(), diff.end()));
    }
}

TEST(DeriveSeed, DistinctAndStable) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; i++) seen.insert(derive_seed(7, i));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
    EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
}

TEST(Nest, BuildTimeScalesLinearly) {
    auto time_build = [](std::uint32_t rounds) {
        double best = 1e9;
        for (int r = 0; r < 3; r++) {
            auto t0 = std::chrono::steady_clock::now();
            Nest nest = Nest::lattice(surface_code_like_spec(64, 64, rounds, 0.01));
            std::size_t sticks = nest.num_sticks();
            double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            EXPECT_GT(sticks, 0u);
            best = std::min(best, dt);
        }
        return best;
    };
    double small = time_build(64), large = time_build(128);
    EXPECT_LT(large, 3 * small + 1e-3);
}

// Shortest paths.

// Every simple path from a to b, by depth-first enumeration.
double enumerate_paths(const Nest& nest, BallId a, BallId b) {
    std::vector<bool> on_path(nest.num_balls(), false);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(BallId, double)> dfs = [&](BallId u, double w) {
        if (u == b) {
            best = std::min(best, w);
            return;
        }
        if (u == kBoundaryBall) return;
        on_path[u] = true;
        nest.for_each_incident(u, [&](StickId, BallId v, double sw) {
            if (v != kBoundaryBall && on_path[v]) return;
            dfs(v, w + sw);
        });
        on_path[u] = false;
    };
    dfs(a, 0);
    return best;
}

Nest random_explicit(std::uint32_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> prob(0.01, 0.6);
    std::bernoulli_distribution coin(0.35);
    std::vector<Coords> balls(n);
    for (std::uint32_t i = 0; i < n; i++) balls[i] = {static_cast<std::int32_t>(i), 0, 0};
    std::vector<Stick> sticks;
    for (BallId i = 0; i < n; i++) {
        if (coin(rng)) sticks.push_back({i, kBoundaryBall, prob(rng), 0});
        for (BallId j = i + 1; j < n; j++)
            if (coin(rng)) sticks.push_back({i, j, prob(rng), 0});
    }
    return Nest::explicit_graph(std::move(balls), std::move(sticks), n + 1);
}

TEST(PathWeights, SelfIsZero) {
    Nest nest = Nest::lattice(surface_code_like_spec(4, 4, 4, 0.01));
    PathWeights pw(nest);
    EXPECT_EQ(pw.path_weight(5, 5), 0.0);
}

TEST(PathWeights, DetourBeatsDirectStick) {
    // 0 --1.0-- 1 directly, or 0 --0.4-- 2 --0.4-- 1.
    Nest nest = Nest::complete_graph({{0, 1.0, 0.4}, {1.0, 0, 0.4}, {0.4, 0.4, 0}},
                                     {INFINITY, INFINITY, INFINITY});
    PathWeights pw(nest);
    EXPECT_NEAR(*pw.path_weight(0, 1), 0.8, 1e-15);
}

TEST(PathWeights, UnreachableTargetIsReported) {
    Nest nest = Nest::explicit_graph({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 0.1, 0}});
    PathWeights pw(nest);
    EXPECT_FALSE(pw.path_weight(0, 2));
    EXPECT_FALSE(pw.path_weight(0, kBoundaryBall));
    EXPECT_TRUE(pw.path_weight(0, 1));
}

TEST(PathWeights, BoundaryIsASink) {
    // 0 and 1 both touch the boundary cheaply but are far apart: no path through v0.
    Nest nest = Nest::complete_graph({{0, 10.0}, {10.0, 0}}, {0.5, 0.5});
    PathWeights pw(nest);
    EXPECT_DOUBLE_EQ(*pw.path_weight(0, 1), 10.0);
    EXPECT_DOUBLE_EQ(*pw.path_weight(0, kBoundaryBall), 0.5);
}

TEST(PathWeights, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; trial++) {
        std::uint32_t n = 3 + trial % 8;
        Nest nest = random_explicit(n, rng);
        PathWeights pw(nest);
        for (BallId a = 0; a < n; a++) {
            for (BallId b = 0; b < n; b++) {
                double expected = a == b ? 0.0 : enumerate_paths(nest, a, b);
                auto got = pw.path_weight(a, b);
                if (std::isinf(expected)) {
                    EXPECT_FALSE(got);
                } else {
                    ASSERT_TRUE(got);
                    EXPECT_NEAR(*got, expected, 1e-12);
                }
            }
            double to_boundary = enumerate_paths(nest, a, kBoundaryBall);
            auto got = pw.path_weight(a, kBoundaryBall);
            if (std::isinf(to_boundary)) EXPECT_FALSE(got);
            else EXPECT_NEAR(*got, to_boundary, 1e-12);
        }
    }
}

TEST(PathWeights, SymmetricAndTriangleOnLattice) {
    Nest nest = Nest::lattice(surface_code_like_spec(5, 5, 4, 0.01));
    PathWeights pw(nest);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<BallId> pick(0, nest.num_balls() - 1);
    const double eps = nest.epsilon();
    for (int i = 0; i < 300; i++) {
        BallId u = pick(rng), v = pick(rng), w = pick(rng);
        double uv = *pw.path_weight(u, v), vu = *pw.path_weight(v, u);
        EXPECT_NEAR(uv, vu, eps);
        EXPECT_LE(uv, *pw.path_weight(u, w) + *pw.path_weight(w, v) + eps);
    }
}

TEST(DijkstraSearch, SettlesInDistanceOrder) {
    Nest nest = Nest::lattice(surface_code_like_spec(6, 6, 6, 0.01));
    DijkstraSearch s(nest, *nest.ball_at(3, 3, 3));
    s.expand_to(20.0);
    const auto& settled = s.settled();
    ASSERT_GT(settled.size(), 10u);
    for (std::size_t i = 1; i < settled.size(); i++) EXPECT_LE(settled[i - 1].dist, settled[i].dist);
    for (const auto& e : settled) EXPECT_LE(e.dist, 20.0);
    EXPECT_GT(s.frontier(), 20.0);
    EXPECT_THROW(DijkstraSearch(nest, static_cast<BallId>(nest.num_balls())), std::out_of_range);
}

}  // namespace
}  // namespace nm
