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

#include <algorithm>
#include <cmath>
#include <random>

#include "nestmatch/matcher.h"
#include "nestmatch/oracle.h"
#include "support.h"

namespace nm {
namespace {

using testing::small_events;
using testing::vertex_events;

EventMetric metric_of(std::vector<std::vector<double>> pair, std::vector<double> boundary) {
    return EventMetric{std::move(pair), std::move(boundary)};
}

// Independent enumeration: recursively pick a partner (or the boundary) for the lowest
// unmatched event. No memo, so it only runs on tiny inputs.
double enumerate_min(const EventMetric& m, std::vector<char>& used) {
    std::size_t i = 0;
    while (i < m.size() && used[i]) i++;
    if (i == m.size()) return 0;
    used[i] = 1;
    double best = m.boundary[i] + enumerate_min(m, used);
    for (std::size_t j = i + 1; j < m.size(); j++) {
        if (used[j]) continue;
        used[j] = 1;
        best = std::min(best, m.pair[i][j] + enumerate_min(m, used));
        used[j] = 0;
    }
    used[i] = 0;
    return best;
}

TEST(BruteForce, EmptyInstance) {
    Matching m = brute_force_mwpm(EventMetric{});
    EXPECT_EQ(m.total_weight, 0.0);
    EXPECT_TRUE(m.pairs.empty());
}

TEST(BruteForce, SingleEvent) {
    Matching m = brute_force_mwpm(metric_of({{0}}, {0.7}));
    ASSERT_EQ(m.boundary_matches.size(), 1u);
    EXPECT_DOUBLE_EQ(m.total_weight, 0.7);
}

TEST(BruteForce, FourEvents) {
    // Two cheap pairs (0.5 + 0.7) beat every boundary combination.
    EventMetric m = metric_of({{0, 0.5, 2, 2}, {0.5, 0, 2, 2}, {2, 2, 0, 0.7}, {2, 2, 0.7, 0}}, {1, 1, 1, 1});
    Matching best = brute_force_mwpm(m);
    EXPECT_NEAR(best.total_weight, 1.2, 1e-12);
    EXPECT_EQ(best.pairs, (std::vector<MatchedEdge>{{0, 1, 0.5}, {2, 3, 0.7}}));
}

TEST(BruteForce, TieGoesToBoundaryFirst) {
    Matching m = brute_force_mwpm(metric_of({{0, 2}, {2, 0}}, {1, 1}));
    EXPECT_EQ(m.boundary_matches.size(), 2u);
}

TEST(BruteForce, MatchesIndependentEnumeration) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> w(0.1, 5.0);
    for (int trial = 0; trial < 200; trial++) {
        std::size_t n = 1 + trial % 8;
        EventMetric m;
        m.pair.assign(n, std::vector<double>(n, 0));
        m.boundary.resize(n);
        for (std::size_t i = 0; i < n; i++) {
            m.boundary[i] = w(rng);
            for (std::size_t j = i + 1; j < n; j++) m.pair[i][j] = m.pair[j][i] = w(rng);
        }
        std::vector<char> used(n, 0);
        EXPECT_NEAR(brute_force_mwpm(m).total_weight, enumerate_min(m, used), 1e-12);
    }
}

TEST(BruteForce, RefusesLargeInstances) {
    EventMetric m;
    m.pair.assign(kBruteForceLimit + 1, std::vector<double>(kBruteForceLimit + 1, 1));
    m.boundary.assign(kBruteForceLimit + 1, 1);
    EXPECT_THROW(brute_force_mwpm(m), std::invalid_argument);
}

TEST(BuildMetric, UsesNestPathWeights) {
    Nest nest = Nest::complete_graph({{0, 1.0, 3.0}, {1.0, 0, 1.5}, {3.0, 1.5, 0}}, {0.9, 4, 4});
    EventMetric m = build_metric(nest, vertex_events(3));
    EXPECT_DOUBLE_EQ(m.pair[0][2], 2.5);  // shorter through vertex 1
    EXPECT_DOUBLE_EQ(m.boundary[2], 3.4);  // via vertex 1 and its cheap boundary stick
    EXPECT_DOUBLE_EQ(m.boundary[1], 1.9);
}

TEST(Certificate, AcceptsMatcherOutput) {
    Nest nest = Nest::lattice(surface_code_like_spec(6, 6, 6, 0.01));
    for (std::uint64_t seed = 0; seed < 30; seed++) {
        auto events = small_events(nest, seed);
        MatchResult r = match_all(nest, events);
        Certificate c = check_certificate(r.matching, r.duals, nest, events);
        EXPECT_TRUE(c.valid);
        EXPECT_LE(std::abs(c.gap), events.size() * nest.epsilon() + 1e-12);
    }
}

TEST(Certificate, CorruptedDualFlagsEdgeConstraint) {
    Nest nest = Nest::complete_graph({{0, 1.0}, {1.0, 0}}, {5, 5});
    auto events = vertex_events(2);
    MatchResult r = match_all(nest, events);
    r.duals.singleton_y[0] += 0.5;
    Certificate c = check_certificate(r.matching, r.duals, nest, events);
    EXPECT_FALSE(c.valid);
    EXPECT_FALSE(c.edge_constraints);
    bool named = std::any_of(c.diagnostics.begin(), c.diagnostics.end(),
                             [](const std::string& d) { return d.find("condition 4") != std::string::npos; });
    EXPECT_TRUE(named);
}

TEST(Certificate, FlagsUnmatchedAndNegative) {
    EventMetric m = metric_of({{0, 1}, {1, 0}}, {5, 5});
    Matching empty;
    DualState duals{{-1.0, 0.0}, {}};
    Certificate c = check_certificate(empty, duals, m, 1e-9);
    EXPECT_FALSE(c.perfect);
    EXPECT_FALSE(c.nonnegative);
    EXPECT_FALSE(c.valid);
}

TEST(Certificate, FlagsNonLaminarSets) {
    EventMetric m;
    m.pair.assign(5, std::vector<double>(5, 1));
    m.boundary.assign(5, 5);
    Matching mm{{{0, 1, 1}, {2, 3, 1}}, {{4, kBoundaryVertex, 5}}, 7};
    DualState duals{{0, 0, 0, 0, 0}, {{{0, 1, 2}, 0}, {{2, 3, 4}, 0}}};
    Certificate c = check_certificate(mm, duals, m, 1e-9);
    EXPECT_FALSE(c.laminar);
}

TEST(Certificate, WeakDualityOnFeasibleDuals) {
    // Any feasible dual bounds every perfect matching from below.
    std::mt19937_64 rng(11);
    Nest nest = Nest::lattice(surface_code_like_spec(6, 6, 6, 0.01));
    for (std::uint64_t seed = 0; seed < 20; seed++) {
        auto events = small_events(nest, seed, 8);
        if (events.empty()) continue;
        EventMetric metric = build_metric(nest, events);
        MatchResult r = match_all(nest, events);
        DualState scaled = r.duals;
        for (double& y : scaled.singleton_y) y *= 0.5;
        for (auto& s : scaled.blossoms) s.y *= 0.5;
        Matching any = brute_force_mwpm(metric);
        std::shuffle(any.pairs.begin(), any.pairs.end(), rng);
        EXPECT_LE(scaled.objective(), brute_force_mwpm(metric).total_weight + 1e-12);
        EXPECT_LE(r.duals.objective(), any.total_weight + events.size() * nest.epsilon());
    }
}

TEST(Triangle, HoldsOnSampledTriples) {
    Nest nest = Nest::lattice(surface_code_like_spec(6, 6, 6, 0.005));
    TriangleReport report = check_triangle(nest, 500, 3);
    EXPECT_EQ(report.checked, 500u);
    EXPECT_TRUE(report.ok());
}

TEST(Triangle, DegenerateTriples) {
    Nest nest = Nest::lattice(surface_code_like_spec(4, 4, 4, 0.01));
    std::vector<std::array<BallId, 3>> triples{{0, 0, 0}, {0, 5, 0}, {3, 3, 7}};
    TriangleReport report = check_triangle(nest, triples);
    EXPECT_EQ(report.checked, triples.size());
    EXPECT_TRUE(report.ok());
    std::vector<std::array<BallId, 3>> outside{{0, 1, 9999}};
    EXPECT_THROW(check_triangle(nest, outside), std::out_of_range);
}

}  // namespace
}  // namespace nm
