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

#ifndef NESTMATCH_ANALYSIS_H
#define NESTMATCH_ANALYSIS_H

#include <cstdint>
#include <vector>

#include "nestmatch/kernels.h"
#include "nestmatch/nest.h"

namespace nm {

/// Parameters of the nearby-chain bound: cluster-size decay A x^L, maximum degree and R.
struct NavParams {
    double A = 1;
    double x = 0;
    double b_max = 12;
    double R = 2;
};

/// Throws std::domain_error unless 0 < x < 1, A > 0, A x < 1, b_max >= 1, R >= 1 and
/// x b_max^R < 1.
void validate_nav_params(const NavParams& params);

/// Closed form of
///     2 sum_{Lv>=1} (1 - x) x^(Lv - 1) sum_{Lu>=1} b_max^(R (Lv + Lu)) A x^Lu
///   = 2 A (1 - x) x b_max^(2R) / (1 - x b_max^R)^2.
double compute_nav(const NavParams& params);

/// ceil(w_max / w_min) over the sticks of the nest. Throws for a nest without sticks.
std::uint32_t compute_R(const Nest& nest);

struct ExponentialFit {
    double A = 0;   // per-trial frequency prefactor
    double x = 0;   // decay base
    double r2 = 0;  // coefficient of determination of the log-linear fit
    std::size_t points = 0;
};

struct ClusterHistogram {
    ClusterCounts counts;  // counts[size]
    std::uint64_t trials = 0;
    ExponentialFit fit;
};

/// Least squares of log(count / trials) against size, over sizes with count >= min_count.
/// With fewer than two usable sizes the fit is left at zeros.
ExponentialFit fit_exponential(const ClusterCounts& counts, std::uint64_t trials, std::uint64_t min_count = 5);

/// Connected highlighted-stick component sizes over `trials` samples with every stick
/// highlighted with probability p, and an exponential fit of the histogram.
ClusterHistogram cluster_stats(const Nest& nest, double p, std::uint64_t trials, std::uint64_t seed);

/// Fraction of clusters with size >= s, for s = 0 .. counts.size().
std::vector<double> survival(const ClusterCounts& counts);

struct ScalingRow {
    std::uint32_t L = 0;
    std::uint64_t n_events = 0;
    double seconds = 0;
    double per_event = 0;  // seconds per detection event, 0 without events
};

struct ScalingConfig {
    std::vector<std::uint32_t> sizes{10, 20, 40, 80};
    double p = 0.005;
    std::uint32_t rounds = 0;            // 0: rounds = L
    std::uint64_t min_events = 20000;    // keep sampling each L until this many events were matched
    std::uint64_t max_samples = 1000;
    std::uint64_t seed = 1;
    double max_ratio = 1.5;
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
    double ratio = 0;  // per-event time at the largest L over the smallest L
    bool within_bound = false;
};

/// Matching time per detection event on surface-code-like lattices of increasing size.
ScalingResult runtime_scaling(const ScalingConfig& config);

/// Dense adversarial instance: n detection events packed into a compact block of a lattice
/// whose boundary is far away, so every event competes with every other.
struct DenseInstance {
    Nest nest;
    std::vector<DetectionEvent> events;
};
DenseInstance dense_instance(std::uint32_t n, std::uint64_t seed);

struct DenseRow {
    std::uint32_t n = 0;
    double seconds = 0;
};

/// Times match_all on dense instances (best of `repeats`) and fits the log-log slope.
std::vector<DenseRow> dense_scaling(const std::vector<std::uint32_t>& sizes, std::uint32_t repeats, std::uint64_t seed);
double loglog_slope(const std::vector<DenseRow>& rows);

}  // namespace nm

#endif  // NESTMATCH_ANALYSIS_H
