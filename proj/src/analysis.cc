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

#include "nestmatch/analysis.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nestmatch/matcher.h"

namespace nm {

void validate_nav_params(const NavParams& q) {
    if (!(q.x > 0 && q.x < 1)) throw std::domain_error("n_av requires 0 < x < 1");
    if (!(q.A > 0 && q.A * q.x < 1)) throw std::domain_error("n_av requires A > 0 and A x < 1");
    if (!(q.b_max >= 1 && q.R >= 1)) throw std::domain_error("n_av requires b_max >= 1 and R >= 1");
    if (!(q.x * std::pow(q.b_max, q.R) < 1)) throw std::domain_error("n_av diverges: x b_max^R >= 1");
}

double compute_nav(const NavParams& q) {
    validate_nav_params(q);
    const double bR = std::pow(q.b_max, q.R);
    const double d = 1 - q.x * bR;
    return 2 * q.A * (1 - q.x) * q.x * bR * bR / (d * d);
}

std::uint32_t compute_R(const Nest& nest) {
    if (nest.num_sticks() == 0) throw std::invalid_argument("compute_R needs a nest with at least one stick");
    return nest.params().R;
}

ExponentialFit fit_exponential(const ClusterCounts& counts, std::uint64_t trials, std::uint64_t min_count) {
    ExponentialFit fit;
    std::vector<double> xs, ys;
    for (std::size_t s = 1; s < counts.size(); s++) {
        if (counts[s] < min_count || counts[s] == 0) continue;
        xs.push_back(static_cast<double>(s));
        ys.push_back(std::log(static_cast<double>(counts[s]) / static_cast<double>(std::max<std::uint64_t>(trials, 1))));
    }
    fit.points = xs.size();
    if (xs.size() < 2) return fit;
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); i++) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); i++) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); i++) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }
    fit.A = std::exp(intercept);
    fit.x = std::exp(slope);
    fit.r2 = syy > 0 ? 1 - ss_res / syy : 1;
    return fit;
}

ClusterHistogram cluster_stats(const Nest& nest, double p, std::uint64_t trials, std::uint64_t seed) {
    ClusterHistogram h;
    h.trials = trials;
    h.counts = cluster_histogram_parallel(nest, p, trials, seed);
    h.fit = fit_exponential(h.counts, trials);
    return h;
}

std::vector<double> survival(const ClusterCounts& counts) {
    std::vector<double> out(counts.size() + 1, 0);
    double total = 0;
    for (std::size_t s = 1; s < counts.size(); s++) total += static_cast<double>(counts[s]);
    if (total == 0) return out;
    double tail = 0;
    for (std::size_t s = counts.size(); s-- > 1;) {
        tail += static_cast<double>(counts[s]);
        out[s] = tail / total;
    }
    out[0] = 1;
    return out;
}

ScalingResult runtime_scaling(const ScalingConfig& config) {
    ScalingResult result;
    for (std::uint32_t L : config.sizes) {
        const std::uint32_t rounds = config.rounds ? config.rounds : L;
        const Nest nest = Nest::lattice(surface_code_like_spec(L, L, rounds, config.p));
        ScalingRow row;
        row.L = L;
        for (std::uint64_t s = 0; s < config.max_samples && row.n_events < config.min_events; s++) {
            const auto events = detection_events(nest, sample_errors(nest, derive_seed(config.seed + L, s)));
            const auto t0 = std::chrono::steady_clock::now();
            const MatchResult r = match_all(nest, events);
            row.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.n_events += events.size();
            (void)r;
        }
        row.per_event = row.n_events ? row.seconds / static_cast<double>(row.n_events) : 0;
        result.rows.push_back(row);
    }
    if (!result.rows.empty() && result.rows.front().per_event > 0) {
        result.ratio = result.rows.back().per_event / result.rows.front().per_event;
        result.within_bound = result.ratio <= config.max_ratio;
    }
    return result;
}

DenseInstance dense_instance(std::uint32_t n, std::uint64_t seed) {
    // Block side chosen so that events fill about half the block; the lattice adds a
    // margin wider than the block so boundary matches are never competitive.
    const auto side = static_cast<std::uint32_t>(std::ceil(std::cbrt(2.0 * std::max<std::uint32_t>(n, 1))));
    const std::uint32_t margin = 2 * side + 2;
    const std::uint32_t lx = side + 2 * margin;
    LatticeSpec spec = surface_code_like_spec(lx, side, side, 0.01);
    DenseInstance inst{Nest::lattice(spec), {}};
    std::mt19937_64 rng(seed);
    std::vector<BallId> block;
    for (std::uint32_t t = 0; t < side; t++) {
        for (std::uint32_t y = 0; y < side; y++) {
            for (std::uint32_t x = 0; x < side; x++) block.push_back(*inst.nest.ball_at(margin + x, y, t));
        }
    }
    std::shuffle(block.begin(), block.end(), rng);
    block.resize(std::min<std::size_t>(n, block.size()));
    std::sort(block.begin(), block.end());
    for (BallId b : block) inst.events.push_back({b, inst.nest.coords(b).t});
    return inst;
}

std::vector<DenseRow> dense_scaling(const std::vector<std::uint32_t>& sizes, std::uint32_t repeats, std::uint64_t seed) {
    std::vector<DenseRow> rows;
    for (std::uint32_t n : sizes) {
        DenseRow row{n, std::numeric_limits<double>::infinity()};
        for (std::uint32_t r = 0; r < std::max<std::uint32_t>(repeats, 1); r++) {
            const DenseInstance inst = dense_instance(n, derive_seed(seed + n, r));
            const auto t0 = std::chrono::steady_clock::now();
            match_all(inst.nest, inst.events);
            row.seconds = std::min(row.seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        rows.push_back(row);
    }
    return rows;
}

double loglog_slope(const std::vector<DenseRow>& rows) {
    if (rows.size() < 2) return 0;
    double mx = 0, my = 0;
    for (const DenseRow& r : rows) {
        mx += std::log(static_cast<double>(r.n));
        my += std::log(r.seconds);
    }
    mx /= static_cast<double>(rows.size());
    my /= static_cast<double>(rows.size());
    double sxx = 0, sxy = 0;
    for (const DenseRow& r : rows) {
        const double dx = std::log(static_cast<double>(r.n)) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(r.seconds) - my);
    }
    return sxy / sxx;
}

}  // namespace nm
