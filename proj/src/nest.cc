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

#include "nestmatch/nest.h"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace nm {

namespace {

struct KindOffset {
    const char* kind;
    std::int32_t dx, dy, dt;
};

constexpr KindOffset kKinds[] = {
    {"x", 1, 0, 0}, {"y", 0, 1, 0}, {"t", 0, 0, 1}, {"xy", 1, 1, 0},
    {"xt", 1, 0, 1}, {"yt", 0, 1, 1}, {"xyt", 1, 1, 1},
};

void check_probability(const std::string& what, double p) {
    if (!(p > 0) || !(p < 1)) {
        throw std::invalid_argument(what + " probability must lie in (0, 1), got " + std::to_string(p));
    }
}

}  // namespace

LatticeSpec surface_code_like_spec(std::uint32_t lx, std::uint32_t ly, std::uint32_t rounds, double p) {
    LatticeSpec spec;
    spec.lx = lx;
    spec.ly = ly;
    spec.rounds = rounds;
    spec.stick_classes = {
        {"x", p}, {"y", p}, {"t", p}, {"xy", p / 4}, {"xt", p / 4}, {"yt", p / 4}, {"boundary", p},
    };
    return spec;
}

Nest Nest::lattice(const LatticeSpec& spec) {
    Nest nest;
    nest.lattice_ = true;
    nest.spec_ = spec;
    std::uint64_t balls = std::uint64_t{spec.lx} * spec.ly * spec.rounds;
    if (balls >= kBoundaryBall) {
        throw std::invalid_argument("lattice has too many balls for 32-bit ball ids");
    }
    nest.num_balls_ = balls;

    std::map<std::string, double> seen;
    for (const StickClass& c : spec.stick_classes) {
        check_probability("stick class '" + c.kind + "'", c.p);
        if (!seen.emplace(c.kind, c.p).second) {
            throw std::invalid_argument("duplicate stick class '" + c.kind + "'");
        }
        if (c.kind == "boundary") {
            nest.boundary_p_ = c.p;
            nest.boundary_w_ = weight_of(c.p);
            continue;
        }
        if (c.kind == "time_boundary") {
            nest.time_boundary_p_ = c.p;
            nest.time_boundary_w_ = weight_of(c.p);
            continue;
        }
        auto it = std::find_if(std::begin(kKinds), std::end(kKinds), [&](const KindOffset& k) { return c.kind == k.kind; });
        if (it == std::end(kKinds)) {
            throw std::invalid_argument("unknown stick class kind '" + c.kind + "'");
        }
        nest.dirs_.push_back({it->dx, it->dy, it->dt, c.p, weight_of(c.p)});
    }

    // Worst-case degree over every ball type the lattice can contain.
    std::size_t implied = 2 * nest.dirs_.size();
    bool has_x = seen.count("x") > 0;
    bool has_t = seen.count("t") > 0;
    if (nest.boundary_p_ && !has_x) implied += spec.lx == 1 ? 2 : 1;
    if (nest.time_boundary_p_ && !has_t) implied += spec.rounds == 1 ? 2 : 1;
    if (implied > spec.b_max) {
        throw std::invalid_argument("stick classes imply degree " + std::to_string(implied) + " > b_max " +
                                    std::to_string(spec.b_max));
    }
    nest.finish_params();
    return nest;
}

Nest Nest::explicit_graph(std::vector<Coords> balls, std::vector<Stick> sticks, std::uint32_t b_max) {
    Nest nest;
    nest.lattice_ = false;
    nest.num_balls_ = balls.size();
    nest.ball_coords_ = std::move(balls);
    nest.spec_.b_max = b_max;
    for (Stick& s : sticks) {
        check_probability("stick", s.p);
        s.w = weight_of(s.p);
        if (s.a >= nest.num_balls_ || (s.b != kBoundaryBall && s.b >= nest.num_balls_) || s.a == s.b) {
            throw std::invalid_argument("stick endpoint does not reference a valid ball");
        }
    }
    nest.sticks_ = std::move(sticks);
    std::vector<std::uint32_t> deg(nest.num_balls_ + 1, 0);
    for (const Stick& s : nest.sticks_) {
        deg[s.a]++;
        if (s.b != kBoundaryBall) deg[s.b]++;
    }
    for (std::size_t b = 0; b < nest.num_balls_; b++) {
        if (deg[b] > b_max) {
            throw std::invalid_argument("ball " + std::to_string(b) + " has degree " + std::to_string(deg[b]) +
                                        " > b_max " + std::to_string(b_max));
        }
    }
    nest.adj_start_.assign(nest.num_balls_ + 1, 0);
    for (std::size_t b = 0; b < nest.num_balls_; b++) nest.adj_start_[b + 1] = nest.adj_start_[b] + deg[b];
    std::vector<std::uint32_t> fill(nest.adj_start_.begin(), nest.adj_start_.end() - 1);
    nest.adj_sticks_.resize(nest.adj_start_.back());
    for (std::uint32_t k = 0; k < nest.sticks_.size(); k++) {
        const Stick& s = nest.sticks_[k];
        nest.adj_sticks_[fill[s.a]++] = k;
        if (s.b != kBoundaryBall) nest.adj_sticks_[fill[s.b]++] = k;
    }
    nest.finish_params();
    return nest;
}

Nest Nest::complete_graph(const std::vector<std::vector<double>>& pair, const std::vector<double>& boundary) {
    std::size_t n = boundary.size();
    std::vector<Coords> balls(n);
    for (std::size_t i = 0; i < n; i++) balls[i] = {static_cast<std::int32_t>(i), 0, 0};
    std::vector<Stick> sticks;
    for (std::size_t i = 0; i < n; i++) {
        if (std::isfinite(boundary[i])) sticks.push_back({BallId(i), kBoundaryBall, std::exp(-boundary[i]), 0});
        for (std::size_t j = i + 1; j < n; j++) {
            if (std::isfinite(pair[i][j])) sticks.push_back({BallId(i), BallId(j), std::exp(-pair[i][j]), 0});
        }
    }
    Nest nest = explicit_graph(std::move(balls), std::move(sticks), static_cast<std::uint32_t>(std::max<std::size_t>(n, 12)));
    // Keep the requested weights exactly instead of the exp/log round trip.
    for (Stick& s : nest.sticks_) s.w = s.b == kBoundaryBall ? boundary[s.a] : pair[s.a][s.b];
    nest.finish_params();
    return nest;
}

void Nest::finish_params() {
    params_ = NestParams{};
    params_.b_max = spec_.b_max;
    double p_max = 0, w_min = std::numeric_limits<double>::infinity(), w_max = 0;
    auto consider = [&](double p, double w) {
        p_max = std::max(p_max, p);
        w_min = std::min(w_min, w);
        w_max = std::max(w_max, w);
    };
    if (lattice_) {
        for (const Direction& d : dirs_) consider(d.p, d.w);
        if (boundary_p_) consider(*boundary_p_, boundary_w_);
        if (time_boundary_p_) consider(*time_boundary_p_, time_boundary_w_);
    } else {
        for (const Stick& s : sticks_) consider(s.p, s.w);
    }
    if (w_max == 0) {
        // No sticks at all; keep a finite tolerance scale.
        w_min = 1;
        w_max = 1;
    }
    params_.p_max = p_max;
    params_.w_min = w_min;
    params_.w_max = w_max;
    params_.R = static_cast<std::uint32_t>(std::ceil(w_max / w_min - 1e-12));
}

Coords Nest::coords(BallId b) const {
    if (!lattice_) return ball_coords_.at(b);
    std::int64_t lx = spec_.lx, ly = spec_.ly;
    return {static_cast<std::int32_t>(b % lx), static_cast<std::int32_t>((b / lx) % ly),
            static_cast<std::int32_t>(b / (lx * ly))};
}

std::optional<BallId> Nest::ball_at(std::int64_t x, std::int64_t y, std::int64_t t) const {
    if (!lattice_) throw std::logic_error("ball_at requires a lattice nest");
    if (x < 0 || y < 0 || t < 0 || x >= spec_.lx || y >= spec_.ly || t >= spec_.rounds) return std::nullopt;
    return static_cast<BallId>((t * spec_.ly + y) * spec_.lx + x);
}

std::size_t Nest::degree(BallId b) const {
    std::size_t d = 0;
    for_each_incident(b, [&](StickId, BallId, double) { d++; });
    return d;
}

std::size_t Nest::max_degree() const {
    std::size_t best = 0;
    if (!lattice_) {
        for (BallId b = 0; b < num_balls_; b++) best = std::max(best, degree(b));
        return best;
    }
    // Degree depends only on which faces a ball touches, so three representative positions per
    // axis cover every case.
    auto reps = [](std::uint32_t extent) {
        std::vector<std::int64_t> r;
        for (std::int64_t v : {std::int64_t{0}, std::int64_t{1}, std::int64_t(extent) - 1}) {
            if (v >= 0 && v < extent && std::find(r.begin(), r.end(), v) == r.end()) r.push_back(v);
        }
        return r;
    };
    for (auto t : reps(spec_.rounds))
        for (auto y : reps(spec_.ly))
            for (auto x : reps(spec_.lx)) best = std::max(best, degree(*ball_at(x, y, t)));
    return best;
}

std::size_t Nest::num_sticks() const {
    if (!lattice_) return sticks_.size();
    std::size_t count = 0;
    for_each_stick([&](StickId, const Stick&) { count++; });
    return count;
}

std::optional<Stick> Nest::stick(StickId id) const {
    if (!lattice_) {
        if (id >= sticks_.size()) return std::nullopt;
        return sticks_[id];
    }
    const StickId slots = slots_per_ball();
    StickId b = id / slots, s = id % slots;
    if (b >= num_balls_) return std::nullopt;
    Coords c = coords(static_cast<BallId>(b));
    std::size_t nd = dirs_.size();
    if (s < nd) {
        const Direction& d = dirs_[s];
        auto other = ball_at(std::int64_t{c.x} + d.dx, std::int64_t{c.y} + d.dy, std::int64_t{c.t} + d.dt);
        if (!other) return std::nullopt;
        return Stick{static_cast<BallId>(b), *other, d.p, d.w};
    }
    s -= nd;
    bool ok = false;
    double p = 0, w = 0;
    if (s < 2 && boundary_p_) {
        ok = s == 0 ? c.x == std::int32_t(spec_.lx) - 1 : c.x == 0;
        p = *boundary_p_;
        w = boundary_w_;
    } else if (s >= 2 && time_boundary_p_) {
        ok = s == 2 ? c.t == std::int32_t(spec_.rounds) - 1 : c.t == 0;
        p = *time_boundary_p_;
        w = time_boundary_w_;
    }
    if (!ok) return std::nullopt;
    return Stick{static_cast<BallId>(b), kBoundaryBall, p, w};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 over a combination of both inputs.
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

// Calls hit(k) for each index k in [0, count) selected by independent Bernoulli(p) trials,
// jumping between hits with geometric skips.
template <typename F>
void bernoulli_hits(std::mt19937_64& rng, std::uint64_t count, double p, F&& hit) {
    if (count == 0 || p <= 0) return;
    if (p >= 1) {
        for (std::uint64_t k = 0; k < count; k++) hit(k);
        return;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (p > 0.25) {
        for (std::uint64_t k = 0; k < count; k++) {
            if (unif(rng) < p) hit(k);
        }
        return;
    }
    const double log_q = std::log1p(-p);
    std::uint64_t k = 0;
    while (true) {
        double u = unif(rng);
        double skip = std::floor(std::log1p(-u) / log_q);
        if (skip >= double(count - k)) return;
        k += static_cast<std::uint64_t>(skip);
        hit(k);
        k++;
        if (k >= count) return;
    }
}

ErrorSample sample_lattice(const Nest& nest, std::optional<double> uniform_p, std::uint64_t seed) {
    ErrorSample sample;
    sample.seed = seed;
    std::mt19937_64 rng(seed);
    const auto& spec = nest.spec();
    const StickId slots = nest.slots_per_ball();
    const std::uint64_t balls = nest.num_balls();
    const auto& dirs = nest.directions();
    for (std::size_t k = 0; k < dirs.size(); k++) {
        double p = uniform_p.value_or(dirs[k].p);
        bernoulli_hits(rng, balls, p, [&](std::uint64_t b) {
            StickId id = b * slots + k;
            if (nest.stick(id)) sample.highlighted.push_back(id);
        });
    }
    const std::size_t nd = dirs.size();
    if (nest.boundary_p()) {
        double p = uniform_p.value_or(*nest.boundary_p());
        std::uint64_t faces = std::uint64_t{spec.ly} * spec.rounds;
        for (int side = 0; side < 2; side++) {
            std::uint32_t x = side == 0 ? spec.lx - 1 : 0;
            bernoulli_hits(rng, faces, p, [&](std::uint64_t k) {
                std::uint64_t y = k % spec.ly, t = k / spec.ly;
                BallId b = *nest.ball_at(x, y, t);
                sample.highlighted.push_back(StickId{b} * slots + nd + side);
            });
        }
    }
    if (nest.time_boundary_p()) {
        double p = uniform_p.value_or(*nest.time_boundary_p());
        std::uint64_t faces = std::uint64_t{spec.lx} * spec.ly;
        for (int side = 0; side < 2; side++) {
            std::uint32_t t = side == 0 ? spec.rounds - 1 : 0;
            bernoulli_hits(rng, faces, p, [&](std::uint64_t k) {
                BallId b = *nest.ball_at(k % spec.lx, k / spec.lx, t);
                sample.highlighted.push_back(StickId{b} * slots + nd + 2 + side);
            });
        }
    }
    std::sort(sample.highlighted.begin(), sample.highlighted.end());
    return sample;
}

ErrorSample sample_explicit(const Nest& nest, std::optional<double> uniform_p, std::uint64_t seed) {
    ErrorSample sample;
    sample.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    nest.for_each_stick([&](StickId id, const Stick& s) {
        double p = uniform_p.value_or(s.p);
        if (unif(rng) < p) sample.highlighted.push_back(id);
    });
    return sample;
}

}  // namespace

ErrorSample sample_errors(const Nest& nest, std::uint64_t seed) {
    return nest.is_lattice() ? sample_lattice(nest, std::nullopt, seed) : sample_explicit(nest, std::nullopt, seed);
}

ErrorSample sample_errors_uniform(const Nest& nest, double p, std::uint64_t seed) {
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("uniform probability must lie in [0, 1]");
    return nest.is_lattice() ? sample_lattice(nest, p, seed) : sample_explicit(nest, p, seed);
}

std::vector<DetectionEvent> detection_events(const Nest& nest, const ErrorSample& sample) {
    std::unordered_map<BallId, std::uint8_t> parity;
    parity.reserve(sample.highlighted.size() * 2);
    for (StickId id : sample.highlighted) {
        auto s = nest.stick(id);
        if (!s) throw std::invalid_argument("sample references stick " + std::to_string(id) + " not in nest");
        parity[s->a] ^= 1;
        if (s->b != kBoundaryBall) parity[s->b] ^= 1;
    }
    std::vector<DetectionEvent> events;
    for (auto [ball, odd] : parity) {
        if (odd) events.push_back({ball, nest.coords(ball).t});
    }
    std::sort(events.begin(), events.end(), [](const DetectionEvent& a, const DetectionEvent& b) { return a.ball < b.ball; });
    return events;
}

ErrorSample xor_samples(const ErrorSample& a, const ErrorSample& b) {
    ErrorSample out;
    std::set_symmetric_difference(a.highlighted.begin(), a.highlighted.end(), b.highlighted.begin(),
                                  b.highlighted.end(), std::back_inserter(out.highlighted));
    return out;
}

}  // namespace nm
