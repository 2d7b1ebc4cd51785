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

#ifndef NESTMATCH_NEST_H
#define NESTMATCH_NEST_H

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nm {

using BallId = std::uint32_t;
using StickId = std::uint64_t;

/// Sentinel ball id standing for the single distinguished boundary vertex.
inline constexpr BallId kBoundaryBall = std::numeric_limits<BallId>::max();

struct Coords {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t t = 0;
    bool operator==(const Coords&) const = default;
};

/// One probabilistic error mechanism. `b` is kBoundaryBall for boundary sticks.
struct Stick {
    BallId a = 0;
    BallId b = 0;
    double p = 0;
    double w = 0;
};

/// A family of translation-invariant sticks in a cuboid lattice.
///
/// Kinds: "x", "y", "t" (axial), "xy", "xt", "yt", "xyt" (space-time diagonals with all
/// offsets +1), "boundary" (sticks leaving the x = 0 and x = lx - 1 faces) and
/// "time_boundary" (sticks leaving the t = 0 and t = rounds - 1 faces).
struct StickClass {
    std::string kind;
    double p = 0;
};

struct LatticeSpec {
    std::uint32_t lx = 0;
    std::uint32_t ly = 0;
    std::uint32_t rounds = 0;
    std::vector<StickClass> stick_classes;
    std::uint64_t seed = 0;
    std::uint32_t b_max = 12;
};

/// Surface-code-like defaults: axial sticks with probability p, three diagonal classes with
/// p / 4 (giving degree 12 and R = 2 for p < 1/4) and x-face boundary sticks with probability p.
LatticeSpec surface_code_like_spec(std::uint32_t lx, std::uint32_t ly, std::uint32_t rounds, double p);

struct NestParams {
    std::uint32_t b_max = 12;
    double p_max = 0;
    double w_min = 0;
    double w_max = 0;
    std::uint32_t R = 0;
};

/// Space-time nest of balls joined by weighted sticks.
///
/// Two storage modes share one interface. Lattice nests never materialize their sticks,
/// so a nest spanning thousands of rounds costs O(1) memory; explicit nests store a CSR
/// adjacency and are used for hand-built graphs. A nest is immutable after construction.
class Nest {
   public:
    static Nest lattice(const LatticeSpec& spec);
    static Nest explicit_graph(std::vector<Coords> balls, std::vector<Stick> sticks, std::uint32_t b_max = 12);

    /// Builds an explicit nest whose ball i sits at coords (i, 0, 0), with one stick of weight
    /// `pair[i][j]` between every pair and one boundary stick of weight `boundary[i]` per ball.
    /// Infinite entries are omitted. Used to realize arbitrary metrics for tests.
    static Nest complete_graph(const std::vector<std::vector<double>>& pair, const std::vector<double>& boundary);

    std::size_t num_balls() const { return num_balls_; }
    Coords coords(BallId b) const;
    bool is_lattice() const { return lattice_; }
    const LatticeSpec& spec() const { return spec_; }

    /// Ball at lattice coordinates, or nullopt when out of range. Lattice nests only.
    std::optional<BallId> ball_at(std::int64_t x, std::int64_t y, std::int64_t t) const;

    std::size_t degree(BallId b) const;
    std::size_t max_degree() const;
    std::size_t num_sticks() const;

    /// Calls f(StickId, BallId other, double w) for every stick incident to `b`.
    template <typename F>
    void for_each_incident(BallId b, F&& f) const;

    /// Calls f(StickId, const Stick&) for every stick in the nest.
    template <typename F>
    void for_each_stick(F&& f) const;

    /// Stick by id; nullopt for ids that do not name a stick of this nest.
    std::optional<Stick> stick(StickId id) const;

    const NestParams& params() const { return params_; }

    /// Absolute tolerance used by every tightness comparison.
    double epsilon() const { return 1e-9 * params_.w_min; }

    // Lattice internals, exposed for the sampler.
    struct Direction {
        std::int32_t dx = 0, dy = 0, dt = 0;
        double p = 0, w = 0;
    };
    const std::vector<Direction>& directions() const { return dirs_; }
    std::size_t slots_per_ball() const { return dirs_.size() + 4; }
    std::optional<double> boundary_p() const { return boundary_p_; }
    std::optional<double> time_boundary_p() const { return time_boundary_p_; }

   private:
    Nest() = default;
    void finish_params();

    bool lattice_ = false;
    std::size_t num_balls_ = 0;
    LatticeSpec spec_;

    // Lattice mode. Slot layout per ball: [0, dirs) forward direction sticks, then high-x,
    // low-x, high-t and low-t boundary sticks.
    std::vector<Direction> dirs_;
    std::optional<double> boundary_p_;
    std::optional<double> time_boundary_p_;
    double boundary_w_ = 0;
    double time_boundary_w_ = 0;

    // Explicit mode.
    std::vector<Coords> ball_coords_;
    std::vector<Stick> sticks_;
    std::vector<std::uint32_t> adj_start_;
    std::vector<std::uint32_t> adj_sticks_;

    NestParams params_;
};

/// Bernoulli probability to stick weight.
inline double weight_of(double p) { return -std::log(p); }

template <typename F>
void Nest::for_each_incident(BallId b, F&& f) const {
    if (!lattice_) {
        for (std::uint32_t k = adj_start_[b]; k < adj_start_[b + 1]; k++) {
            const Stick& s = sticks_[adj_sticks_[k]];
            f(StickId{adj_sticks_[k]}, s.a == b ? s.b : s.a, s.w);
        }
        return;
    }
    const std::int64_t lx = spec_.lx, ly = spec_.ly, rounds = spec_.rounds;
    const std::int64_t x = b % lx;
    const std::int64_t y = (b / lx) % ly;
    const std::int64_t t = b / (lx * ly);
    const StickId slots = slots_per_ball();
    const StickId base = StickId{b} * slots;
    for (std::size_t k = 0; k < dirs_.size(); k++) {
        const Direction& d = dirs_[k];
        for (int sign = 1; sign >= -1; sign -= 2) {
            std::int64_t nx = x + sign * d.dx, ny = y + sign * d.dy, nt = t + sign * d.dt;
            bool in_range = nx >= 0 && nx < lx && ny >= 0 && ny < ly && nt >= 0 && nt < rounds;
            if (in_range) {
                BallId other = static_cast<BallId>((nt * ly + ny) * lx + nx);
                StickId id = sign > 0 ? base + k : StickId{other} * slots + k;
                f(id, other, d.w);
            }
        }
    }
    const StickId nd = dirs_.size();
    if (boundary_p_) {
        if (x == lx - 1) f(base + nd, kBoundaryBall, boundary_w_);
        if (x == 0) f(base + nd + 1, kBoundaryBall, boundary_w_);
    }
    if (time_boundary_p_) {
        if (t == rounds - 1) f(base + nd + 2, kBoundaryBall, time_boundary_w_);
        if (t == 0) f(base + nd + 3, kBoundaryBall, time_boundary_w_);
    }
}

template <typename F>
void Nest::for_each_stick(F&& f) const {
    if (!lattice_) {
        for (std::size_t k = 0; k < sticks_.size(); k++) f(StickId{k}, sticks_[k]);
        return;
    }
    const StickId slots = slots_per_ball();
    for (BallId b = 0; b < num_balls_; b++) {
        for (StickId s = 0; s < slots; s++) {
            auto st = stick(StickId{b} * slots + s);
            if (st) f(StickId{b} * slots + s, *st);
        }
    }
}

/// Highlighted sticks of one error realization, sorted ascending.
struct ErrorSample {
    std::vector<StickId> highlighted;
    std::uint64_t seed = 0;
};

struct DetectionEvent {
    BallId ball = 0;
    std::int32_t round = 0;
    bool operator==(const DetectionEvent&) const = default;
};

/// Highlights every stick independently with its own probability. Deterministic given the seed;
/// runs in time proportional to the number of highlighted sticks for lattice nests.
ErrorSample sample_errors(const Nest& nest, std::uint64_t seed);

/// Same as sample_errors but every stick is highlighted with the common probability `p`
/// (0 <= p <= 1), ignoring the per-stick probabilities.
ErrorSample sample_errors_uniform(const Nest& nest, double p, std::uint64_t seed);

/// Balls with odd highlighted-incidence parity, in ascending ball id, i.e. (t, y, x) order.
std::vector<DetectionEvent> detection_events(const Nest& nest, const ErrorSample& sample);

/// Symmetric difference of two highlight sets.
ErrorSample xor_samples(const ErrorSample& a, const ErrorSample& b);

/// Stateless 64-bit mixer used to derive per-trial seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace nm

#endif  // NESTMATCH_NEST_H
