#pragma once

// The oscillating 1-Lipschitz graph built from stacked triangle waves, and
// the marked dyadic families it carries. All breakpoint values are exact
// rationals with denominator M * 2^(M*N), so endpoint and slope facts hold
// with zero tolerance; doubles appear only at geometry time.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "conical/dyadic.hpp"
#include "conical/geometry.hpp"

namespace conical {

struct GraphParams {
    int M = 3;           // number of wave components, >= 3
    int N = 2;           // per-component frequency exponent, >= 2
    double alpha = 0.0;  // cone aperture this graph is meant to feed

    /// True when the parameters satisfy the asymptotic relations the
    /// energy lower bounds are proved under. Desk-scale runs sit outside
    /// this regime on purpose; reports carry the flag along.
    bool paper_regime() const {
        if (alpha <= 0.0 || alpha >= kPi / 2.0) return false;
        int m_required = 100 * static_cast<int>(std::ceil(1.0 / alpha));
        double n_required = 100.0 * (1.0 + std::log2(1.0 / alpha));
        return M == m_required && N >= n_required;
    }
};

/// 1-Lipschitz triangle wave, period 4, even, h(0)=1, h(2)=-1.
inline double triangle_wave(double t) {
    double s = std::fmod(t, 4.0);
    if (s < 0.0) s += 4.0;
    return std::fabs(s - 2.0) - 1.0;
}

/// Component j of the graph: a triangle wave at frequency 2^(jN), scaled so
/// its Lipschitz constant is exactly 1/M.
inline double f_component(int j, double t, const GraphParams& p) {
    if (j < 1 || j > p.M) throw std::domain_error("f_component: j must satisfy 1 <= j <= M");
    double scale = std::ldexp(1.0, -j * p.N);
    return triangle_wave(t / scale) * scale / p.M;
}

namespace detail {

/// Numerator of h(m / 2^q) over denominator 2^q, exact.
inline std::int64_t triangle_wave_num(std::int64_t m, int q) {
    std::int64_t period = std::int64_t{1} << (q + 2);
    std::int64_t s = floor_mod(m, period);
    std::int64_t two = std::int64_t{1} << (q + 1);
    std::int64_t one = std::int64_t{1} << q;
    return std::llabs(s - two) - one;
}

}  // namespace detail

/// The built graph g on [-1,1] plus the families of marked dyadic
/// intervals. Immutable after construction; all queries are pure.
class GraphFamily {
  public:
    /// Builds g = (sum of f_j) shifted so g(-1) = g(1) = 0, the slope-marked
    /// families at levels j*N, and the leaf family at level (M+1)*N.
    /// `max_breakpoints` bounds the 2^(M*N+1)+1 grid points materialized.
    static GraphFamily build(const GraphParams& p, std::size_t max_breakpoints = (1u << 22)) {
        if (p.M < 3) throw std::invalid_argument("GraphParams: M must be >= 3");
        if (p.N < 2)
            throw std::invalid_argument(
                "GraphParams: N must be >= 2 (family counts degenerate below that)");
        GraphFamily gf;
        gf.params_ = p;
        gf.grid_level_ = p.M * p.N;
        if (gf.grid_level_ > 40)
            throw BudgetExceeded("graph grid level M*N = " + std::to_string(gf.grid_level_) +
                                 " exceeds exact-arithmetic range");
        std::int64_t half = std::int64_t{1} << gf.grid_level_;
        std::size_t points = static_cast<std::size_t>(2 * half + 1);
        if (points > max_breakpoints)
            throw BudgetExceeded("graph needs " + std::to_string(points) +
                                 " breakpoints, budget is " + std::to_string(max_breakpoints));

        // Exact numerators of the unshifted sum over denominator M * 2^(M*N).
        gf.values_.resize(points);
        for (std::int64_t m = -half; m <= half; ++m) {
            std::int64_t num = 0;
            for (int j = 1; j <= p.M; ++j) {
                int q = (p.M - j) * p.N;  // h argument is m / 2^q
                num += detail::triangle_wave_num(m, q);
            }
            gf.values_[static_cast<std::size_t>(m + half)] = num;
        }
        gf.shift_num_ = gf.values_.back();  // value at t = 1
        for (auto& v : gf.values_) v -= gf.shift_num_;

        // Slope-marked families: level-N cells inside [-1/2,1/2] where the
        // first component rises, then children where each next one does too.
        std::vector<std::int64_t> current;
        std::int64_t lo = -(std::int64_t{1} << (p.N - 1));
        for (std::int64_t idx = lo; idx < -lo; ++idx)
            if (rising_cell(idx)) current.push_back(idx);
        gf.families_.push_back(current);
        for (int j = 2; j <= p.M; ++j) {
            std::vector<std::int64_t> next;
            next.reserve(current.size() << (p.N - 1));
            for (std::int64_t parent : current) {
                std::int64_t base = parent << p.N;
                for (std::int64_t c = 0; c < (std::int64_t{1} << p.N); ++c)
                    if (rising_cell(base + c)) next.push_back(base + c);
            }
            gf.families_.push_back(next);
            current = std::move(next);
        }

        // Leaf family: every level-(M+1)N child of the deepest marked cells.
        gf.leaves_.reserve(current.size() << p.N);
        for (std::int64_t parent : current) {
            std::int64_t base = parent << p.N;
            for (std::int64_t c = 0; c < (std::int64_t{1} << p.N); ++c)
                gf.leaves_.push_back(base + c);
        }
        return gf;
    }

    const GraphParams& params() const { return params_; }
    int grid_level() const { return grid_level_; }
    std::int64_t grid_half() const { return std::int64_t{1} << grid_level_; }

    /// Exact numerator of g at grid point m*2^-grid_level, m in [-2^L, 2^L].
    /// The denominator is M * 2^grid_level.
    std::int64_t value_numerator(std::int64_t m) const {
        return values_[static_cast<std::size_t>(m + grid_half())];
    }
    std::int64_t shift_numerator() const { return shift_num_; }

    double value_at_grid(std::int64_t m) const {
        return std::ldexp(static_cast<double>(value_numerator(m)), -grid_level_) / params_.M;
    }

    /// Piecewise-linear evaluation anywhere on [-1,1].
    double operator()(double t) const {
        if (t <= -1.0) return value_at_grid(-grid_half());
        if (t >= 1.0) return value_at_grid(grid_half());
        double s = std::ldexp(t, grid_level_);
        double fl = std::floor(s);
        auto m = static_cast<std::int64_t>(fl);
        if (m == grid_half()) --m;
        double y0 = value_at_grid(m), y1 = value_at_grid(m + 1);
        return y0 + (s - fl) * (y1 - y0);
    }

    /// Integer slope: g' = slope_numerator / M on the grid cell with index m.
    std::int64_t slope_numerator(std::int64_t m) const {
        return value_numerator(m + 1) - value_numerator(m);
    }

    /// Marked family at level j*N (1 <= j <= M): cells in [-1/2,1/2] on
    /// which every component up to j rises.
    std::vector<DyadicInterval> family(int j) const {
        if (j < 1 || j > params_.M) throw std::domain_error("family: j out of range");
        std::vector<DyadicInterval> out;
        out.reserve(families_[static_cast<std::size_t>(j - 1)].size());
        for (auto idx : families_[static_cast<std::size_t>(j - 1)])
            out.push_back({j * params_.N, idx});
        return out;
    }

    std::size_t family_size(int j) const {
        if (j < 1 || j > params_.M) throw std::domain_error("family_size: j out of range");
        return families_[static_cast<std::size_t>(j - 1)].size();
    }

    /// Leaf intervals (level (M+1)*N), sorted by position; g has slope
    /// exactly 1 on each of them.
    std::vector<DyadicInterval> leaf_intervals() const {
        std::vector<DyadicInterval> out;
        out.reserve(leaves_.size());
        for (auto idx : leaves_) out.push_back({leaf_level(), idx});
        return out;
    }

    const std::vector<std::int64_t>& leaf_indices() const { return leaves_; }
    int leaf_level() const { return (params_.M + 1) * params_.N; }
    std::size_t leaf_count() const { return leaves_.size(); }

    double g_sup_norm() const {
        std::int64_t best = 0;
        for (auto v : values_) best = std::max(best, static_cast<std::int64_t>(std::llabs(v)));
        return std::ldexp(static_cast<double>(best), -grid_level_) / params_.M;
    }

    /// Partial sum of the first j components (unshifted).
    double partial_sum(int j, double t) const {
        if (j < 0 || j > params_.M) throw std::domain_error("partial_sum: j out of range");
        double s = 0.0;
        for (int i = 1; i <= j; ++i) s += f_component(i, t, params_);
        return s;
    }

    /// Tangent direction of the j-component partial graph at t. Errors on
    /// breakpoints of that partial graph (corners have no tangent).
    Direction tangent_direction(int j, double t) const {
        if (j < 1 || j > params_.M) throw std::domain_error("tangent_direction: j out of range");
        if (!(t > -1.0 && t < 1.0))
            throw std::domain_error("tangent_direction: t must be interior to (-1,1)");
        double s = std::ldexp(t, j * params_.N);
        if (s == std::floor(s))
            throw std::domain_error("tangent_direction: t lies on a grid breakpoint");
        std::int64_t slope_num = 0;
        for (int i = 1; i <= j; ++i) {
            auto cell = static_cast<std::int64_t>(std::floor(std::ldexp(t, i * params_.N)));
            slope_num += rising_cell(cell) ? 1 : -1;
        }
        return Direction(std::atan2(static_cast<double>(slope_num), static_cast<double>(params_.M)));
    }

    /// One segment per grid cell over (-1,1), in order.
    Polyline polyline() const {
        Polyline pl;
        pl.contiguous = true;
        std::int64_t half = grid_half();
        pl.segments.reserve(static_cast<std::size_t>(2 * half));
        for (std::int64_t m = -half; m < half; ++m) {
            Vec2 a{std::ldexp(static_cast<double>(m), -grid_level_), value_at_grid(m)};
            Vec2 b{std::ldexp(static_cast<double>(m + 1), -grid_level_), value_at_grid(m + 1)};
            pl.segments.push_back({a, b});
        }
        return pl;
    }

    /// Rising cells of the level-(i*N) wave: cell index 2 or 3 mod 4.
    static bool rising_cell(std::int64_t cell_index) {
        auto r = detail::floor_mod(cell_index, 4);
        return r == 2 || r == 3;
    }

  private:
    GraphParams params_;
    int grid_level_ = 0;
    std::vector<std::int64_t> values_;                 // shifted numerators
    std::int64_t shift_num_ = 0;                       // raw value at t = +-1
    std::vector<std::vector<std::int64_t>> families_;  // per j, sorted cell indices
    std::vector<std::int64_t> leaves_;                 // sorted leaf indices
};

}  // namespace conical
