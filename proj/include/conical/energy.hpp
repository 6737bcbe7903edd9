#pragma once

// Conical-energy quadrature over a uniform measure-query interface. The
// integral of (mu(K(x,theta,alpha,r))/r)^p in d(log r) is evaluated on a
// geometric grid; because cone mass is monotone in r, consecutive grid
// masses give a certified envelope around the truncated integral, and
// interval-valued masses (from the lazy ball tree) widen that envelope
// instead of being silently collapsed.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "conical/en_set.hpp"
#include "conical/geometry.hpp"
#include "conical/jm_tree.hpp"
#include "conical/rng.hpp"

namespace conical {

struct EnergyQuadrature {
    double grid_ratio = 1.18920711500272107;  // 2^(1/4)
    double r_min = 0.0;                       // truncation scale, > 0 at evaluation
    double p = 1.0;                           // energy exponent
    double mass_tol = 1e-3;                   // relative tolerance for tree mass queries

    EnergyQuadrature() = default;
    EnergyQuadrature(double ratio, double rmin, double p_ = 1.0, double tol = 1e-3)
        : grid_ratio(ratio), r_min(rmin), p(p_), mass_tol(tol) {
        if (!(grid_ratio > 1.0)) throw std::invalid_argument("grid_ratio must exceed 1");
    }
};

class MeasureHandle {
  public:
    static MeasureHandle polyline(Polyline pl) {
        MeasureHandle m;
        m.impl_ = PolylineMeasure{std::move(pl)};
        return m;
    }
    static MeasureHandle en(std::shared_ptr<const EnSet> set) {
        MeasureHandle m;
        m.impl_ = EnMeasure{std::move(set)};
        return m;
    }
    static MeasureHandle jm(std::shared_ptr<const JmTree> tree, int depth_limit = -1) {
        MeasureHandle m;
        m.impl_ = JmMeasure{std::move(tree), depth_limit};
        return m;
    }

    bool is_en() const { return std::holds_alternative<EnMeasure>(impl_); }
    const EnSet& en_set() const { return *std::get<EnMeasure>(impl_).set; }
    const JmTree& jm_tree() const { return *std::get<JmMeasure>(impl_).tree; }

    /// Certified mass of the cone region. Polyline and layered-set masses
    /// are exact (lo == hi); ball-tree masses are pruned-recursion
    /// intervals at the requested tolerance.
    MassInterval cone_mass(const Cone& c, double tol = 1e-3,
                           const EnPoint* anchor = nullptr) const {
        return region_mass(c, tol, anchor);
    }

    MassInterval ball_mass(const Disc& b, double tol = 1e-3,
                           const EnPoint* anchor = nullptr) const {
        return region_mass(b, tol, anchor);
    }

    template <class Region>
    MassInterval region_mass(const Region& reg, double tol = 1e-3,
                             const EnPoint* anchor = nullptr) const {
        if (auto* pm = std::get_if<PolylineMeasure>(&impl_)) {
            double s = 0.0;
            for (const auto& seg : pm->pl.segments) s += clip_length(seg, reg);
            return {s, s, true};
        }
        if (auto* em = std::get_if<EnMeasure>(&impl_)) {
            double s = em->set->region_mass(reg, anchor);
            return {s, s, true};
        }
        const auto& jm = std::get<JmMeasure>(impl_);
        return jm.tree->global_mass(reg, tol, jm.depth_limit);
    }

    double total_mass() const {
        if (auto* pm = std::get_if<PolylineMeasure>(&impl_)) return pm->pl.arclength();
        if (auto* em = std::get_if<EnMeasure>(&impl_)) return em->set->total_mass();
        return 1.0;
    }

  private:
    struct PolylineMeasure {
        Polyline pl;
    };
    struct EnMeasure {
        std::shared_ptr<const EnSet> set;
    };
    struct JmMeasure {
        std::shared_ptr<const JmTree> tree;
        int depth_limit = -1;
    };

    MeasureHandle() = default;
    std::variant<PolylineMeasure, EnMeasure, JmMeasure> impl_;
};

struct EnergyResult {
    double value = 0.0;
    double err_bound = 0.0;
    double lo = 0.0;  // certified bracket of the truncated integral
    double hi = 0.0;
    bool mass_tol_met = true;
    double r_top = 0.0;
    double r_bottom = 0.0;  // truncation actually applied (first grid point <= r_min stops)
};

namespace detail {

template <class RegionAt>
EnergyResult energy_on_grid(double R, const EnergyQuadrature& quad, RegionAt&& mass_at) {
    if (!(quad.r_min > 0.0))
        throw std::invalid_argument("energy quadrature needs a positive truncation r_min");
    if (!(R > quad.r_min)) throw std::invalid_argument("energy: R must exceed r_min");

    std::vector<double> grid;
    for (double r = R; r > quad.r_min; r /= quad.grid_ratio) grid.push_back(r);
    grid.push_back(grid.back() / quad.grid_ratio);

    std::vector<MassInterval> mass(grid.size());
    bool tol_met = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mass[i] = mass_at(grid[i]);
        tol_met = tol_met && mass[i].tol_met;
    }

    double lnq = std::log(quad.grid_ratio);
    EnergyResult res;
    res.mass_tol_met = tol_met;
    res.r_top = grid.front();
    res.r_bottom = grid.back();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        res.value += std::pow(mass[i].mid() / grid[i], quad.p) * lnq;
        res.lo += std::pow(mass[i + 1].lo / grid[i], quad.p) * lnq;
        res.hi += std::pow(mass[i].hi / grid[i + 1], quad.p) * lnq;
    }
    res.err_bound = std::max(res.hi - res.value, res.value - res.lo);
    return res;
}

}  // namespace detail

/// Truncated conical energy at x in direction theta, evaluated on the
/// geometric grid r_i = R / q^i down to quad.r_min.
inline EnergyResult conical_energy(const MeasureHandle& m, Vec2 x, Direction theta, double alpha,
                                   double R, const EnergyQuadrature& quad,
                                   const EnPoint* anchor = nullptr) {
    return detail::energy_on_grid(R, quad, [&](double r) {
        return m.cone_mass(Cone(x, theta, alpha, r), quad.mass_tol, anchor);
    });
}

inline EnergyResult conical_energy(const MeasureHandle& m, const EnPoint& x, Direction theta,
                                   double alpha, double R, const EnergyQuadrature& quad) {
    return conical_energy(m, x.global(), theta, alpha, R, quad, &x);
}

/// Same grid with balls instead of cones: the radial upper envelope that
/// dominates every directional energy.
inline EnergyResult radial_energy(const MeasureHandle& m, Vec2 x, double R,
                                  const EnergyQuadrature& quad,
                                  const EnPoint* anchor = nullptr) {
    return detail::energy_on_grid(
        R, quad, [&](double r) { return m.ball_mass(Disc{x, r}, quad.mass_tol, anchor); });
}

struct DirectionScan {
    std::vector<double> thetas;
    std::vector<EnergyResult> energies;
    std::size_t min_index = 0;
    std::size_t max_index = 0;

    double min_value() const { return energies[min_index].value; }
    double max_value() const { return energies[max_index].value; }
    double min_theta() const { return thetas[min_index]; }
};

/// Energy minimized over a theta-grid on [0, pi). The grid step must be at
/// most alpha/8 so no cone position falls between samples.
inline DirectionScan direction_min_energy(const MeasureHandle& m, Vec2 x, double alpha, double R,
                                          const EnergyQuadrature& quad, double theta_step,
                                          const EnPoint* anchor = nullptr) {
    if (!(theta_step > 0.0 && theta_step <= alpha / 8.0 + 1e-12))
        throw std::invalid_argument("direction_min_energy: theta_step must be <= alpha/8");
    DirectionScan scan;
    auto count = static_cast<std::size_t>(std::ceil(kPi / theta_step - 1e-9));
    scan.thetas.reserve(count);
    scan.energies.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double theta = static_cast<double>(i) * theta_step;
        scan.thetas.push_back(theta);
        scan.energies.push_back(
            conical_energy(m, x, Direction(theta), alpha, R, quad, anchor));
        double v = scan.energies.back().value;
        if (v < scan.energies[scan.min_index].value) scan.min_index = i;
        if (v > scan.energies[scan.max_index].value) scan.max_index = i;
    }
    return scan;
}

inline DirectionScan direction_min_energy(const MeasureHandle& m, const EnPoint& x, double alpha,
                                          double R, const EnergyQuadrature& quad,
                                          double theta_step) {
    return direction_min_energy(m, x.global(), alpha, R, quad, theta_step, &x);
}

struct CarlesonStatistic {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
};

/// Monte-Carlo mean over arclength-sampled points in B of the
/// grid-minimized energy up to scale r(B): the quantity whose boundedness
/// over all balls the layered set violates.
inline CarlesonStatistic carleson_statistic(const MeasureHandle& m, const Disc& ball, double alpha,
                                            const EnergyQuadrature& quad, std::size_t samples,
                                            std::uint64_t seed, double theta_step) {
    if (!m.is_en())
        throw std::invalid_argument("carleson_statistic: layered-set measure required");
    if (samples < 1) throw std::invalid_argument("carleson_statistic: samples >= 1");
    const EnSet& set = m.en_set();
    Rng rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        EnPoint x = set.arclength_sample(rng);
        for (int guard = 0; !ball.contains(x.global()); ++guard) {
            if (guard > 100000)
                throw std::runtime_error("carleson_statistic: ball misses the set");
            x = set.arclength_sample(rng);
        }
        double v = direction_min_energy(m, x, alpha, ball.radius, quad, theta_step).min_value();
        sum += v;
        sum2 += v * v;
    }
    CarlesonStatistic st;
    st.samples = samples;
    st.mean = sum / static_cast<double>(samples);
    double var = std::max(0.0, sum2 / static_cast<double>(samples) - st.mean * st.mean);
    st.stderr_ = std::sqrt(var / static_cast<double>(samples));
    return st;
}

// ---- deep scale decomposition on the ball tree ------------------------------

struct JmDeepBlock {
    int k = 0;
    double cone_increment = 0.0;  // integral over (2 r_k, 4 r_k) of (cone mass / r)^p dr/r
    double ball_increment = 0.0;  // same with balls
    bool domination_ok = true;    // cone mass <= ball mass interval-wise at each grid point
    bool tol_met = true;
};

struct JmDeepResult {
    int k_start = 0;
    int k_max = 0;
    double pexp = 1.0;
    std::vector<JmDeepBlock> blocks;

    double cone_partial(int upto_k) const {
        double s = 0.0;
        for (const auto& b : blocks)
            if (b.k <= upto_k) s += b.cone_increment;
        return s;
    }
    double cone_total() const { return cone_partial(k_max); }
    bool domination_ok() const {
        for (const auto& b : blocks)
            if (!b.domination_ok) return false;
        return true;
    }
};

/// Accumulates the per-generation energy increments along an address: at
/// scale r_k only the subtree of the generation-(k-1) ball around the point
/// is queried, with masses expressed relative to that ball and rescaled via
/// the log-space mass tables. The scales covered are exactly the bands
/// (2 r_k, 4 r_k) that drive divergence at p=1 and summability at p=2.
inline JmDeepResult jm_energy_deep(const JmTree& tree, const JmAddress& address, Direction theta,
                                   double alpha, int k_max, double pexp, double mass_tol = 1e-3,
                                   int extra_depth = 26) {
    if (k_max + extra_depth > tree.max_generation())
        throw std::invalid_argument("jm_energy_deep: k_max exceeds the configured table limit");
    int k_start = 1 << n0_for(alpha, tree.params());
    if (k_start > k_max)
        throw std::invalid_argument("jm_energy_deep: k_max below the first admissible block 2^N0");
    if (static_cast<int>(address.path.size()) < k_max)
        throw std::invalid_argument("jm_energy_deep: address shorter than k_max");

    const double q = 1.18920711500272107;  // 2^(1/4): four cells per octave band
    const double lnq = std::log(q);
    JmDeepResult res;
    res.k_start = k_start;
    res.k_max = k_max;
    res.pexp = pexp;
    res.blocks.reserve(static_cast<std::size_t>(k_max - k_start + 1));

    for (int k = k_start; k <= k_max; ++k) {
        int g = k - 1;  // frame generation
        Vec2 x = tree.local_offset(address, g);
        double rho = tree.radius_ratio(g);          // r_k / r_{k-1}
        double scale = 2.0 * tree.mass_to_diameter_ratio(g);  // mu(B_{k-1}) / r_{k-1}

        JmDeepBlock blk;
        blk.k = k;
        double r_rel = 4.0 * rho;
        for (int cell = 0; cell < 4; ++cell) {
            MassInterval cm =
                tree.frame_mass(Cone(x, theta, alpha, r_rel), g, mass_tol, extra_depth);
            MassInterval bm = tree.frame_mass(Disc{x, r_rel}, g, mass_tol, extra_depth);
            blk.domination_ok = blk.domination_ok && cm.lo <= bm.lo + 1e-15 &&
                                cm.hi <= bm.hi + 1e-15;
            blk.tol_met = blk.tol_met && cm.tol_met && bm.tol_met;
            blk.cone_increment += std::pow(cm.mid() * scale / r_rel, pexp) * lnq;
            blk.ball_increment += std::pow(bm.mid() * scale / r_rel, pexp) * lnq;
            r_rel /= q;
        }
        res.blocks.push_back(blk);
    }
    return res;
}

}  // namespace conical
