#pragma once

// Lazy tree of the rotating-ball Cantor measure: every generation-k ball
// splits into M*(k+1) children lined up along a diameter whose direction
// steps through dyadic fractions of pi. Radii shrink super-exponentially,
// so absolute masses and coordinates live in log space / local frames; a
// ball only acquires absolute coordinates when a shallow query needs them.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "conical/geometry.hpp"

namespace conical {

struct JmParams {
    int M = 3;

    enum class BetaRule { reciprocal, constant };
    BetaRule rule = BetaRule::reciprocal;
    double beta_constant = 0.75;

    int depth_cap = 30;              // explicit node expansion limit
    int table_generations = 16512;   // precomputed ratio/angle tables

    /// Exponent sequence: strictly inside (1/2, 1), increasing to 1.
    double beta(int k) const {
        if (rule == BetaRule::constant) return beta_constant;
        return 1.0 - 1.0 / (2.0 * k + 2.0);
    }

    int m_k(int k) const { return M * k; }

    void validate() const {
        if (M < 3) throw std::invalid_argument("JmParams: M must be >= 3");
        if (rule == BetaRule::constant &&
            !(beta_constant > 0.5 && beta_constant < 1.0))
            throw std::invalid_argument("JmParams: beta must lie in (1/2, 1)");
    }
};

struct JmAddress {
    std::vector<int> path;  // entry i selects a child of the generation-i ball, in [0, m_{i+1})
};

struct BallNode {
    int generation = 0;
    Vec2 center{0.0, 0.0};
    double radius = 0.5;
    double axis_angle = 0.0;  // direction of the diameter this ball was placed on
    double log_mass = 0.0;    // ln mu(B) = -ln m(k)
    JmAddress address;
};

namespace detail {

inline double region_reach(const Cone& c) { return c.r_max; }
inline double region_reach(const Disc& d) { return d.radius; }
inline Vec2 region_center(const Cone& c) { return c.apex; }
inline Vec2 region_center(const Disc& d) { return d.center; }

}  // namespace detail

/// Certified bracket of a measure query.
struct MassInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool tol_met = true;

    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
};

class JmTree {
  public:
    explicit JmTree(JmParams p) : p_(p) {
        p_.validate();
        int n = std::max(p_.table_generations, p_.depth_cap + 8);
        ln_sigma_prefix_.resize(static_cast<std::size_t>(n) + 1);
        ln_m_.resize(static_cast<std::size_t>(n) + 1);
        ln_sigma_prefix_[0] = 0.0;
        ln_m_[0] = 0.0;
        for (int k = 1; k <= n; ++k) {
            ln_sigma_prefix_[k] = ln_sigma_prefix_[k - 1] + p_.beta(k) * std::log1p(1.0 / k);
            ln_m_[k] = ln_m_[k - 1] + std::log(static_cast<double>(p_.m_k(k)));
        }
    }

    const JmParams& params() const { return p_; }
    int max_generation() const { return static_cast<int>(ln_m_.size()) - 1; }

    double ln_sigma_prefix(int k) const { return ln_sigma_prefix_[static_cast<std::size_t>(k)]; }
    double ln_m(int k) const { return ln_m_[static_cast<std::size_t>(k)]; }
    double ln_r(int k) const { return ln_sigma_prefix(k) - ln_m(k) - std::log(2.0); }
    double radius_abs(int k) const { return std::exp(ln_r(k)); }

    /// r_{k+1} / r_k = sigma_{k+1} / m_{k+1}; an O(1/k) quantity, never
    /// underflows.
    double radius_ratio(int k) const {
        return std::exp(p_.beta(k + 1) * std::log1p(1.0 / (k + 1))) / p_.m_k(k + 1);
    }

    /// mu(B_k) / (2 r_k) = 1 / (sigma_1 ... sigma_k), evaluated in log space.
    double mass_to_diameter_ratio(int k) const { return std::exp(-ln_sigma_prefix(k)); }

    /// Direction (mod pi) of the diameter that generation-g balls are placed
    /// on: the accumulated rotation sum reduces to a dyadic fraction of pi.
    double placement_angle(int g) const {
        if (g < 1) return 0.0;
        int n = std::bit_width(static_cast<unsigned>(g)) - 1;  // floor(log2 g)
        std::int64_t block = std::int64_t{1} << n;
        std::int64_t a = (static_cast<std::int64_t>(g) - block + 1) & (block - 1);
        return static_cast<double>(a) * kPi / static_cast<double>(block);
    }

    BallNode root() const { return BallNode{}; }

    std::vector<BallNode> children(const BallNode& node) const {
        if (node.generation >= p_.depth_cap)
            throw std::runtime_error("JmTree: depth cap " + std::to_string(p_.depth_cap) +
                                     " exceeded");
        int k = node.generation;
        int m = p_.m_k(k + 1);
        double rc = node.radius * radius_ratio(k);
        double d = 2.0 * (node.radius - rc) / (m - 1);
        double angle = placement_angle(k + 1);
        Vec2 u{std::cos(angle), std::sin(angle)};
        double off = node.radius - rc;
        std::vector<BallNode> out;
        out.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            BallNode c;
            c.generation = k + 1;
            c.center = node.center + (i * d - off) * u;
            c.radius = rc;
            c.axis_angle = angle;
            c.log_mass = node.log_mass - std::log(static_cast<double>(m));
            c.address = node.address;
            c.address.path.push_back(i);
            out.push_back(std::move(c));
        }
        return out;
    }

    /// Center of the generation-k ball along the address (absolute
    /// coordinates; meaningful while r_k is representable).
    Vec2 point_at(const JmAddress& a, int k) const {
        if (static_cast<int>(a.path.size()) < k)
            throw std::invalid_argument("point_at: address shorter than requested generation");
        Vec2 c{0.0, 0.0};
        double radius = 0.5;
        for (int g = 0; g < k; ++g) {
            int m = p_.m_k(g + 1);
            int i = a.path[static_cast<std::size_t>(g)];
            if (i < 0 || i >= m)
                throw std::invalid_argument("point_at: address entry " + std::to_string(g) +
                                            " out of range [0," + std::to_string(m) + ")");
            double rc = radius * radius_ratio(g);
            double d = 2.0 * (radius - rc) / (m - 1);
            double angle = placement_angle(g + 1);
            Vec2 u{std::cos(angle), std::sin(angle)};
            c = c + (i * d - (radius - rc)) * u;
            radius = rc;
        }
        return c;
    }

    /// Offset of the address limit point from the generation-g center, in
    /// units of r_g. Works at any depth: only radius ratios enter.
    Vec2 local_offset(const JmAddress& a, int g) const {
        Vec2 off{0.0, 0.0};
        double scale = 1.0;  // r_j / r_g while descending
        int limit = static_cast<int>(a.path.size());
        for (int j = g; j < limit && scale > 1e-24; ++j) {
            int m = p_.m_k(j + 1);
            int i = a.path[static_cast<std::size_t>(j)];
            if (i < 0 || i >= m)
                throw std::invalid_argument("local_offset: address entry out of range");
            double ratio = radius_ratio(j);
            double d = 2.0 * (1.0 - ratio) / (m - 1);
            double angle = placement_angle(j + 1);
            Vec2 u{std::cos(angle), std::sin(angle)};
            off = off + scale * ((i * d - (1.0 - ratio)) * u);
            scale *= ratio;
        }
        return off;
    }

    /// Default descent: middle child at every generation (lower middle when
    /// the child count is even), which keeps the limit point at ball
    /// centers.
    JmAddress middle_address(int length) const {
        JmAddress a;
        a.path.reserve(static_cast<std::size_t>(length));
        for (int g = 0; g < length; ++g) a.path.push_back((p_.m_k(g + 1) - 1) / 2);
        return a;
    }

    // ---- certified mass queries -------------------------------------------

    /// Mass of the subtree of a generation-g ball inside `region`, in units
    /// of mu(B_g). The region is expressed in the frame of B_g: its center
    /// at the origin, lengths divided by r_g.
    template <class Region>
    MassInterval frame_mass(const Region& region, int frame_gen, double tol = 1e-3,
                            int extra_depth = 48) const {
        MassInterval mi;
        double cutoff = std::max(tol * 0.05, 1e-15);
        descend(region, frame_gen, Vec2{0.0, 0.0}, 1.0, 1.0, extra_depth, cutoff, mi);
        mi.tol_met = mi.width() <= tol * mi.hi + 1e-300;
        return mi;
    }

    /// Mass inside `region` in absolute coordinates (the whole measure has
    /// mass 1 on the ball of radius 1/2 at the origin).
    template <class Region>
    MassInterval global_mass(const Region& region, double tol = 1e-3,
                             int depth_limit = -1) const {
        MassInterval mi;
        double cutoff = std::max(tol * 0.05, 1e-15);
        int depth = depth_limit < 0 ? p_.depth_cap : depth_limit;
        descend(region, 0, Vec2{0.0, 0.0}, 0.5, 1.0, depth, cutoff, mi);
        mi.tol_met = mi.width() <= tol * mi.hi + 1e-300;
        return mi;
    }

  private:
    template <class Region>
    void descend(const Region& region, int gen, Vec2 center, double radius, double relmass,
                 int depth_left, double cutoff, MassInterval& mi) const {
        switch (classify_disc(region, Disc{center, radius})) {
            case DiscClass::outside: return;
            case DiscClass::inside:
                mi.lo += relmass;
                mi.hi += relmass;
                return;
            case DiscClass::straddle: break;
        }
        if (depth_left <= 0 || relmass <= cutoff || gen + 1 > max_generation()) {
            mi.hi += relmass;  // unresolved: certified as [0, relmass]
            return;
        }
        int m = p_.m_k(gen + 1);
        double rc = radius * radius_ratio(gen);
        double d = 2.0 * (radius - rc) / (m - 1);
        double angle = placement_angle(gen + 1);
        Vec2 u{std::cos(angle), std::sin(angle)};
        double off = radius - rc;
        double cm = relmass / m;

        // children centers sit on a line: only an index window can touch
        double tstar = dot(detail::region_center(region) - center, u);
        double reach = detail::region_reach(region) + rc;
        int ilo = 0, ihi = m - 1;
        if (std::isfinite(reach)) {
            double wlo = std::floor((tstar + off - reach) / d) - 1.0;
            double whi = std::ceil((tstar + off + reach) / d) + 1.0;
            if (whi < 0.0 || wlo > static_cast<double>(m - 1)) return;
            ilo = static_cast<int>(std::max(0.0, wlo));
            ihi = static_cast<int>(std::min(static_cast<double>(m - 1), whi));
        }
        for (int i = ilo; i <= ihi; ++i) {
            Vec2 cc = center + (i * d - off) * u;
            descend(region, gen + 1, cc, rc, cm, depth_left - 1, cutoff, mi);
        }
    }

    JmParams p_;
    std::vector<double> ln_sigma_prefix_;
    std::vector<double> ln_m_;
};

// ---- good indices (directional bookkeeping) --------------------------------

/// A generation k is good for direction theta if the accumulated rotation,
/// reduced modulo pi, lands within alpha/16 of theta.
inline bool is_good_index(int k, Direction theta, double alpha) {
    if (k < 1) throw std::domain_error("is_good_index: k must be >= 1");
    int n = std::bit_width(static_cast<unsigned>(k)) - 1;
    double block = std::ldexp(1.0, n);
    double angle = (static_cast<double>(k) - block + 1.0) * kPi / block;
    return std::fabs(angle - theta.theta()) <= alpha / 16.0;
}

/// Exhaustive count of good indices in the dyadic block [2^N, 2^{N+1}).
/// Requires the block to be fine enough to resolve alpha.
inline std::int64_t good_index_count(int N, Direction theta, double alpha) {
    if (!(std::ldexp(kPi, -N) < alpha / 100.0)) {
        int n0 = 0;
        while (!(std::ldexp(kPi, -n0) < alpha / 100.0)) ++n0;
        throw std::domain_error("good_index_count: block N=" + std::to_string(N) +
                                " too coarse for alpha; need N >= " + std::to_string(n0));
    }
    std::int64_t lo = std::int64_t{1} << N;
    std::int64_t count = 0;
    for (std::int64_t k = lo; k < 2 * lo; ++k)
        if (is_good_index(static_cast<int>(k), theta, alpha)) ++count;
    return count;
}

/// Smallest N0 such that (a) dyadic blocks beyond N0 resolve alpha and
/// (b) the radius drop r_{k+1}/r_k is below sin(alpha/50)/2 from 2^{N0} on.
inline int n0_for(double alpha, const JmParams& p) {
    if (!(alpha > 0.0 && alpha < kPi / 2.0))
        throw std::invalid_argument("n0_for: alpha must lie in (0, pi/2)");
    double bound = std::sin(alpha / 50.0) / 2.0;
    for (int n0 = 0; n0 < 62; ++n0) {
        if (!(std::ldexp(kPi, -n0) < alpha / 100.0)) continue;
        // sigma_{k+1}/m_{k+1} is decreasing in k, so checking the first
        // index of the block suffices
        auto k0 = std::int64_t{1} << n0;
        if (k0 > (std::int64_t{1} << 40)) break;
        double ratio = std::exp(p.beta(static_cast<int>(k0) + 1) *
                                std::log1p(1.0 / (static_cast<double>(k0) + 1.0))) /
                       (static_cast<double>(p.M) * (static_cast<double>(k0) + 1.0));
        if (ratio <= bound) return n0;
    }
    throw std::runtime_error("n0_for: no admissible N0 below 2^62");
}

/// True when alpha sits in the range the deep-scale analysis assumes;
/// larger apertures still run but reports carry a relaxed-regime flag.
inline bool jm_alpha_in_strict_range(double alpha) { return alpha > 0.0 && alpha < kPi / 100.0; }

// ---- structural audits ------------------------------------------------------

struct DisjointnessReport {
    int generation = 0;
    std::size_t balls = 0;
    std::size_t pairs_checked = 0;
    std::size_t cross_parent_overlaps = 0;
    std::string first_violation;
};

/// Enumerates a full generation and reports every pair of balls with
/// overlapping interiors that do not share a parent. The construction only
/// promises sibling overlaps for suitable M, so this is a checked
/// condition, not an assumption.
inline DisjointnessReport audit_disjointness(const JmTree& tree, int generation,
                                             std::size_t max_balls = 2'000'000) {
    struct Entry {
        Vec2 center;
        std::int64_t parent;
    };
    std::vector<Entry> balls{{Vec2{0.0, 0.0}, -1}};
    double radius = 0.5;
    for (int g = 0; g < generation; ++g) {
        int m = tree.params().m_k(g + 1);
        if (balls.size() * static_cast<std::size_t>(m) > max_balls)
            throw BudgetExceeded("disjointness audit would enumerate more than " +
                                 std::to_string(max_balls) + " balls");
        double rc = radius * tree.radius_ratio(g);
        double d = 2.0 * (radius - rc) / (m - 1);
        double angle = tree.placement_angle(g + 1);
        Vec2 u{std::cos(angle), std::sin(angle)};
        double off = radius - rc;
        std::vector<Entry> next;
        next.reserve(balls.size() * static_cast<std::size_t>(m));
        for (std::size_t bi = 0; bi < balls.size(); ++bi)
            for (int i = 0; i < m; ++i)
                next.push_back({balls[bi].center + (i * d - off) * u,
                                static_cast<std::int64_t>(bi)});
        balls = std::move(next);
        radius = rc;
    }

    DisjointnessReport rep;
    rep.generation = generation;
    rep.balls = balls.size();

    double cell = 2.0 * radius;
    auto key_of = [&](Vec2 c) {
        auto cx = static_cast<std::int64_t>(std::floor(c.x / cell));
        auto cy = static_cast<std::int64_t>(std::floor(c.y / cell));
        return (cx << 32) ^ (cy & 0xffffffffLL);
    };
    std::map<std::int64_t, std::vector<std::size_t>> grid;
    for (std::size_t i = 0; i < balls.size(); ++i) grid[key_of(balls[i].center)].push_back(i);

    double overlap_limit = 2.0 * radius * (1.0 - 1e-12);
    for (std::size_t i = 0; i < balls.size(); ++i) {
        auto cx = static_cast<std::int64_t>(std::floor(balls[i].center.x / cell));
        auto cy = static_cast<std::int64_t>(std::floor(balls[i].center.y / cell));
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid.find(((cx + dx) << 32) ^ ((cy + dy) & 0xffffffffLL));
                if (it == grid.end()) continue;
                for (std::size_t j : it->second) {
                    if (j <= i) continue;
                    ++rep.pairs_checked;
                    if (balls[i].parent == balls[j].parent) continue;
                    if (dist(balls[i].center, balls[j].center) < overlap_limit) {
                        ++rep.cross_parent_overlaps;
                        if (rep.first_violation.empty())
                            rep.first_violation = "balls " + std::to_string(i) + " and " +
                                                  std::to_string(j) + " of generation " +
                                                  std::to_string(generation);
                    }
                }
            }
    }
    return rep;
}

}  // namespace conical
