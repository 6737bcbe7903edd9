#pragma once

// Planar primitives for cone-energy computations: directions (lines through
// the origin), two-sided open cones with optional inner/outer truncation,
// similarity maps built from eighth-turn rotations, and exact arclength
// clipping of segments against cones and discs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace conical {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtHalf = 0.70710678118654752440;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

/// Direction of an unoriented line, stored as an angle in [0, pi).
class Direction {
  public:
    Direction() = default;
    explicit Direction(double theta) : theta_(normalize(theta)) {}

    double theta() const { return theta_; }
    Vec2 unit() const { return {std::cos(theta_), std::sin(theta_)}; }

    Direction rotated(double delta) const { return Direction(theta_ + delta); }

    static double normalize(double t) {
        t = std::fmod(t, kPi);
        if (t < 0.0) t += kPi;
        if (t >= kPi) t = 0.0;  // fmod can land exactly on pi
        return t;
    }

  private:
    double theta_ = 0.0;
};

/// Angle between two lines, folded into [0, pi/2].
inline double angle_between(Direction a, Direction b) {
    double d = std::fabs(a.theta() - b.theta());
    if (d > kPi / 2.0) d = kPi - d;
    return d;
}

struct Segment {
    Vec2 a;
    Vec2 b;

    double length() const { return dist(a, b); }
    Vec2 at(double t) const { return a + t * (b - a); }
    Vec2 midpoint() const { return at(0.5); }
};

/// Ordered chain of segments. `contiguous` records whether consecutive
/// segments share endpoints (a curve) as opposed to a loose collection.
struct Polyline {
    std::vector<Segment> segments;
    bool contiguous = true;

    double arclength() const {
        double s = 0.0;
        for (const auto& seg : segments) s += seg.length();
        return s;
    }
};

/// Orientation-preserving similarity tau o rho^k o delta: rotation by
/// quarter_turns * pi/4, dilation by `scale`, then translation. Rotation
/// matrix entries come from an exact {0, +-1, +-sqrt(2)/2} table so that
/// composed powers do not drift.
struct Similarity {
    int quarter_turns = 0;
    double scale = 1.0;
    Vec2 translate{0.0, 0.0};

    static Vec2 rotate(int k, Vec2 p) {
        static constexpr double kCos[8] = {1.0, kSqrtHalf,  0.0, -kSqrtHalf,
                                           -1.0, -kSqrtHalf, 0.0, kSqrtHalf};
        static constexpr double kSin[8] = {0.0, kSqrtHalf,  1.0, kSqrtHalf,
                                           0.0, -kSqrtHalf, -1.0, -kSqrtHalf};
        int i = ((k % 8) + 8) % 8;
        return {kCos[i] * p.x - kSin[i] * p.y, kSin[i] * p.x + kCos[i] * p.y};
    }

    Vec2 operator()(Vec2 p) const { return translate + rotate(quarter_turns, scale * p); }

    Segment operator()(const Segment& s) const { return {(*this)(s.a), (*this)(s.b)}; }

    Polyline operator()(const Polyline& p) const {
        Polyline out;
        out.contiguous = p.contiguous;
        out.segments.reserve(p.segments.size());
        for (const auto& s : p.segments) out.segments.push_back((*this)(s));
        return out;
    }

    Direction operator()(Direction d) const {
        return d.rotated(quarter_turns * (kPi / 4.0));
    }

    /// Composition: (s2 * s1)(p) = s2(s1(p)).
    friend Similarity operator*(const Similarity& s2, const Similarity& s1) {
        Similarity r;
        r.quarter_turns = s2.quarter_turns + s1.quarter_turns;
        r.scale = s2.scale * s1.scale;
        r.translate = s2.translate + rotate(s2.quarter_turns, s2.scale * s1.translate);
        return r;
    }

    Similarity inverse() const {
        Similarity r;
        r.quarter_turns = -quarter_turns;
        r.scale = 1.0 / scale;
        r.translate = rotate(-quarter_turns, (-1.0 / scale) * translate);
        return r;
    }
};

/// Two-sided open cone around the line `dir` through `apex`, with aperture
/// alpha in (0, pi/2) and radial truncation r_min < |y-apex| <= r_max.
/// Membership is strict in the angular test and at r_min, non-strict at
/// r_max; these boundaries are arclength-null for the measures we clip.
struct Cone {
    Vec2 apex;
    Direction dir;
    double aperture = 0.0;
    double r_min = 0.0;
    double r_max = kInf;

    Cone() = default;
    Cone(Vec2 apex_, Direction dir_, double aperture_, double r_max_ = kInf,
         double r_min_ = 0.0)
        : apex(apex_), dir(dir_), aperture(aperture_), r_min(r_min_), r_max(r_max_) {
        if (!(aperture > 0.0 && aperture < kPi / 2.0))
            throw std::invalid_argument("cone aperture must lie in (0, pi/2)");
        if (!(r_min >= 0.0) || !(r_max > r_min))
            throw std::invalid_argument("cone radii must satisfy 0 <= r_min < r_max");
        sin_aperture_ = std::sin(aperture);
    }

    double sin_aperture() const { return sin_aperture_; }

    /// Twice-truncated variant sharing apex/axis/aperture.
    Cone truncated(double rmin, double rmax) const {
        return Cone(apex, dir, aperture, rmax, rmin);
    }

  private:
    double sin_aperture_ = 0.0;
};

inline Cone apply(const Similarity& s, const Cone& c) {
    return Cone(s(c.apex), s(c.dir), c.aperture,
                c.r_max == kInf ? kInf : c.r_max * s.scale, c.r_min * s.scale);
}

inline bool cone_contains(const Cone& c, Vec2 y) {
    Vec2 w = y - c.apex;
    double r = norm(w);
    if (!(r > c.r_min) || !(r <= c.r_max)) return false;
    double d = std::fabs(cross(c.dir.unit(), w));
    return d < c.sin_aperture() * r;
}

/// Closed disc, used both as a query region (mu(B(x,r))) and as a bounding
/// volume in tree traversals.
struct Disc {
    Vec2 center;
    double radius = 0.0;

    bool contains(Vec2 y) const { return dist(center, y) <= radius; }
};

enum class DiscClass { inside, outside, straddle };

/// Conservative classification of a disc against a cone: `inside` certifies
/// every disc point is a strict cone member, `outside` certifies none is.
inline DiscClass classify_disc(const Cone& c, const Disc& d) {
    Vec2 w = d.center - c.apex;
    double dc = norm(w);
    double rho = d.radius;
    if (dc - rho > c.r_max) return DiscClass::outside;
    if (dc + rho <= c.r_min) return DiscClass::outside;
    double dl = std::fabs(cross(c.dir.unit(), w));
    double s = c.sin_aperture();
    if (dl - rho >= s * (dc + rho)) return DiscClass::outside;
    if (dc - rho > c.r_min && dc + rho <= c.r_max && dl + rho < s * (dc - rho))
        return DiscClass::inside;
    return DiscClass::straddle;
}

inline DiscClass classify_disc(const Disc& ball, const Disc& d) {
    double dc = dist(ball.center, d.center);
    if (dc - d.radius > ball.radius) return DiscClass::outside;
    if (dc + d.radius <= ball.radius) return DiscClass::inside;
    return DiscClass::straddle;
}

namespace detail {

/// Collects real roots of a*t^2 + b*t + c in (0,1) into `out`.
inline void quadratic_roots_in_unit(double a, double b, double c,
                                    std::vector<double>& out) {
    const double tiny = 1e-300;
    if (std::fabs(a) < tiny * std::max(std::fabs(b), std::fabs(c))) {
        if (std::fabs(b) > 0.0) {
            double t = -c / b;
            if (t > 0.0 && t < 1.0) out.push_back(t);
        }
        return;
    }
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return;
    double sq = std::sqrt(disc);
    double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    double t1 = q / a;
    if (t1 > 0.0 && t1 < 1.0) out.push_back(t1);
    if (q != 0.0) {
        double t2 = c / q;
        if (t2 > 0.0 && t2 < 1.0) out.push_back(t2);
    }
}

}  // namespace detail

/// Exact 1-dimensional measure of seg intersected with the cone. The
/// feasible parameter set changes only at roots of two quadratics (angular
/// boundary, circle crossings), so midpoint classification of the root
/// partition is exact, not a sampling approximation. A segment riding the
/// angular boundary line is clipped against the closed cone instead.
inline double segment_cone_clip_length(const Segment& seg, const Cone& c) {
    Vec2 d = seg.b - seg.a;
    double len = norm(d);
    if (len == 0.0) return 0.0;

    Vec2 w0 = seg.a - c.apex;
    Vec2 u = c.dir.unit();
    double s2 = c.sin_aperture() * c.sin_aperture();

    // cross(u, w(t)) = c0 + c1 t;  q(t) = |w(t)|^2
    double c0 = cross(u, w0);
    double c1 = cross(u, d);
    double qa = dot(d, d);
    double qb = 2.0 * dot(w0, d);
    double qc = dot(w0, w0);

    // phi(t) = cross^2 - sin^2(alpha) q(t);  strict membership is phi < 0
    double A = c1 * c1 - s2 * qa;
    double B = 2.0 * c0 * c1 - s2 * qb;
    double C = c0 * c0 - s2 * qc;

    double phi_scale = c1 * c1 + s2 * qa + std::fabs(2.0 * c0 * c1) + s2 * std::fabs(qb) +
                       c0 * c0 + s2 * qc;
    bool on_boundary_line = std::fabs(A) + std::fabs(B) + std::fabs(C) <= 1e-12 * phi_scale;

    std::vector<double> cuts;
    cuts.reserve(8);
    cuts.push_back(0.0);
    cuts.push_back(1.0);
    if (!on_boundary_line) detail::quadratic_roots_in_unit(A, B, C, cuts);
    if (c.r_max != kInf)
        detail::quadratic_roots_in_unit(qa, qb, qc - c.r_max * c.r_max, cuts);
    detail::quadratic_roots_in_unit(qa, qb, qc - c.r_min * c.r_min, cuts);
    std::sort(cuts.begin(), cuts.end());

    double measure = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double t0 = cuts[i], t1 = cuts[i + 1];
        if (!(t1 > t0)) continue;
        double tm = 0.5 * (t0 + t1);
        double q = (qa * tm + qb) * tm + qc;
        if (!(q > c.r_min * c.r_min)) continue;
        if (c.r_max != kInf && !(q <= c.r_max * c.r_max)) continue;
        if (!on_boundary_line) {
            double phi = (A * tm + B) * tm + C;
            if (!(phi < 0.0)) continue;
        }
        measure += t1 - t0;
    }
    return measure * len;
}

/// Exact 1-dimensional measure of seg within the closed disc.
inline double segment_ball_clip_length(const Segment& seg, const Disc& ball) {
    Vec2 d = seg.b - seg.a;
    double len = norm(d);
    if (len == 0.0) return 0.0;
    Vec2 w0 = seg.a - ball.center;
    double qa = dot(d, d);
    double qb = 2.0 * dot(w0, d);
    double qc = dot(w0, w0) - ball.radius * ball.radius;

    std::vector<double> cuts;
    cuts.reserve(4);
    cuts.push_back(0.0);
    cuts.push_back(1.0);
    detail::quadratic_roots_in_unit(qa, qb, qc, cuts);
    std::sort(cuts.begin(), cuts.end());

    double measure = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double t0 = cuts[i], t1 = cuts[i + 1];
        if (!(t1 > t0)) continue;
        double tm = 0.5 * (t0 + t1);
        if ((qa * tm + qb) * tm + qc <= 0.0) measure += t1 - t0;
    }
    return measure * len;
}

// Region concept: Cone and Disc both support clip_length / classify_disc /
// transformed, which is all the pruned traversals require.

inline double clip_length(const Segment& seg, const Cone& c) {
    return segment_cone_clip_length(seg, c);
}
inline double clip_length(const Segment& seg, const Disc& ball) {
    return segment_ball_clip_length(seg, ball);
}

inline Cone transformed(const Similarity& s, const Cone& c) { return apply(s, c); }
inline Disc transformed(const Similarity& s, const Disc& d) {
    return {s(d.center), s.scale * d.radius};
}

inline bool region_contains(const Cone& c, Vec2 y) { return cone_contains(c, y); }
inline bool region_contains(const Disc& d, Vec2 y) { return d.contains(y); }

}  // namespace conical
