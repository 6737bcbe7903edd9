#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conical/geometry.hpp"
#include "conical/rng.hpp"

using namespace conical;

namespace {

// Independent check: chop the segment into n pieces and count midpoints.
double clip_oracle(const Segment& seg, const Cone& c, std::size_t n) {
    double len = seg.length();
    double hits = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        if (cone_contains(c, seg.at(t))) hits += 1.0;
    }
    return hits * len / static_cast<double>(n);
}

Vec2 random_point(Rng& rng, double spread) {
    return {rng.uniform(-spread, spread), rng.uniform(-spread, spread)};
}

}  // namespace

TEST_CASE("cone membership basics", "[geometry]") {
    Cone c({0.0, 0.0}, Direction(0.0), kPi / 6.0, 2.0);
    CHECK(cone_contains(c, {1.0, 0.0}));
    CHECK_FALSE(cone_contains(c, {0.0, 1.0}));
    // distance to the axis is 0.6, the threshold sin(pi/6)*|y| ~ 0.583
    Cone open_cone({0.0, 0.0}, Direction(0.0), kPi / 6.0);
    CHECK_FALSE(cone_contains(open_cone, {1.0, 0.6}));
    CHECK(cone_contains(open_cone, {1.0, 0.5}));
    // two-sided
    CHECK(cone_contains(c, {-1.0, 0.0}));
}

TEST_CASE("cone boundary conventions", "[geometry]") {
    // outer radius is closed, inner radius and the angular test are open
    Cone c({0.0, 0.0}, Direction(0.0), kPi / 6.0, 2.0, 1.0);
    CHECK(cone_contains(c, {2.0, 0.0}));
    CHECK_FALSE(cone_contains(c, {1.0, 0.0}));
    CHECK(cone_contains(c, {1.0 + 1e-12, 0.0}));
    double s = std::sin(kPi / 6.0);
    CHECK_FALSE(cone_contains(c, {1.5, 1.5 * s / std::sqrt(1.0 - s * s) + 1e-9}));
    // apex is never a member
    Cone open_cone({0.0, 0.0}, Direction(0.0), kPi / 4.0);
    CHECK_FALSE(cone_contains(open_cone, {0.0, 0.0}));
}

TEST_CASE("angle between lines", "[geometry]") {
    CHECK(angle_between(Direction(0.0), Direction(0.0)) == 0.0);
    CHECK(angle_between(Direction(0.0), Direction(kPi / 2.0)) == Catch::Approx(kPi / 2.0));
    CHECK(angle_between(Direction(0.1), Direction(3.0)) == Catch::Approx(kPi - 2.9));
    // symmetry
    CHECK(angle_between(Direction(3.0), Direction(0.1)) == Catch::Approx(kPi - 2.9));
}

TEST_CASE("similarity application and composition", "[geometry]") {
    Polyline pl;
    pl.segments = {{{0.0, 0.0}, {1.0, 0.5}}, {{1.0, 0.5}, {2.0, 0.0}}};
    Similarity id;
    Polyline same = id(pl);
    CHECK(same.segments[1].b == Vec2{2.0, 0.0});

    Similarity quarter{2, 1.0, {0.0, 0.0}};  // rotation by pi/2
    Segment s = quarter(Segment{{0.0, 0.0}, {1.0, 0.0}});
    CHECK(s.a == Vec2{0.0, 0.0});
    CHECK(s.b.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(s.b.y == Catch::Approx(1.0));

    // one eighth-turn with the scale used by the layered set at M=3, N=2
    double r1 = std::ldexp(kSqrtHalf, -8);  // 2^-8.5
    Similarity g1{1, r1, {0.0, 0.0}};
    Segment base{{-1.0, 0.0}, {1.0, 0.0}};
    Segment mapped = g1(base);
    CHECK(mapped.length() == Catch::Approx(2.0 * r1));
    CHECK(std::atan2(mapped.b.y - mapped.a.y, mapped.b.x - mapped.a.x) ==
          Catch::Approx(kPi / 4.0));

    // composition matches sequential application; inverse round-trips
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Similarity a{static_cast<int>(rng.below(16)) - 8, std::exp(rng.uniform(-2.0, 2.0)),
                     random_point(rng, 2.0)};
        Similarity b{static_cast<int>(rng.below(16)) - 8, std::exp(rng.uniform(-2.0, 2.0)),
                     random_point(rng, 2.0)};
        Vec2 p = random_point(rng, 3.0);
        Vec2 lhs = (a * b)(p);
        Vec2 rhs = a(b(p));
        CHECK(dist(lhs, rhs) < 1e-12 * (1.0 + norm(rhs)));
        Vec2 back = a.inverse()(a(p));
        CHECK(dist(back, p) < 1e-12 * (1.0 + norm(p)));
    }

    // cones map with unchanged aperture and scaled radii
    Cone c({1.0, 0.0}, Direction(0.3), 0.2, 1.5, 0.25);
    Similarity sim{3, 2.0, {0.5, -0.5}};
    Cone mc = apply(sim, c);
    CHECK(mc.aperture == c.aperture);
    CHECK(mc.r_max == Catch::Approx(3.0));
    CHECK(mc.r_min == Catch::Approx(0.5));
    CHECK(mc.dir.theta() == Catch::Approx(Direction::normalize(0.3 + 3.0 * kPi / 4.0)));
}

TEST_CASE("segment clipping against cones", "[geometry]") {
    // segment on the axis, fully inside
    Cone c({0.0, 0.0}, Direction(0.0), kPi / 8.0, 1.0);
    CHECK(segment_cone_clip_length({{0.1, 0.0}, {0.5, 0.0}}, c) == Catch::Approx(0.4));

    // horizontal segment at height 1: every point fails the angular test
    Cone c2({0.0, 0.0}, Direction(0.0), kPi / 12.0, 5.0);
    CHECK(segment_cone_clip_length({{0.0, 1.0}, {1.0, 1.0}}, c2) == 0.0);

    // diameter through the apex: exactly 2r captured
    Cone c3({0.0, 0.0}, Direction(0.0), kPi / 6.0, 0.3);
    CHECK(segment_cone_clip_length({{-1.0, 0.0}, {1.0, 0.0}}, c3) == Catch::Approx(0.6));

    // segment riding the angular boundary line: closed-cone fallback
    Cone c4({0.0, 0.0}, Direction(0.0), kPi / 4.0, 10.0);
    Segment diag{{0.1, 0.1}, {0.5, 0.5}};
    CHECK(segment_cone_clip_length(diag, c4) == Catch::Approx(diag.length()));
}

TEST_CASE("segment clipping matches subdivision oracle", "[geometry]") {
    Rng rng(20260810);
    for (int trial = 0; trial < 40; ++trial) {
        Segment seg{random_point(rng, 2.0), random_point(rng, 2.0)};
        if (seg.length() < 1e-3) continue;
        double rmax = rng.uniform(0.2, 3.0);
        double rmin = rng.below(2) ? rng.uniform(0.0, 0.5 * rmax) : 0.0;
        Cone c(random_point(rng, 1.0), Direction(rng.uniform(0.0, kPi)),
               rng.uniform(0.05, kPi / 2.0 - 0.05), rmax, rmin);
        double exact = segment_cone_clip_length(seg, c);
        double approx = clip_oracle(seg, c, 200000);
        CHECK(std::fabs(exact - approx) <= 5e-4 * seg.length() + 1e-12);
    }
}

TEST_CASE("clipping is similarity equivariant", "[geometry]") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        Segment seg{random_point(rng, 2.0), random_point(rng, 2.0)};
        if (seg.length() < 1e-6) continue;
        Cone c(random_point(rng, 1.5), Direction(rng.uniform(0.0, kPi)),
               rng.uniform(0.05, kPi / 2.0 - 0.05), rng.uniform(0.3, 4.0));
        Similarity s{static_cast<int>(rng.below(16)) - 8, std::exp(rng.uniform(-3.0, 3.0)),
                     random_point(rng, 2.0)};
        double base = segment_cone_clip_length(seg, c);
        double mapped = segment_cone_clip_length(s(seg), apply(s, c));
        CHECK(std::fabs(mapped - s.scale * base) <= 1e-10 * (s.scale * seg.length()));
    }
}

TEST_CASE("membership is symmetric and monotone", "[geometry]") {
    Rng rng(4242);
    for (int trial = 0; trial < 2000; ++trial) {
        Vec2 apex = random_point(rng, 1.0);
        double alpha = rng.uniform(0.05, kPi / 2.0 - 0.1);
        double rmax = rng.uniform(0.2, 3.0);
        Cone c(apex, Direction(rng.uniform(0.0, kPi)), alpha, rmax);
        Vec2 y = random_point(rng, 2.0);
        CHECK(cone_contains(c, y) == cone_contains(c, 2.0 * apex - y));
        if (cone_contains(c, y)) {
            Cone wider(apex, c.dir, std::min(alpha * 1.5, kPi / 2.0 - 1e-6), rmax);
            Cone longer(apex, c.dir, alpha, rmax * 1.7);
            CHECK(cone_contains(wider, y));
            CHECK(cone_contains(longer, y));
        }
    }
}

TEST_CASE("twice-truncated cone inclusion", "[geometry][cone-lemma]") {
    // Points of K(x1, L, a0, |x1-x2|/sin(a0), r) must land in K(x2, L, 8 a0, 2r).
    Rng rng(31337);
    std::size_t violations = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        double a0 = rng.uniform(1e-4, kPi / 50.0 - 1e-6);
        double r = rng.uniform(0.1, 5.0);
        Vec2 x1 = random_point(rng, 2.0);
        double sep = rng.uniform01() * std::sin(a0) * r;
        double dir_angle = rng.uniform(0.0, 2.0 * kPi);
        Vec2 x2 = x1 + sep * Vec2{std::cos(dir_angle), std::sin(dir_angle)};
        Direction axis(rng.uniform(0.0, kPi));
        double rmin = sep / std::sin(a0);
        if (rmin >= r) continue;
        Cone inner(x1, axis, a0, r, rmin);
        Cone outer(x2, axis, 8.0 * a0, 2.0 * r);
        for (int s = 0; s < 50; ++s) {
            double rad = rmin + (r - rmin) * std::max(rng.uniform01(), 1e-12);
            double psi = rng.uniform(-a0, a0) * 0.9999999;
            double side = rng.below(2) ? 1.0 : -1.0;
            double ang = axis.theta() + psi;
            Vec2 y = x1 + side * rad * Vec2{std::cos(ang), std::sin(ang)};
            REQUIRE(cone_contains(inner, y));
            if (!cone_contains(outer, y)) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("disc classification is conservative", "[geometry]") {
    Rng rng(555);
    for (int trial = 0; trial < 3000; ++trial) {
        Cone c(random_point(rng, 1.0), Direction(rng.uniform(0.0, kPi)),
               rng.uniform(0.05, kPi / 2.0 - 0.1), rng.uniform(0.3, 3.0),
               rng.below(2) ? rng.uniform(0.0, 0.2) : 0.0);
        Disc d{random_point(rng, 2.0), std::exp(rng.uniform(-4.0, 0.5))};
        DiscClass cls = classify_disc(c, d);
        for (int s = 0; s < 30; ++s) {
            double ang = rng.uniform(0.0, 2.0 * kPi);
            Vec2 y = d.center + rng.uniform01() * d.radius * Vec2{std::cos(ang), std::sin(ang)};
            if (cls == DiscClass::inside) REQUIRE(cone_contains(c, y));
            if (cls == DiscClass::outside) REQUIRE_FALSE(cone_contains(c, y));
        }
    }
}

TEST_CASE("ball clipping", "[geometry]") {
    Disc b{{0.0, 0.0}, 1.0};
    CHECK(segment_ball_clip_length({{-2.0, 0.0}, {2.0, 0.0}}, b) == Catch::Approx(2.0));
    CHECK(segment_ball_clip_length({{{1.5}, {0.0}}, {{3.0}, {0.0}}}, b) == 0.0);
    CHECK(segment_ball_clip_length({{0.0, 0.0}, {0.25, 0.0}}, b) == Catch::Approx(0.25));
}
