#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conical/lipschitz_graph.hpp"
#include "conical/rng.hpp"

using namespace conical;

TEST_CASE("triangle wave", "[graph]") {
    CHECK(triangle_wave(0.0) == 1.0);
    CHECK(triangle_wave(2.0) == -1.0);
    CHECK(triangle_wave(-5.0) == 0.0);  // -5 mod 4 = 3, |3-2|-1 = 0
    CHECK(triangle_wave(7.0) == triangle_wave(3.0));
    CHECK(triangle_wave(-1.25) == triangle_wave(1.25));
    // 1-Lipschitz on a sample
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        double a = rng.uniform(-10.0, 10.0), b = rng.uniform(-10.0, 10.0);
        CHECK(std::fabs(triangle_wave(a) - triangle_wave(b)) <= std::fabs(a - b) + 1e-12);
    }
}

TEST_CASE("wave components", "[graph]") {
    GraphParams p{3, 2, kPi / 4.0};
    CHECK(f_component(1, 0.0, p) == Catch::Approx(1.0 / 12.0));
    CHECK_THROWS_AS(f_component(0, 0.0, p), std::domain_error);
    CHECK_THROWS_AS(f_component(4, 0.0, p), std::domain_error);
    // zero crossings where the wave argument is 1 mod 4
    CHECK(f_component(1, 1.0 / 4.0, p) == Catch::Approx(0.0).margin(1e-15));
    // Lipschitz constant is exactly 1/M: check slopes between close points
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        int j = 1 + static_cast<int>(rng.below(3));
        double a = rng.uniform(-1.0, 1.0);
        double b = a + rng.uniform(-1e-9, 1e-9);
        CHECK(std::fabs(f_component(j, a, p) - f_component(j, b, p)) <=
              std::fabs(a - b) / 3.0 + 1e-16);
    }
    // range bound
    for (int j = 1; j <= 3; ++j)
        for (int i = 0; i < 500; ++i) {
            double t = rng.uniform(-1.0, 1.0);
            CHECK(std::fabs(f_component(j, t, p)) <=
                  std::ldexp(1.0, -j * p.N) / p.M + 1e-15);
        }
}

TEST_CASE("graph build: endpoint and family facts", "[graph]") {
    for (auto [M, N] : {std::pair{3, 2}, {3, 3}, {4, 2}}) {
        GraphParams p{M, N, kPi / 4.0};
        GraphFamily g = GraphFamily::build(p);
        INFO("M=" << M << " N=" << N);

        // endpoints vanish exactly in integer arithmetic
        CHECK(g.value_numerator(-g.grid_half()) == 0);
        CHECK(g.value_numerator(g.grid_half()) == 0);

        // family counts
        for (int j = 1; j <= M; ++j)
            CHECK(g.family_size(j) == (std::size_t{1} << (j * N - j)));
        CHECK(g.leaf_count() == (std::size_t{1} << ((M + 1) * N - M)));

        // leaves sit inside [-1/2, 1/2] and carry slope exactly 1
        for (const auto& leaf : g.leaf_intervals()) {
            CHECK(leaf.left() >= -0.5);
            CHECK(leaf.right() <= 0.5);
            auto cell = leaf.ancestor(g.grid_level());
            CHECK(g.slope_numerator(cell.index) == p.M);
        }

        // marked cells: the slope of the partial sum g_j is exactly j/M
        for (int j = 1; j <= M; ++j)
            for (const auto& iv : g.family(j)) {
                double mid = iv.mid();
                double lo = g.partial_sum(j, mid - 0.25 * iv.length());
                double hi = g.partial_sum(j, mid + 0.25 * iv.length());
                CHECK((hi - lo) / (0.5 * iv.length()) ==
                      Catch::Approx(static_cast<double>(j) / M).epsilon(1e-9));
            }
    }
}

TEST_CASE("graph is 1-Lipschitz with small sup norm, even before the shift", "[graph]") {
    GraphParams p{3, 3, kPi / 4.0};
    GraphFamily g = GraphFamily::build(p);

    // slopes are integer multiples of 1/M bounded by 1
    std::int64_t half = g.grid_half();
    for (std::int64_t m = -half; m < half; ++m) {
        auto s = g.slope_numerator(m);
        CHECK(std::llabs(s) <= p.M);
    }

    CHECK(g.g_sup_norm() <= 2.0 / p.M);

    // evenness of the unshifted sum: numerators at +-m agree
    for (std::int64_t m = 0; m <= half; ++m)
        CHECK(g.value_numerator(m) == g.value_numerator(-m));
}

TEST_CASE("partial sums approximate the full graph geometrically", "[graph]") {
    GraphParams p{3, 2, kPi / 4.0};
    GraphFamily g = GraphFamily::build(p);
    Rng rng(23);
    for (int j = 1; j <= p.M; ++j) {
        double bound = 2.0 / p.M * std::ldexp(1.0, -p.N * (j + 1));
        for (int i = 0; i < 4000; ++i) {
            double t = rng.uniform(-1.0, 1.0);
            CHECK(std::fabs(g.partial_sum(p.M, t) - g.partial_sum(j, t)) <= bound + 1e-15);
        }
    }
}

TEST_CASE("tangent directions", "[graph]") {
    GraphParams p{3, 2, kPi / 4.0};
    GraphFamily g = GraphFamily::build(p);

    // inside a leaf interval the full graph rises at 45 degrees
    auto leaves = g.leaf_intervals();
    CHECK(g.tangent_direction(p.M, leaves.front().mid()).theta() == Catch::Approx(kPi / 4.0));

    // the first component alone rises at arctan(1/M) there
    CHECK(g.tangent_direction(1, leaves.front().mid()).theta() ==
          Catch::Approx(std::atan(1.0 / 3.0)));

    // tangents match the displayed angles arctan(j/M) on marked cells
    for (int j = 1; j <= p.M; ++j) {
        auto fam = g.family(j);
        CHECK(g.tangent_direction(j, fam.front().mid()).theta() ==
              Catch::Approx(std::atan(static_cast<double>(j) / p.M)));
    }

    CHECK_THROWS_AS(g.tangent_direction(1, 0.25), std::domain_error);  // grid breakpoint
    CHECK_THROWS_AS(g.tangent_direction(1, 1.0), std::domain_error);
}

TEST_CASE("graph polyline", "[graph]") {
    GraphParams p{3, 2, kPi / 4.0};
    GraphFamily g = GraphFamily::build(p);
    Polyline pl = g.polyline();
    CHECK(pl.segments.size() == 128);  // 2^{MN+1}
    CHECK(pl.arclength() >= 2.0);
    CHECK(pl.arclength() <= 2.0 * std::sqrt(2.0));
    // graph arclength over a leaf interval is sqrt(2) times its width
    auto leaf = g.leaf_intervals().front();
    double r1 = std::ldexp(kSqrtHalf, -p.N * (p.M + 1));
    CHECK(std::sqrt(2.0) * leaf.length() == Catch::Approx(2.0 * r1));
}

TEST_CASE("build guards", "[graph]") {
    CHECK_THROWS_AS(GraphFamily::build({2, 2, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(GraphFamily::build({3, 1, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(GraphFamily::build({3, 4, 0.5}, 100), BudgetExceeded);
    GraphParams paper{3, 2, kPi / 4.0};
    CHECK_FALSE(paper.paper_regime());
}
