#include <catch_amalgamated.hpp>

#include <random>

#include "mvh/curve.hpp"

using mvh::Curve;
using mvh::CurveNode;
using mvh::Interp;

TEST_CASE("piecewise-constant curves are right-continuous with left limits") {
    Curve c({{0.0, 0.2}, {0.5, 0.4}}, Interp::PiecewiseConstant);
    CHECK(c.value(0.0) == 0.2);
    CHECK(c.value(0.3) == 0.2);
    CHECK(c.value(0.5) == 0.4);
    CHECK(c.value_left(0.5) == 0.2);
    CHECK(c.value(0.9) == 0.4);
    CHECK(c.value(2.0) == 0.4); // flat extrapolation
}

TEST_CASE("piecewise-linear curves interpolate and stay continuous") {
    Curve c({{0.0, 0.1}, {1.0, 0.3}}, Interp::PiecewiseLinear);
    CHECK(c.value(0.5) == Catch::Approx(0.2).margin(1e-15));
    CHECK(c.value(0.0) == 0.1);
    CHECK(c.value(1.0) == 0.3);
    CHECK(c.value_left(0.5) == c.value(0.5));
    CHECK(c.value(1.5) == 0.3);
}

TEST_CASE("constant curve evaluates everywhere") {
    Curve c = Curve::constant(0.05);
    CHECK(c.value(0.0) == 0.05);
    CHECK(c.value(0.77) == 0.05);
    CHECK(c.is_constant());
}

TEST_CASE("curve validation rejects malformed node lists") {
    CHECK_THROWS_AS(Curve({{0.1, 1.0}}, Interp::PiecewiseConstant), mvh::ValidationError);
    CHECK_THROWS_AS(Curve({{0.0, 1.0}, {0.0, 2.0}}, Interp::PiecewiseLinear),
                    mvh::ValidationError);
    CHECK_THROWS_AS(Curve({{0.0, 1.0}, {0.5, 2.0}, {0.4, 3.0}}, Interp::PiecewiseConstant),
                    mvh::ValidationError);
    CHECK_THROWS_AS(Curve({}, Interp::PiecewiseConstant), mvh::ValidationError);
}

TEST_CASE("exact integral matches closed forms") {
    Curve pc({{0.0, 0.2}, {0.5, 0.4}}, Interp::PiecewiseConstant);
    CHECK(pc.integral(0.0, 1.0) == Catch::Approx(0.3).margin(1e-15));
    Curve pl({{0.0, 0.1}, {1.0, 0.3}}, Interp::PiecewiseLinear);
    CHECK(pl.integral(0.0, 1.0) == Catch::Approx(0.2).margin(1e-15));
    CHECK(pl.integral(0.25, 0.75) == Catch::Approx(0.1).margin(1e-15));
    CHECK(pc.integral(0.7, 0.3) == Catch::Approx(-pc.integral(0.3, 0.7)).margin(1e-15));
}

namespace {

Curve random_curve(std::mt19937& rng) {
    std::uniform_real_distribution<double> uv(-1.0, 1.0);
    std::uniform_int_distribution<int> un(1, 5);
    std::uniform_int_distribution<int> interp(0, 1);
    const int n = un(rng);
    std::vector<CurveNode> nodes;
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
        nodes.push_back({t, uv(rng)});
        t += 0.05 + 0.3 * std::uniform_real_distribution<double>(0, 1)(rng);
    }
    return Curve(nodes, interp(rng) ? Interp::PiecewiseLinear : Interp::PiecewiseConstant);
}

} // namespace

TEST_CASE("integral is additive over random meshes") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 1.5);
    for (int trial = 0; trial < 200; ++trial) {
        const Curve c = random_curve(rng);
        double a = ut(rng), b = ut(rng), mid = ut(rng);
        if (a > b) std::swap(a, b);
        const double whole = c.integral(a, b);
        const double split = c.integral(a, mid) + c.integral(mid, b);
        CHECK(whole == Catch::Approx(split).margin(1e-13));
    }
}

TEST_CASE("product integral matches quadrature") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Curve f = random_curve(rng);
        const Curve g = random_curve(rng);
        const double exact = mvh::integral_product(f, g, 0.0, 1.0);
        // midpoint quadrature on a fine mesh avoids sampling cadlag nodes
        double approx = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double t = (i + 0.5) / n;
            approx += f.value(t) * g.value(t) / n;
        }
        CHECK(exact == Catch::Approx(approx).margin(5e-5));
    }
}
