#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mvh/lift.hpp"

using namespace mvh;

namespace {

struct LiftedFixture {
    MarketModel m = fixtures::constants_market();
    ClaimSpec claim = fixtures::insurance_claim();
    FSolution sol = solve_all(m, claim, 1000);
};

} // namespace

TEST_CASE("lifted triples implement the decomposition construction") {
    LiftedFixture f;
    const double tau = 0.62;

    SECTION("before the jump, value is the before-default curve") {
        const GTriple w = lift_triple(f.sol, FComponent::Weight, f.claim, tau, 0.3);
        CHECK(w.y == interpolate(f.sol, FComponent::Weight, 0.3));
        CHECK(w.z == 0.0);
        CHECK(w.u + w.y == Catch::Approx(1.0).margin(1e-15));
    }
    SECTION("at and after the jump, value is the after-jump terminal") {
        const GTriple g = lift_triple(f.sol, FComponent::Target, f.claim, tau, 0.8);
        CHECK(g.y == f.claim.h_a.value(tau));
        CHECK(g.u == 0.0);
        const GTriple g_at = lift_triple(f.sol, FComponent::Target, f.claim, tau, tau);
        CHECK(g_at.y == f.claim.h_a.value(tau));
        CHECK(g_at.u == f.claim.h_a.value(tau) - interpolate(f.sol, FComponent::Target, tau));
    }
    SECTION("residual jump integrand is minus the residual curve") {
        const GTriple h = lift_triple(f.sol, FComponent::Residual, f.claim, tau, 0.3);
        CHECK(h.u == -interpolate(f.sol, FComponent::Residual, 0.3));
    }
}

TEST_CASE("weight driver direct substitutions") {
    const MarketModel m = fixtures::constants_market();
    const Coefficients zero_mu{0.0, 0.2, -0.5, 0.3};
    CHECK(g_driver_f(zero_mu, 0.0, 1.0, 0.0, 0.0) == 0.0);
    const Coefficients c{0.05, 0.2, -0.5, 0.3};
    CHECK(g_driver_f(c, 0.0, 1.0, 0.0, 0.0) ==
          Catch::Approx(-0.0625).margin(1e-15)); // -mu^2/sigma^2
    (void)m;
}

TEST_CASE("driver rejects a nonpositive quadratic denominator") {
    const Coefficients c{0.05, 0.2, -0.5, 0.3};
    CHECK_THROWS_AS(g_driver_f(c, 0.3, -1.0, 0.0, 0.5), SolverError);
}

TEST_CASE("drivers reproduce the decomposed ODE right-hand sides") {
    LiftedFixture f;
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double t = ut(rng);
        const Coefficients c = eval_coeffs(f.m, t);
        const double yb = interpolate(f.sol, FComponent::Weight, t);
        const double yc = interpolate(f.sol, FComponent::Target, t);
        const double ha = f.claim.h_a.value(t);
        const GTriple w{yb, 0.0, 1.0 - yb};
        const GTriple g{yc, 0.0, ha - yc};

        // weight: f-driver + compensator shift = -(decomposed RHS)
        const double rhs_w = ((c.mu - c.lambda * c.beta) * yb + c.lambda * c.beta) *
                                 ((c.mu - c.lambda * c.beta) * yb + c.lambda * c.beta) /
                                 (c.sigma * c.sigma * yb + c.lambda * c.beta * c.beta) -
                             c.lambda + c.lambda * yb;
        const double lhs_w = g_driver_f(c, c.lambda, w.y, w.z, w.u) + c.lambda * w.u;
        CHECK(lhs_w + rhs_w == Catch::Approx(0.0).margin(1e-12 * (1.0 + std::abs(rhs_w))));

        // target: g-driver + compensator shift = -(linear RHS)
        const double a_t = c.lambda * (c.sigma * c.sigma - c.beta * (c.mu - c.lambda * c.beta)) /
                           (c.sigma * c.sigma * yb + c.lambda * c.beta * c.beta);
        const double rhs_g = a_t * (yc - ha);
        const double lhs_g = g_driver_g(c, c.lambda, w, g.y, g.z, g.u) + c.lambda * g.u;
        CHECK(lhs_g + rhs_g == Catch::Approx(0.0).margin(1e-12 * (1.0 + std::abs(rhs_g))));

        // residual driver equals the nonnegative R before the jump
        const double gap = ha - yc;
        const double r_t = c.lambda * gap * gap -
                           (c.lambda * c.beta * gap) * (c.lambda * c.beta * gap) /
                               (c.sigma * c.sigma * yb + c.lambda * c.beta * c.beta);
        const double h_val = g_driver_h(c, c.lambda, w, g);
        CHECK(h_val == Catch::Approx(r_t).margin(1e-12 * (1.0 + std::abs(r_t))));
        CHECK(h_val >= -1e-15);
    }
}

TEST_CASE("residual vanishes identically in the driverless case") {
    const MarketModel m = build_market(1.0, 1.0, Curve::constant(0.0), Curve::constant(0.2),
                                       Curve::constant(0.0), Curve::constant(0.0));
    const ClaimSpec claim = ClaimSpec::custom(0.7, Curve::constant(0.7));
    const FSolution sol = solve_all(m, claim, 100);
    const SimMesh mesh = SimMesh::build(m, claim, 100);
    PathRng rng(99, 1);
    const MarketPath path = simulate_path(m, mesh, rng, false);
    CHECK(bsde_residual(path, sol, m, claim, FComponent::Weight) <= 1e-14);
    CHECK(bsde_residual(path, sol, m, claim, FComponent::Target) <= 1e-14);
    CHECK(bsde_residual(path, sol, m, claim, FComponent::Residual) <= 1e-14);
}

TEST_CASE("jump bookkeeping is exact on defaulted paths") {
    LiftedFixture f;
    const SimMesh mesh = SimMesh::build(f.m, f.claim, 200);
    int defaulted = 0;
    for (std::uint64_t i = 0; i < 200 && defaulted < 10; ++i) {
        PathRng rng(4242, i);
        const MarketPath path = simulate_path(f.m, mesh, rng, false);
        if (!(path.tau <= f.m.horizon)) continue;
        ++defaulted;
        for (FComponent which :
             {FComponent::Weight, FComponent::Target, FComponent::Residual}) {
            const GTriple pre = lift_triple(f.sol, which, f.claim, path.tau, path.tau);
            const GTriple post = lift_triple(f.sol, which, f.claim, path.tau,
                                             std::nextafter(path.tau, 2.0));
            // the solution jumps by exactly the jump integrand at tau
            CHECK(post.y - pre.y == Catch::Approx(pre.u).margin(1e-15 * (1.0 + std::abs(pre.u))));
            CHECK(pre.u == after_jump_terminal(which, f.claim, path.tau) -
                               interpolate(f.sol, which, path.tau));
        }
    }
    CHECK(defaulted == 10);
}

TEST_CASE("pathwise residuals converge at first order in the mesh") {
    LiftedFixture f;
    const int fine = 1600;
    const int levels[] = {200, 400, 800, 1600};
    std::mt19937 seed_seq(7);
    double order_sum[3] = {0, 0, 0};
    int order_count = 0;
    for (int p = 0; p < 20; ++p) {
        PathRng rng(777, static_cast<std::uint64_t>(p));
        double tau = sample_default(f.m, rng.uniform01());
        tau = fixtures::snap_tau(tau, f.m.horizon, fine);
        std::vector<double> fine_dw(fine);
        const double dt = f.m.horizon / fine;
        for (auto& d : fine_dw) d = std::sqrt(dt) * rng.normal();
        double defect[3][4];
        for (int l = 0; l < 4; ++l) {
            const MarketPath path =
                fixtures::refined_path(f.m, fine_dw, tau, fine, levels[l]);
            defect[0][l] = bsde_residual(path, f.sol, f.m, f.claim, FComponent::Weight);
            defect[1][l] = bsde_residual(path, f.sol, f.m, f.claim, FComponent::Target);
            defect[2][l] = bsde_residual(path, f.sol, f.m, f.claim, FComponent::Residual);
        }
        for (int c = 0; c < 3; ++c) {
            for (int l = 0; l + 1 < 4; ++l) {
                if (defect[c][l + 1] <= 0.0 || defect[c][l] <= 0.0) continue;
                order_sum[c] += std::log2(defect[c][l] / defect[c][l + 1]);
            }
        }
        ++order_count;
    }
    for (int c = 0; c < 3; ++c) {
        const double order = order_sum[c] / (3.0 * order_count);
        CHECK(order >= 0.9);
    }
    (void)seed_seq;
}
