#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "softgrip/oracle.hpp"

using namespace softgrip;
using namespace softgrip::oracle;

namespace {

const mech::BeamSpec kUnitBeam{1.0, 1.0, 1.0};

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

DiscretizedBeam unit_parallel(double k_t, std::size_t n = 4097) {
    DiscretizedBeam d;
    d.beam = kUnitBeam;
    d.routing = mech::TendonRouting::parallel(1.0, 1.0, mech::Stiffness(k_t));
    d.load = mech::LoadCase{1.0};
    d.station_count = n;
    return d;
}

} // namespace

TEST_CASE("discretized solve matches the unit parallel closed form") {
    const mech::TendonSolution numeric = discretized_solve(unit_parallel(1.0));
    CHECK(rel_err(numeric.tip_deflection, 5.0 / 24.0) < 1e-6);
    CHECK(rel_err(numeric.tip_angle, 0.25) < 1e-6);
    CHECK(rel_err(numeric.tendon_tension, 0.25) < 1e-6);
}

TEST_CASE("discretized solve with no tendon is the pure beam") {
    const mech::TendonSolution numeric = discretized_solve(unit_parallel(0.0));
    CHECK(numeric.tendon_tension == 0.0);
    CHECK(rel_err(numeric.tip_deflection, 1.0 / 3.0) < 1e-6);
}

TEST_CASE("discretized solve matches the unit convergent closed form") {
    DiscretizedBeam d;
    d.beam = kUnitBeam;
    d.routing = mech::TendonRouting::convergent(-1.0, 1.0, 1.0, mech::Stiffness(1.0));
    d.load = mech::LoadCase{1.0};
    const mech::TendonSolution numeric = discretized_solve(d);
    CHECK(rel_err(numeric.tendon_tension, 0.25) < 1e-6);
    CHECK(rel_err(numeric.tip_deflection, 0.25) < 1e-6);
}

TEST_CASE("discretized solve handles the rigid sentinel as a constraint") {
    DiscretizedBeam d = unit_parallel(0.0);
    d.routing.tendon_stiffness = mech::Stiffness::rigid();
    const mech::TendonSolution numeric = discretized_solve(d);
    CHECK(std::abs(numeric.tip_angle) < 1e-9);
    CHECK(numeric.tendon_stretch == 0.0);
    CHECK(rel_err(numeric.tip_deflection, 1.0 / 12.0) < 1e-6);
    CHECK(rel_err(numeric.tendon_tension, 0.5) < 1e-6); // F p^2 / (2 r L)
}

TEST_CASE("oracle agrees with closed forms over randomized parameters") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        DiscretizedBeam d;
        d.beam = mech::BeamSpec{0.5 + 4.0 * unit(rng), 0.2 + 2.0 * unit(rng),
                                0.4 + 2.0 * unit(rng)};
        d.load = mech::LoadCase{0.2 + 5.0 * unit(rng)};
        const double b = (0.05 + 0.45 * unit(rng)) * d.beam.length;
        const double k_ref = d.beam.flexural_rigidity() / (b * b * d.beam.length);
        const double k = k_ref * 30.0 * unit(rng);

        mech::TendonSolution closed, numeric;
        if (i % 2 == 0) {
            const double p = d.beam.length * (0.3 + 0.7 * unit(rng));
            d.routing = mech::TendonRouting::parallel(b, p, mech::Stiffness(k));
            closed = mech::parallel_solve(d.beam, d.routing, d.load);
        } else {
            const double slope = -0.9 * b / d.beam.length * unit(rng);
            d.routing = mech::TendonRouting::convergent(slope, b, d.beam.length,
                                                        mech::Stiffness(k));
            closed = mech::convergent_solve(d.beam, d.routing, d.load);
        }
        numeric = discretized_solve(d);
        CHECK(rel_err(numeric.tip_deflection, closed.tip_deflection) < 1e-5);
        CHECK(rel_err(numeric.tip_angle, closed.tip_angle) < 1e-5);
        if (closed.tendon_tension != 0.0)
            CHECK(rel_err(numeric.tendon_tension, closed.tendon_tension) < 1e-5);
    }
}

TEST_CASE("grid convergence is second order") {
    DiscretizedBeam base = unit_parallel(1.0, 65);
    const auto rows = convergence_study(base, 3);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].stations == 65);
    CHECK(rows[1].stations == 129);
    CHECK(rows[2].stations == 257);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double ratio = rows[i - 1].tip_error / rows[i].tip_error;
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("convergence table is monotone for the decoupled and rigid cases") {
    DiscretizedBeam base = unit_parallel(0.0, 65);
    for (const bool rigid : {false, true}) {
        if (rigid) base.routing.tendon_stiffness = mech::Stiffness::rigid();
        const auto rows = convergence_study(base, 4);
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].tip_error < rows[i - 1].tip_error);
    }
}

TEST_CASE("convergence study validates inputs") {
    CHECK_THROWS_AS(convergence_study(unit_parallel(1.0, 65), 2), std::invalid_argument);
    DiscretizedBeam bad = unit_parallel(1.0, 4);
    CHECK_THROWS_AS(discretized_solve(bad), std::invalid_argument);
}

// ---- segment chain -----------------------------------------------------------

namespace {

SegmentChain straight_chain() {
    SegmentChain chain;
    chain.segment_count = 110;
    chain.length = 110.0;
    chain.flexural_rigidity = 1800.0;
    chain.tendon_offset = 5.0;
    return chain;
}

} // namespace

TEST_CASE("zero tension and preload leave the chain straight") {
    SegmentChain chain = straight_chain();
    chain.tension_schedule = {0.0};
    const BendTrajectory traj = simulate_bend(chain);
    REQUIRE(traj.steps.size() == 1);
    CHECK(std::abs(traj.steps[0].tip_x) < 1e-9);
    CHECK(traj.steps[0].tip_y == doctest::Approx(110.0).epsilon(1e-12));
    CHECK(traj.steps[0].bend_angle_deg == 0.0);
}

TEST_CASE("bend angle is monotone in tension without gravity") {
    SegmentChain chain = straight_chain();
    for (int i = 0; i <= 40; ++i) chain.tension_schedule.push_back(0.2 * i);
    const BendTrajectory traj = simulate_bend(chain);
    for (std::size_t i = 1; i < traj.steps.size(); ++i)
        CHECK(traj.steps[i].bend_angle_deg > traj.steps[i - 1].bend_angle_deg);
}

TEST_CASE("preload bends the rest pose toward the tendon side") {
    SegmentChain chain = straight_chain();
    chain.tension_schedule = {0.0};
    chain.preload = 0.5;
    const BendTrajectory traj = simulate_bend(chain);
    CHECK(traj.steps[0].tip_x > 1.0); // toward +x, the tendon side
    CHECK(traj.steps[0].tip_y < 110.0);

    chain.preload = 1.0;
    const BendTrajectory more = simulate_bend(chain);
    CHECK(more.steps[0].tip_x > traj.steps[0].tip_x);
}

TEST_CASE("trajectory is invariant under base-frame rotation") {
    SegmentChain chain = straight_chain();
    chain.tension_schedule = {2.0};
    const auto up = simulate_bend(chain).steps[0];

    chain.base_angle_deg = 37.0;
    const auto tilted = simulate_bend(chain).steps[0];

    const double rot = (37.0 - 90.0) * std::numbers::pi / 180.0;
    const double expect_x = std::cos(rot) * up.tip_x - std::sin(rot) * up.tip_y;
    const double expect_y = std::sin(rot) * up.tip_x + std::cos(rot) * up.tip_y;
    CHECK(tilted.tip_x == doctest::Approx(expect_x).epsilon(1e-12));
    CHECK(tilted.tip_y == doctest::Approx(expect_y).epsilon(1e-12));
    CHECK(tilted.bend_angle_deg == doctest::Approx(up.bend_angle_deg).epsilon(1e-12));
}

TEST_CASE("small-tension response matches the tendon-moment closed form") {
    SegmentChain chain = straight_chain();
    chain.segment_count = 200;
    const double tau = 1e-3;
    chain.tension_schedule = {tau};
    const BendTrajectory traj = simulate_bend(chain);
    // Constant tendon moment tau*r: lateral tip deflection tau*r*L^2 / (2 EI).
    const double closed = tau * chain.tendon_offset * chain.length * chain.length /
                          (2.0 * chain.flexural_rigidity);
    CHECK(rel_err(traj.steps[0].tip_x, closed) < 0.05);
}

TEST_CASE("convergent routing weakens the tendon moment toward the tip") {
    SegmentChain parallel = straight_chain();
    parallel.tension_schedule = {2.0};
    SegmentChain convergent = parallel;
    convergent.tendon_slope = -parallel.tendon_offset / parallel.length; // r(L) = 0
    const auto par = simulate_bend(parallel).steps[0];
    const auto conv = simulate_bend(convergent).steps[0];
    CHECK(conv.bend_angle_deg < par.bend_angle_deg);
    CHECK(conv.bend_angle_deg > 0.0);
    // Linearized bend angle: tau * int r(s) ds / EI, i.e. half the parallel arm.
    CHECK(conv.bend_angle_deg == doctest::Approx(par.bend_angle_deg * 0.5).epsilon(0.02));
}

TEST_CASE("gravity adds horizontal displacement for an upright finger") {
    SegmentChain chain = straight_chain();
    chain.tension_schedule = {3.0};
    const double without = simulate_bend(chain).steps[0].tip_x;
    chain.gravity = true;
    chain.mass = 0.02; // kg, with mm gravity units
    const double with_gravity = simulate_bend(chain).steps[0].tip_x;
    CHECK(with_gravity > without);
}

TEST_CASE("segment chain validation") {
    SegmentChain chain = straight_chain();
    chain.segment_count = 5;
    CHECK_THROWS_AS(simulate_bend(chain), std::invalid_argument);
    chain = straight_chain();
    chain.tension_schedule = {-1.0};
    CHECK_THROWS_AS(simulate_bend(chain), std::invalid_argument);
}
