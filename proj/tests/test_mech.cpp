#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "softgrip/mech.hpp"

using namespace softgrip::mech;

namespace {

const BeamSpec kUnitBeam{1.0, 1.0, 1.0};

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

} // namespace

TEST_CASE("stiffness sentinel") {
    const Stiffness r = Stiffness::rigid();
    CHECK(r.is_rigid());
    CHECK_THROWS_AS((void)r.value(), std::logic_error);
    CHECK(Stiffness(2.5).value() == 2.5);
    CHECK(Stiffness(0.0).is_zero());
    CHECK_THROWS_AS(Stiffness(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Stiffness(std::nan("")), std::invalid_argument);
}

TEST_CASE("pure tip deflection") {
    CHECK(pure_tip_deflection(kUnitBeam, 0.0) == 0.0);
    CHECK(pure_tip_deflection(kUnitBeam, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // Linearity in the load.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.1, 10.0);
    for (int i = 0; i < 20; ++i) {
        const BeamSpec beam{dist(rng), dist(rng), dist(rng)};
        const double f = dist(rng);
        CHECK(pure_tip_deflection(beam, 2.0 * f) ==
              doctest::Approx(2.0 * pure_tip_deflection(beam, f)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(pure_tip_deflection(BeamSpec{0.0, 1.0, 1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("parallel solve unit case") {
    const auto routing = TendonRouting::parallel(1.0, 1.0, Stiffness(1.0));
    const TendonSolution sol = parallel_solve(kUnitBeam, routing, LoadCase{1.0});
    CHECK(sol.tip_angle == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sol.tendon_tension == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sol.tip_deflection == doctest::Approx(5.0 / 24.0).epsilon(1e-15));
    CHECK(sol.tendon_stretch == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sol.slope_profile.front() == 0.0);
    CHECK(sol.deflection_profile.front() == 0.0);
    CHECK(sol.stations.size() == kDefaultProfileStations);
}

TEST_CASE("parallel solve reduces to the pure beam at k_t = 0") {
    const auto routing = TendonRouting::parallel(0.7, 1.0, Stiffness(0.0));
    const TendonSolution sol = parallel_solve(kUnitBeam, routing, LoadCase{2.0});
    CHECK(sol.tip_deflection == pure_tip_deflection(kUnitBeam, 2.0)); // bit-exact
    CHECK(sol.tendon_tension == 0.0);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.2, 5.0);
    for (int i = 0; i < 30; ++i) {
        const BeamSpec beam{dist(rng), dist(rng), dist(rng)};
        const double f = dist(rng);
        const auto r = TendonRouting::parallel(dist(rng), beam.length, Stiffness(0.0));
        CHECK(parallel_solve(beam, r, LoadCase{f}).tip_deflection ==
              pure_tip_deflection(beam, f));
    }
}

TEST_CASE("parallel solve approaches the rigid-tendon limit") {
    const auto stiff = TendonRouting::parallel(1.0, 1.0, Stiffness(1e9));
    const double tip = parallel_solve(kUnitBeam, stiff, LoadCase{1.0}).tip_deflection;
    CHECK(rel_err(tip, 1.0 / 12.0) < 1e-6);

    const auto rigid = TendonRouting::parallel(1.0, 1.0, Stiffness::rigid());
    const TendonSolution rigid_sol = parallel_solve(kUnitBeam, rigid, LoadCase{1.0});
    CHECK(rigid_sol.tip_angle == 0.0);
    CHECK(rigid_sol.tendon_stretch == 0.0);
    CHECK(rigid_sol.tip_deflection == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("parallel solve rejects invalid routing") {
    CHECK_THROWS_AS(parallel_solve(kUnitBeam, TendonRouting::parallel(0.0, 1.0, Stiffness(1.0)),
                                   LoadCase{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(parallel_solve(kUnitBeam, TendonRouting::parallel(-0.5, 1.0, Stiffness(1.0)),
                                   LoadCase{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(parallel_solve(kUnitBeam, TendonRouting::parallel(1.0, 1.5, Stiffness(1.0)),
                                   LoadCase{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(parallel_solve(kUnitBeam,
                                   TendonRouting::convergent(-0.5, 1.0, 1.0, Stiffness(1.0)),
                                   LoadCase{1.0}),
                    std::invalid_argument);
}

TEST_CASE("tension equals tendon stiffness times stretch exactly") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(0.2, 4.0);
    for (int i = 0; i < 50; ++i) {
        const BeamSpec beam{dist(rng), dist(rng), dist(rng)};
        const double k = dist(rng);
        const double p = beam.length * (0.25 + 0.75 * (i % 4) / 4.0);
        const auto routing = TendonRouting::parallel(dist(rng), p, Stiffness(k));
        const TendonSolution sol = parallel_solve(beam, routing, LoadCase{dist(rng)});
        CHECK(sol.tendon_tension == k * sol.tendon_stretch); // bit-exact

        const double b_conv = dist(rng);
        const double slope = -0.9 * b_conv / beam.length;
        const auto conv = TendonRouting::convergent(slope, b_conv, beam.length, Stiffness(k));
        const TendonSolution csol = convergent_solve(beam, conv, LoadCase{dist(rng)});
        CHECK(csol.tendon_tension == k * csol.tendon_stretch);
    }
}

TEST_CASE("rigid parallel tip deflection") {
    CHECK(rigid_parallel_tip_deflection(kUnitBeam, 1.0, 1.0) ==
          doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(rigid_parallel_tip_deflection(kUnitBeam, 1e-4, 1.0) ==
          doctest::Approx(0.0).epsilon(1e-11));
    CHECK(rigid_parallel_tip_deflection(kUnitBeam, 0.5, 1.0) ==
          doctest::Approx(0.125 / 3.0 - 0.5 * 0.125 / 4.0).epsilon(1e-12));
    CHECK_THROWS_AS(rigid_parallel_tip_deflection(kUnitBeam, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rigid_parallel_tip_deflection(kUnitBeam, 1.5, 1.0), std::invalid_argument);

    // Large-stiffness parallel solve lands on the same value at the load station.
    const auto routing = TendonRouting::parallel(1.0, 0.5, Stiffness(1e9));
    const double tip = parallel_solve(kUnitBeam, routing, LoadCase{1.0}).tip_deflection;
    CHECK(rel_err(tip, 0.0260416666666667) < 1e-6);
}

TEST_CASE("convergent solve with zero slope matches parallel exactly") {
    const auto conv = TendonRouting::convergent(0.0, 1.0, 1.0, Stiffness(1.0));
    const auto par = TendonRouting::parallel(1.0, 1.0, Stiffness(1.0));
    const TendonSolution a = convergent_solve(kUnitBeam, conv, LoadCase{1.0});
    const TendonSolution b = parallel_solve(kUnitBeam, par, LoadCase{1.0});
    CHECK(a.tip_angle == b.tip_angle);
    CHECK(a.tip_deflection == b.tip_deflection);
    CHECK(a.tendon_tension == b.tendon_tension);
    CHECK(a.tendon_stretch == b.tendon_stretch);
    CHECK(a.slope_profile == b.slope_profile);
    CHECK(a.deflection_profile == b.deflection_profile);
}

TEST_CASE("convergent solve unit case") {
    const auto routing = TendonRouting::convergent(-1.0, 1.0, 1.0, Stiffness(1.0));
    const TendonSolution sol = convergent_solve(kUnitBeam, routing, LoadCase{1.0});
    CHECK(sol.tendon_tension == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sol.tip_deflection == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sol.slope_profile.front() == 0.0);
    CHECK(sol.deflection_profile.front() == 0.0);
}

TEST_CASE("convergent solve inextensible limit") {
    const auto stiff = TendonRouting::convergent(-1.0, 1.0, 1.0, Stiffness(1e9));
    const TendonSolution sol = convergent_solve(kUnitBeam, stiff, LoadCase{1.0});
    CHECK(rel_err(sol.tendon_tension, 1.0) < 1e-6);
    CHECK(std::abs(sol.tip_deflection) < 1e-6);

    const auto rigid = TendonRouting::convergent(-1.0, 1.0, 1.0, Stiffness::rigid());
    const TendonSolution rsol = convergent_solve(kUnitBeam, rigid, LoadCase{1.0});
    CHECK(rsol.tendon_tension == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rsol.tip_deflection == 0.0); // the zero-deflection optimum, exact
}

TEST_CASE("convergent solve rejects negative offsets and p != L") {
    CHECK_THROWS_AS(convergent_solve(kUnitBeam,
                                     TendonRouting::convergent(-2.0, 1.0, 1.0, Stiffness(1.0)),
                                     LoadCase{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(convergent_solve(kUnitBeam,
                                     TendonRouting::convergent(-0.5, 1.0, 0.5, Stiffness(1.0)),
                                     LoadCase{1.0}),
                    std::invalid_argument);
}

TEST_CASE("rigid convergent closed form") {
    CHECK(rigid_convergent_tip_deflection(kUnitBeam, 0.0, 1.0, 1.0) ==
          doctest::Approx(rigid_parallel_tip_deflection(kUnitBeam, 1.0, 1.0)).epsilon(1e-15));
    CHECK(rigid_convergent_tip_deflection(kUnitBeam, -1.0, 1.0, 1.0) == 0.0);
    CHECK(rigid_convergent_tip_deflection(kUnitBeam, -1.0, 1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(rigid_convergent_tip_deflection(kUnitBeam, 0.0, 0.0, 1.0),
                    std::invalid_argument);

    // General load station reduces to the parallel limit at slope 0.
    for (double p : {0.2, 0.5, 0.8, 1.0}) {
        CHECK(rigid_convergent_deflection(kUnitBeam, 0.0, 1.0, p, 1.0) ==
              doctest::Approx(rigid_parallel_tip_deflection(kUnitBeam, p, 1.0)).epsilon(1e-14));
    }
}

TEST_CASE("end angle") {
    CHECK(end_angle(kUnitBeam, 1.0, Stiffness(1.0), 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(end_angle(kUnitBeam, 1.0, Stiffness(0.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(end_angle(kUnitBeam, 0.0, Stiffness(123.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(end_angle(kUnitBeam, 0.0, Stiffness::rigid(), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(end_angle(kUnitBeam, 1.0, Stiffness::rigid(), 1.0) == 0.0);

    // Consistent with the parallel solve at p = L.
    const auto routing = TendonRouting::parallel(0.6, 1.0, Stiffness(2.5));
    CHECK(end_angle(kUnitBeam, 0.6, Stiffness(2.5), 1.0) ==
          doctest::Approx(parallel_solve(kUnitBeam, routing, LoadCase{1.0}).tip_angle)
              .epsilon(1e-14));
}

TEST_CASE("total stiffness") {
    CHECK(total_stiffness({Stiffness(3.0), Stiffness(3.0), Stiffness(3.0)}).value() ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(total_stiffness({Stiffness(1.0), Stiffness(2.0), Stiffness(3.0)}).value() ==
          doctest::Approx(6.0 / 11.0).epsilon(1e-15));
    CHECK(total_stiffness({Stiffness::rigid(), Stiffness(2.0), Stiffness(2.0)}).value() ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(total_stiffness({Stiffness::rigid(), Stiffness::rigid(), Stiffness::rigid()}).is_rigid());
    CHECK_THROWS_AS(total_stiffness({Stiffness(0.0), Stiffness(1.0), Stiffness(1.0)}),
                    std::invalid_argument);

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(1e-3, 1e3);
    for (int i = 0; i < 200; ++i) {
        const double a = dist(rng), b = dist(rng), c = dist(rng);
        const double k = total_stiffness({Stiffness(a), Stiffness(b), Stiffness(c)}).value();
        CHECK(k <= std::min({a, b, c}) * (1.0 + 1e-12));
        const double k_perm = total_stiffness({Stiffness(c), Stiffness(a), Stiffness(b)}).value();
        CHECK(k == doctest::Approx(k_perm).epsilon(1e-14));
        const double scaled =
            total_stiffness({Stiffness(2.0 * a), Stiffness(2.0 * b), Stiffness(2.0 * c)}).value();
        CHECK(scaled == doctest::Approx(2.0 * k).epsilon(1e-14));
    }
}

TEST_CASE("tip deflection is monotone in tendon stiffness and offset") {
    double prev = pure_tip_deflection(kUnitBeam, 1.0) + 1.0;
    for (double k : {0.0, 0.3, 1.0, 3.0, 10.0, 100.0, 1e4}) {
        const auto routing = TendonRouting::parallel(1.0, 1.0, Stiffness(k));
        const double tip = parallel_solve(kUnitBeam, routing, LoadCase{1.0}).tip_deflection;
        CHECK(tip <= prev);
        prev = tip;
    }
    prev = pure_tip_deflection(kUnitBeam, 1.0) + 1.0;
    for (double b : {0.1, 0.3, 0.6, 1.0, 1.5}) {
        const auto routing = TendonRouting::parallel(b, 1.0, Stiffness(2.0));
        const double tip = parallel_solve(kUnitBeam, routing, LoadCase{1.0}).tip_deflection;
        CHECK(tip <= prev);
        prev = tip;
    }
}

TEST_CASE("normalized ordering: pure >= parallel >= convergent") {
    // Matched root offset b = 1 and slope a = -b/L over the rigid limits.
    for (int i = 1; i <= 101; ++i) {
        const double p = static_cast<double>(i) / 101.0;
        const double pure = p * p * p / 3.0;
        const double parallel = rigid_parallel_tip_deflection(kUnitBeam, p, 1.0);
        const double convergent = rigid_convergent_deflection(kUnitBeam, -1.0, 1.0, p, 1.0);
        CHECK(pure >= parallel - 1e-15);
        CHECK(parallel >= convergent - 1e-15);
        CHECK(convergent >= -1e-15);
    }
}

TEST_CASE("limit errors decrease with tendon stiffness") {
    const double reference = rigid_parallel_tip_deflection(kUnitBeam, 1.0, 1.0);
    double prev_err = 1e9;
    for (double k : {1e6, 1e7, 1e8}) {
        const auto routing = TendonRouting::parallel(1.0, 1.0, Stiffness(k));
        const double tip = parallel_solve(kUnitBeam, routing, LoadCase{1.0}).tip_deflection;
        const double err = rel_err(tip, reference);
        CHECK(err < 1e-3);
        CHECK(err < prev_err);
        prev_err = err;
    }
}
