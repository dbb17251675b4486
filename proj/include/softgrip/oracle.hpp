#pragma once

#include <cstddef>
#include <vector>

#include "softgrip/mech.hpp"

namespace softgrip::oracle {

// Inputs for the quadrature-based solve of the tendon-coupled moment law.
// Independent of the closed forms in mech; used to validate them.
struct DiscretizedBeam {
    mech::BeamSpec beam;
    mech::TendonRouting routing;
    mech::LoadCase load;
    std::size_t station_count = 4097;  // >= 8, uniform over [0, L]
    double fixed_point_tol = 1e-12;    // dimensionless residual bound
    std::size_t max_iterations = 10000;

    void validate() const;
};

// Integrates theta' = m(s)/EI with composite trapezoid and closes the loop
// tau = k_t * Delta, Delta = int r(s) theta'(s) ds. Delta is affine in tau,
// so each pass solves the fixed point exactly; non-convergence is an error.
mech::TendonSolution discretized_solve(const DiscretizedBeam& input);

struct ConvergenceRow {
    std::size_t stations = 0;
    double spacing = 0.0;
    double tip_error = 0.0; // |delta_tip(n) - delta_closed|
};

// Halves the grid spacing per level (n -> 2n-1) and reports the tip-deflection
// error against the closed form. Expected order >= 2.
std::vector<ConvergenceRow> convergence_study(const DiscretizedBeam& base, std::size_t levels);

// Pseudo-rigid segment chain for large-deflection bending: n rigid links with
// rotational springs EI/ds at the joints, tendon moment tau*r(s) per joint.
struct SegmentChain {
    std::size_t segment_count = 110; // >= 10
    double length = 110.0;           // finger length (mm in the shipped config)
    double flexural_rigidity = 1800.0;
    double tendon_slope = 0.0;       // offset law r(s) = slope*s + offset
    double tendon_offset = 5.0;
    std::vector<double> tension_schedule; // commanded tension per step
    double preload = 0.0;            // added to every commanded tension
    bool gravity = false;
    double mass = 0.0;               // total mass in kg, uniformly distributed
    double gravity_accel = 9.81;     // N/kg; joint torques come out in N*mm
    double base_angle_deg = 90.0;    // 90 = finger pointing straight up

    void validate() const;
};

struct BendStep {
    double tension = 0.0; // commanded (preload excluded)
    double tip_x = 0.0;
    double tip_y = 0.0;
    double bend_angle_deg = 0.0;
};

struct BendTrajectory {
    std::vector<BendStep> steps;
};

// Quasi-static equilibrium per tension step. With zero tension, zero preload
// and gravity off the chain is straight with the tip at (0, L).
BendTrajectory simulate_bend(const SegmentChain& chain);

} // namespace softgrip::oracle
