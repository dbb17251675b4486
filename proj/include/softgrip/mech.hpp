#pragma once

#include <cstddef>
#include <vector>

namespace softgrip::mech {

// Stiffness coefficient that may take the distinguished "rigid" (inextensible)
// value. Rigid is a sentinel, not a large float, so limit checks stay exact.
class Stiffness {
public:
    Stiffness() = default;
    Stiffness(double value); // finite, >= 0
    static Stiffness rigid();
    static Stiffness finite(double value);

    bool is_rigid() const { return rigid_; }
    bool is_zero() const { return !rigid_ && value_ == 0.0; }
    // Finite value; must not be called on a rigid stiffness.
    double value() const;

    bool operator==(const Stiffness&) const = default;

private:
    double value_ = 0.0;
    bool rigid_ = false;
};

// Flexural properties of one finger backbone.
struct BeamSpec {
    double elastic_modulus = 0.0; // E
    double second_moment = 0.0;   // I
    double length = 0.0;          // L

    double flexural_rigidity() const { return elastic_modulus * second_moment; }
    void validate() const;
};

// Tendon offset law r(s) = slope*s + root_offset, measured from the neutral
// axis, terminated at arc position p. Parallel routing is slope = 0.
struct TendonRouting {
    double slope = 0.0;       // a (<= 0 converges toward the neutral axis)
    double root_offset = 0.0; // b = r(0), > 0
    double termination = 0.0; // p, 0 < p <= L
    Stiffness tendon_stiffness; // k_t

    double offset_at(double s) const { return slope * s + root_offset; }
    bool is_parallel() const { return slope == 0.0; }

    static TendonRouting parallel(double offset, double termination, Stiffness k_t);
    static TendonRouting convergent(double slope, double root_offset, double termination,
                                    Stiffness k_t);

    // Requires r(s) >= 0 over [0, L] and r(0) > 0.
    void validate(const BeamSpec& beam) const;
};

// Point load applied at the tendon termination station p, deflecting the
// finger away from the tendon side.
struct LoadCase {
    double tip_force = 0.0; // F

    void validate() const;
};

// Small-deflection solution. Angles and deflections are reported as positive
// magnitudes toward the load; profiles are sampled on uniform stations over
// [0, L]. tip_deflection is the deflection at the load station p (the
// fingertip when p = L). tendon_tension == k_t * tendon_stretch exactly.
struct TendonSolution {
    std::vector<double> stations;           // s
    std::vector<double> slope_profile;      // theta(s), rad
    std::vector<double> deflection_profile; // delta(s)
    double tip_angle = 0.0;      // theta(L)
    double tip_deflection = 0.0; // delta(p)
    double tendon_stretch = 0.0; // Delta
    double tendon_tension = 0.0; // tau
};

// Series chain spring / tendon / soft material.
struct StiffnessChain {
    Stiffness spring;   // k_s
    Stiffness tendon;   // k_t
    Stiffness material; // k_m
};

inline constexpr std::size_t kDefaultProfileStations = 201;

// Bare cantilever tip deflection F*L^3 / (3*E*I).
double pure_tip_deflection(const BeamSpec& beam, double force);

// Constant-offset tendon routed along the finger, load at station p.
TendonSolution parallel_solve(const BeamSpec& beam, const TendonRouting& routing,
                              const LoadCase& load,
                              std::size_t stations = kDefaultProfileStations);

// Inextensible-tendon limit of the parallel solution, evaluated at the load
// station: F*p^3/(3EI) - (p/L)*F*p^3/(4EI).
double rigid_parallel_tip_deflection(const BeamSpec& beam, double termination, double force);

// Linearly converging tendon fixed at the fingertip (termination p = L).
TendonSolution convergent_solve(const BeamSpec& beam, const TendonRouting& routing,
                                const LoadCase& load,
                                std::size_t stations = kDefaultProfileStations);

// Inextensible-tendon limit of the convergent solution with the load at
// station p; reduces to rigid_parallel_tip_deflection when slope = 0 and to
// the tip closed form at p = L.
double rigid_convergent_deflection(const BeamSpec& beam, double slope, double root_offset,
                                   double termination, double force);

// Tip value (p = L): F*L^3/(3EI) - f*F*L^3/(4EI) with
// f = (aL+3b)^2 / (3(a^2L^2 + 3abL + 3b^2)).
double rigid_convergent_tip_deflection(const BeamSpec& beam, double slope, double root_offset,
                                       double force);

// End deflection angle F*L^2 / (2(EI + r^2*L*k_eff)). k_eff may be the raw
// tendon stiffness or the combined series stiffness; the caller chooses.
double end_angle(const BeamSpec& beam, double offset, const Stiffness& k_eff, double force);

// Series combination k_s, k_t, k_m; rigid members drop out.
Stiffness total_stiffness(const StiffnessChain& chain);

} // namespace softgrip::mech
