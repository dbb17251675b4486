#include "softgrip/mech.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace softgrip::mech {

namespace {

double cube(double x) { return x * x * x; }

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

} // namespace

Stiffness::Stiffness(double value) : value_(value) {
    require(std::isfinite(value) && value >= 0.0, "stiffness must be finite and >= 0");
}

Stiffness Stiffness::rigid() {
    Stiffness k;
    k.rigid_ = true;
    return k;
}

Stiffness Stiffness::finite(double value) { return Stiffness(value); }

double Stiffness::value() const {
    if (rigid_) throw std::logic_error("rigid stiffness has no finite value");
    return value_;
}

void BeamSpec::validate() const {
    require(std::isfinite(elastic_modulus) && elastic_modulus > 0.0, "beam: E must be > 0");
    require(std::isfinite(second_moment) && second_moment > 0.0, "beam: I must be > 0");
    require(std::isfinite(length) && length > 0.0, "beam: L must be > 0");
}

TendonRouting TendonRouting::parallel(double offset, double termination, Stiffness k_t) {
    return TendonRouting{0.0, offset, termination, k_t};
}

TendonRouting TendonRouting::convergent(double slope, double root_offset, double termination,
                                        Stiffness k_t) {
    return TendonRouting{slope, root_offset, termination, k_t};
}

void TendonRouting::validate(const BeamSpec& beam) const {
    require(std::isfinite(slope), "routing: slope must be finite");
    require(std::isfinite(root_offset) && root_offset > 0.0, "routing: r(0) must be > 0");
    require(std::isfinite(termination) && termination > 0.0 && termination <= beam.length,
            "routing: termination p must satisfy 0 < p <= L");
    // r(s) is linear, so nonnegativity over [0, L] reduces to the endpoints.
    require(offset_at(beam.length) >= 0.0, "routing: offset r(s) < 0 inside [0, L]");
}

void LoadCase::validate() const {
    require(std::isfinite(tip_force), "load: force must be finite");
}

double pure_tip_deflection(const BeamSpec& beam, double force) {
    beam.validate();
    require(std::isfinite(force), "load: force must be finite");
    return force * cube(beam.length) / (3.0 * beam.flexural_rigidity());
}

namespace {

// Shared profile sampler. theta_fn / delta_fn evaluate the closed forms.
template <typename ThetaFn, typename DeltaFn>
void sample_profiles(TendonSolution& out, double length, std::size_t stations, ThetaFn theta_fn,
                     DeltaFn delta_fn) {
    require(stations >= 2, "profile sampling needs at least 2 stations");
    out.stations.resize(stations);
    out.slope_profile.resize(stations);
    out.deflection_profile.resize(stations);
    const double h = length / static_cast<double>(stations - 1);
    for (std::size_t i = 0; i < stations; ++i) {
        const double s = (i + 1 == stations) ? length : h * static_cast<double>(i);
        out.stations[i] = s;
        out.slope_profile[i] = theta_fn(s);
        out.deflection_profile[i] = delta_fn(s);
    }
}

} // namespace

TendonSolution parallel_solve(const BeamSpec& beam, const TendonRouting& routing,
                              const LoadCase& load, std::size_t stations) {
    beam.validate();
    routing.validate(beam);
    load.validate();
    require(routing.is_parallel(), "parallel_solve requires slope a = 0");

    const double ei = beam.flexural_rigidity();
    const double length = beam.length;
    const double r = routing.root_offset;
    const double p = routing.termination;
    const double force = load.tip_force;

    TendonSolution sol;
    if (routing.tendon_stiffness.is_rigid()) {
        // Inextensible tendon: stretch vanishes, so theta(L) = 0.
        sol.tip_angle = 0.0;
        sol.tendon_stretch = 0.0;
        sol.tendon_tension = force * p * p / (2.0 * r * length);
    } else {
        const double k_t = routing.tendon_stiffness.value();
        sol.tip_angle = force * p * p / (2.0 * (ei + r * r * k_t * length));
        sol.tendon_stretch = r * sol.tip_angle;
        sol.tendon_tension = k_t * sol.tendon_stretch;
    }
    const double tau = sol.tendon_tension;
    sol.tip_deflection = force * cube(p) / (3.0 * ei) - r * tau * p * p / (2.0 * ei);

    auto theta = [&](double s) {
        if (s <= p) return (force * s * (p - 0.5 * s) - r * tau * s) / ei;
        return (0.5 * force * p * p - r * tau * s) / ei;
    };
    auto delta = [&](double s) {
        if (s <= p) return (force * s * s * (0.5 * p - s / 6.0) - 0.5 * r * tau * s * s) / ei;
        return (force * p * p * (0.5 * s - p / 6.0) - 0.5 * r * tau * s * s) / ei;
    };
    sample_profiles(sol, length, stations, theta, delta);
    return sol;
}

double rigid_parallel_tip_deflection(const BeamSpec& beam, double termination, double force) {
    beam.validate();
    require(std::isfinite(force), "load: force must be finite");
    require(std::isfinite(termination) && termination > 0.0 && termination <= beam.length,
            "termination p must satisfy 0 < p <= L");
    const double ei = beam.flexural_rigidity();
    return force * cube(termination) / (3.0 * ei) -
           (termination / beam.length) * force * cube(termination) / (4.0 * ei);
}

TendonSolution convergent_solve(const BeamSpec& beam, const TendonRouting& routing,
                                const LoadCase& load, std::size_t stations) {
    beam.validate();
    routing.validate(beam);
    load.validate();
    // The closed-form tension holds for a tendon fixed at the fingertip.
    require(std::abs(routing.termination - beam.length) <= 1e-12 * beam.length,
            "convergent_solve requires termination p = L");

    if (routing.is_parallel()) return parallel_solve(beam, routing, load, stations);

    const double ei = beam.flexural_rigidity();
    const double length = beam.length;
    const double a = routing.slope;
    const double b = routing.root_offset;
    const double force = load.tip_force;

    // Moment-weighted routing integrals, factored so the slope = -b/L optimum
    // cancels exactly: I1 = int r(s)(L-s) ds, I2 = int r(s)^2 ds.
    const double i1 = length * length * (a * length + 3.0 * b) / 6.0;
    const double i2 =
        length * (a * a * length * length + 3.0 * a * b * length + 3.0 * b * b) / 3.0;

    TendonSolution sol;
    if (routing.tendon_stiffness.is_rigid()) {
        sol.tendon_stretch = 0.0;
        sol.tendon_tension = force * i1 / i2;
    } else {
        const double k_t = routing.tendon_stiffness.value();
        sol.tendon_stretch = force * i1 / (ei + k_t * i2);
        sol.tendon_tension = k_t * sol.tendon_stretch;
    }
    const double tau = sol.tendon_tension;
    sol.tip_angle = (0.5 * force * length * length - tau * (0.5 * a * length * length + b * length)) / ei;
    sol.tip_deflection =
        force * cube(length) / (3.0 * ei) - tau * (a * cube(length) + 3.0 * b * length * length) / (6.0 * ei);

    auto theta = [&](double s) {
        return (force * s * (length - 0.5 * s) - tau * s * (0.5 * a * s + b)) / ei;
    };
    auto delta = [&](double s) {
        return (force * s * s * (0.5 * length - s / 6.0) - tau * s * s * (a * s / 6.0 + 0.5 * b)) / ei;
    };
    sample_profiles(sol, length, stations, theta, delta);
    return sol;
}

double rigid_convergent_deflection(const BeamSpec& beam, double slope, double root_offset,
                                   double termination, double force) {
    beam.validate();
    require(std::isfinite(force), "load: force must be finite");
    const double length = beam.length;
    require(std::isfinite(termination) && termination > 0.0 && termination <= length,
            "termination p must satisfy 0 < p <= L");
    require(root_offset >= 0.0 && slope * length + root_offset >= 0.0,
            "offset r(s) must stay >= 0 over [0, L]");
    const double denom =
        3.0 * (slope * slope * length * length + 3.0 * slope * root_offset * length +
               3.0 * root_offset * root_offset);
    require(denom > 0.0, "degenerate routing: a = b = 0");

    const double num = slope * termination + 3.0 * root_offset;
    const double factor = (termination / length) * (num * num) / denom;
    const double ei = beam.flexural_rigidity();
    return force * cube(termination) / (3.0 * ei) - factor * force * cube(termination) / (4.0 * ei);
}

double rigid_convergent_tip_deflection(const BeamSpec& beam, double slope, double root_offset,
                                       double force) {
    return rigid_convergent_deflection(beam, slope, root_offset, beam.length, force);
}

double end_angle(const BeamSpec& beam, double offset, const Stiffness& k_eff, double force) {
    beam.validate();
    require(std::isfinite(force), "load: force must be finite");
    require(std::isfinite(offset), "offset must be finite");
    const double ei = beam.flexural_rigidity();
    const double length = beam.length;
    if (offset == 0.0) return force * length * length / (2.0 * ei);
    if (k_eff.is_rigid()) return 0.0;
    return force * length * length / (2.0 * (ei + offset * offset * length * k_eff.value()));
}

Stiffness total_stiffness(const StiffnessChain& chain) {
    double reciprocal_sum = 0.0;
    for (const Stiffness& k : {chain.spring, chain.tendon, chain.material}) {
        if (k.is_rigid()) continue; // rigid member drops out of the series
        require(k.value() > 0.0, "total_stiffness: finite members must be > 0");
        reciprocal_sum += 1.0 / k.value();
    }
    if (reciprocal_sum == 0.0) return Stiffness::rigid();
    return Stiffness(1.0 / reciprocal_sum);
}

} // namespace softgrip::mech
