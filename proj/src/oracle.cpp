#include "softgrip/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace softgrip::oracle {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// Distributed moment toward the load at tension tau, positive toward the
// bend: m(s) = F*(p - s) for s <= p, minus the tendon counter-moment r(s)*tau.
double moment_at(const DiscretizedBeam& in, double s, double tau) {
    const double p = in.routing.termination;
    const double load_part = (s <= p) ? in.load.tip_force * (p - s) : 0.0;
    return load_part - in.routing.offset_at(s) * tau;
}

struct Quadrature {
    std::vector<double> stations;
    std::vector<double> theta;
    std::vector<double> delta;
    double stretch = 0.0; // int r(s) theta'(s) ds
};

// Cumulative composite trapezoid over the uniform grid.
Quadrature integrate(const DiscretizedBeam& in, double tau) {
    const std::size_t n = in.station_count;
    const double length = in.beam.length;
    const double h = length / static_cast<double>(n - 1);
    const double ei = in.beam.flexural_rigidity();

    Quadrature q;
    q.stations.resize(n);
    q.theta.resize(n);
    q.delta.resize(n);

    double prev_curvature = moment_at(in, 0.0, tau) / ei;
    double prev_stretch_integrand = in.routing.offset_at(0.0) * prev_curvature;
    q.stations[0] = 0.0;
    q.theta[0] = 0.0;
    q.delta[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double s = (i + 1 == n) ? length : h * static_cast<double>(i);
        q.stations[i] = s;
        const double curvature = moment_at(in, s, tau) / ei;
        q.theta[i] = q.theta[i - 1] + 0.5 * h * (prev_curvature + curvature);
        q.delta[i] = q.delta[i - 1] + 0.5 * h * (q.theta[i - 1] + q.theta[i]);
        const double stretch_integrand = in.routing.offset_at(s) * curvature;
        q.stretch += 0.5 * h * (prev_stretch_integrand + stretch_integrand);
        prev_curvature = curvature;
        prev_stretch_integrand = stretch_integrand;
    }
    return q;
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const double h = xs[1] - xs[0];
    auto i = static_cast<std::size_t>((x - xs.front()) / h);
    if (i + 1 >= xs.size()) i = xs.size() - 2;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

} // namespace

void DiscretizedBeam::validate() const {
    beam.validate();
    routing.validate(beam);
    load.validate();
    require(station_count >= 8, "oracle: station_count must be >= 8");
    require(fixed_point_tol > 0.0, "oracle: fixed_point_tol must be > 0");
    require(max_iterations >= 1, "oracle: max_iterations must be >= 1");
}

mech::TendonSolution discretized_solve(const DiscretizedBeam& input) {
    input.validate();
    const mech::Stiffness& k_t = input.routing.tendon_stiffness;

    // Delta(tau) is affine: Delta = stretch0 + slope * tau.
    const double stretch0 = integrate(input, 0.0).stretch;
    const double slope = integrate(input, 1.0).stretch - stretch0;

    double tau = 0.0;
    double residual = 0.0;
    bool converged = false;
    for (std::size_t iter = 0; iter < input.max_iterations; ++iter) {
        if (k_t.is_rigid()) {
            // Constraint Delta = 0 (theta_L = 0 for parallel routing).
            tau = -stretch0 / slope;
            residual = std::abs(stretch0 + slope * tau) / std::max(std::abs(stretch0), 1e-300);
        } else {
            const double k = k_t.value();
            tau = k * stretch0 / (1.0 - k * slope);
            const double scale = std::max({std::abs(tau), k * std::abs(stretch0), 1e-300});
            residual = std::abs(tau - k * (stretch0 + slope * tau)) / scale;
        }
        if (residual < input.fixed_point_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("oracle: fixed point did not converge, residual " +
                                 std::to_string(residual));

    Quadrature q = integrate(input, tau);
    mech::TendonSolution sol;
    sol.stations = std::move(q.stations);
    sol.slope_profile = std::move(q.theta);
    sol.deflection_profile = std::move(q.delta);
    sol.tip_angle = sol.slope_profile.back();
    sol.tip_deflection = interpolate(sol.stations, sol.deflection_profile, input.routing.termination);
    sol.tendon_tension = tau;
    sol.tendon_stretch = k_t.is_rigid() ? 0.0 : q.stretch;
    return sol;
}

std::vector<ConvergenceRow> convergence_study(const DiscretizedBeam& base, std::size_t levels) {
    base.validate();
    require(levels >= 3, "convergence_study: need at least 3 levels");

    // Closed-form reference from mech; the study measures quadrature error.
    const mech::TendonSolution closed =
        base.routing.is_parallel()
            ? mech::parallel_solve(base.beam, base.routing, base.load)
            : mech::convergent_solve(base.beam, base.routing, base.load);

    std::vector<ConvergenceRow> rows;
    rows.reserve(levels);
    DiscretizedBeam refined = base;
    for (std::size_t level = 0; level < levels; ++level) {
        const mech::TendonSolution numeric = discretized_solve(refined);
        rows.push_back({refined.station_count,
                        refined.beam.length / static_cast<double>(refined.station_count - 1),
                        std::abs(numeric.tip_deflection - closed.tip_deflection)});
        refined.station_count = refined.station_count * 2 - 1;
    }
    return rows;
}

void SegmentChain::validate() const {
    require(segment_count >= 10, "chain: segment_count must be >= 10");
    require(length > 0.0, "chain: length must be > 0");
    require(flexural_rigidity > 0.0, "chain: flexural rigidity must be > 0");
    require(tendon_offset >= 0.0, "chain: tendon offset must be >= 0");
    require(tendon_slope * length + tendon_offset >= 0.0, "chain: offset r(s) < 0 inside [0, L]");
    require(preload >= 0.0, "chain: preload must be >= 0");
    require(mass >= 0.0, "chain: mass must be >= 0");
    for (double t : tension_schedule)
        require(std::isfinite(t) && t >= 0.0, "chain: tensions must be finite and >= 0");
}

namespace {

struct ChainState {
    std::vector<double> joint_angles; // relative rotation per joint

    double bend_angle() const {
        double total = 0.0;
        for (double a : joint_angles) total += a;
        return total;
    }
};

// Forward kinematics; returns per-segment endpoint positions.
std::vector<std::pair<double, double>> link_positions(const SegmentChain& chain,
                                                      const ChainState& state) {
    const double ell = chain.length / static_cast<double>(chain.segment_count);
    double heading = chain.base_angle_deg * std::numbers::pi / 180.0;
    double x = 0.0, y = 0.0;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(chain.segment_count + 1);
    pts.emplace_back(x, y);
    for (std::size_t i = 0; i < chain.segment_count; ++i) {
        heading -= state.joint_angles[i]; // positive joint angle bends toward +x
        x += ell * std::cos(heading);
        y += ell * std::sin(heading);
        pts.emplace_back(x, y);
    }
    return pts;
}

// Torque of gravity about each joint for the current configuration.
std::vector<double> gravity_torques(const SegmentChain& chain, const ChainState& state) {
    const std::size_t n = chain.segment_count;
    std::vector<double> torques(n, 0.0);
    if (!chain.gravity || chain.mass <= 0.0) return torques;

    const auto pts = link_positions(chain, state);
    const double seg_weight = chain.mass / static_cast<double>(n) * chain.gravity_accel;
    // Mass lumped at segment midpoints; gravity acts along -y, so the torque
    // about joint i is sum over outboard segments of W * (x_cm - x_joint).
    for (std::size_t i = 0; i < n; ++i) {
        const double joint_x = pts[i].first;
        double torque = 0.0;
        for (std::size_t j = i; j < n; ++j) {
            const double cm_x = 0.5 * (pts[j].first + pts[j + 1].first);
            torque += seg_weight * (cm_x - joint_x);
        }
        torques[i] = torque;
    }
    return torques;
}

ChainState equilibrium(const SegmentChain& chain, double tension, std::size_t step_index) {
    const std::size_t n = chain.segment_count;
    const double ell = chain.length / static_cast<double>(n);
    const double joint_stiffness = chain.flexural_rigidity / ell;

    ChainState state;
    state.joint_angles.assign(n, 0.0);

    std::vector<double> arm(n);
    for (std::size_t i = 0; i < n; ++i)
        arm[i] = chain.tendon_slope * (static_cast<double>(i) * ell) + chain.tendon_offset;

    if (!chain.gravity || chain.mass <= 0.0) {
        // Joint moments are configuration-independent; equilibrium is direct.
        for (std::size_t i = 0; i < n; ++i)
            state.joint_angles[i] = tension * arm[i] / joint_stiffness;
        return state;
    }

    const double relax = 0.5;
    const std::size_t max_sweeps = 20000;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        const auto torques = gravity_torques(chain, state);
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double target = (tension * arm[i] + torques[i]) / joint_stiffness;
            const double next = state.joint_angles[i] + relax * (target - state.joint_angles[i]);
            max_change = std::max(max_change, std::abs(next - state.joint_angles[i]));
            state.joint_angles[i] = next;
        }
        if (!std::isfinite(max_change))
            throw std::runtime_error("bend: equilibrium diverged at step " +
                                     std::to_string(step_index));
        if (max_change < 1e-12) return state;
    }
    throw std::runtime_error("bend: equilibrium not converged at step " +
                             std::to_string(step_index));
}

} // namespace

BendTrajectory simulate_bend(const SegmentChain& chain) {
    chain.validate();

    std::vector<double> schedule = chain.tension_schedule;
    if (schedule.empty()) schedule.push_back(0.0);

    BendTrajectory traj;
    traj.steps.reserve(schedule.size());
    std::size_t index = 0;
    for (double commanded : schedule) {
        const ChainState state = equilibrium(chain, commanded + chain.preload, index);
        const auto pts = link_positions(chain, state);
        traj.steps.push_back({commanded, pts.back().first, pts.back().second,
                              state.bend_angle() * 180.0 / std::numbers::pi});
        ++index;
    }
    return traj;
}

} // namespace softgrip::oracle
