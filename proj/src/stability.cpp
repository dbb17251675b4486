#include "softgrip/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace softgrip::stability {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

} // namespace

void OscillatorSpec::validate() const {
    require(std::isfinite(inertia) && inertia > 0.0, "oscillator: J must be > 0");
    require(std::isfinite(base_damping) && base_damping >= 0.0, "oscillator: c0 must be >= 0");
    require(std::isfinite(stiffness_damping) && stiffness_damping >= 0.0,
            "oscillator: eta must be >= 0");
    require(std::isfinite(stiffness) && stiffness > 0.0, "oscillator: k must be > 0");
    require(std::isfinite(initial_velocity), "oscillator: initial velocity must be finite");
    require(settle_threshold > 0.0, "oscillator: settle threshold must be > 0");
}

ResponseSeries impulse_response(const OscillatorSpec& spec, double duration, double dt) {
    spec.validate();
    require(duration > 0.0, "impulse_response: duration must be > 0");
    require(dt > 0.0 && dt <= 1e-3, "impulse_response: dt must satisfy 0 < dt <= 1 ms");

    const double c = spec.damping();
    const double inv_j = 1.0 / spec.inertia;
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));

    ResponseSeries series;
    series.dt = dt;
    series.angle.reserve(steps + 1);
    series.velocity.reserve(steps + 1);

    double theta = 0.0;
    double omega = spec.initial_velocity;
    series.angle.push_back(theta);
    series.velocity.push_back(omega);
    for (std::size_t i = 0; i < steps; ++i) {
        // Midpoint step for (theta, omega).
        const double acc = -(c * omega + spec.stiffness * theta) * inv_j;
        const double theta_mid = theta + 0.5 * dt * omega;
        const double omega_mid = omega + 0.5 * dt * acc;
        const double acc_mid = -(c * omega_mid + spec.stiffness * theta_mid) * inv_j;
        theta += dt * omega_mid;
        omega += dt * acc_mid;
        series.angle.push_back(theta);
        series.velocity.push_back(omega);
    }
    return series;
}

double peak_amplitude(const ResponseSeries& series) {
    require(!series.angle.empty(), "peak_amplitude: empty series");
    double peak = 0.0;
    for (double a : series.angle) peak = std::max(peak, std::abs(a));
    return peak;
}

SettleResult settling_time(const ResponseSeries& series, double threshold) {
    require(!series.angle.empty(), "settling_time: empty series");
    require(threshold > 0.0, "settling_time: threshold must be > 0");

    std::size_t last_exceed = series.angle.size(); // sentinel: none
    for (std::size_t i = series.angle.size(); i-- > 0;) {
        if (std::abs(series.angle[i]) > threshold) {
            last_exceed = i;
            break;
        }
    }
    if (last_exceed == series.angle.size()) return {true, 0.0};
    if (last_exceed + 1 == series.angle.size()) return {false, series.duration()};
    return {true, series.dt * static_cast<double>(last_exceed)};
}

namespace {

// ---- calibration ----------------------------------------------------------
//
// The underdamped response is theta(t) = A exp(-alpha t) sin(w_d t) with
// A = v0 / w_d, alpha = c / (2J), w_d^2 = k/J - alpha^2. Extrema share the
// factor sin(phi), phi = atan(w_d / alpha), so the first peak and the
// envelope crossing of the threshold give two equations per experiment.

struct ModeParams {
    double alpha = 0.0;
    double omega_d = 0.0;

    double natural_sq() const { return omega_d * omega_d + alpha * alpha; } // k/J
};

double first_peak_time(const ModeParams& m) { return std::atan2(m.omega_d, m.alpha) / m.omega_d; }

double predicted_peak(double amplitude, const ModeParams& m) {
    const double sin_phi = m.omega_d / std::sqrt(m.natural_sq());
    return amplitude * sin_phi * std::exp(-m.alpha * first_peak_time(m));
}

// alpha such that the extremum envelope decays from the peak to the threshold
// between the first peak and the settle target.
double alpha_from_settle(double peak, double threshold, double settle, double omega_d) {
    double alpha = std::log(peak / threshold) / settle;
    for (int i = 0; i < 50; ++i) {
        const double t_p = first_peak_time({alpha, omega_d});
        const double span = settle - t_p;
        if (span <= 0.05 * settle)
            throw std::runtime_error("calibrate: settle target below the first-peak time");
        alpha = std::log(peak / threshold) / span;
    }
    return alpha;
}

// Solve (alpha, omega_d) for one experiment given the effective strike
// velocity. The predicted peak is monotone decreasing in omega_d once past
// the low-frequency plateau, so bisection applies.
ModeParams solve_experiment(double strike_velocity, double peak_target, double settle_target,
                            double threshold) {
    auto peak_error = [&](double omega_d) {
        const double alpha = alpha_from_settle(peak_target, threshold, settle_target, omega_d);
        return predicted_peak(strike_velocity / omega_d, {alpha, omega_d}) - peak_target;
    };

    double lo = 1e-3, hi = 1e4;
    if (peak_error(lo) < 0.0)
        throw std::runtime_error("calibrate: peak target unreachable (increase strike gain)");
    if (peak_error(hi) > 0.0)
        throw std::runtime_error("calibrate: peak target unreachable (decrease strike gain)");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (peak_error(mid) > 0.0 ? lo : hi) = mid;
    }
    const double omega_d = 0.5 * (lo + hi);
    return {alpha_from_settle(peak_target, threshold, settle_target, omega_d), omega_d};
}

struct Observables {
    double peak = 0.0;
    double settle = 0.0;
    bool settled = false;
};

Observables measure(const OscillatorSpec& spec, double settle_hint, double dt) {
    const double duration = 2.0 * settle_hint + 1.0;
    const ResponseSeries series = impulse_response(spec, duration, dt);
    const SettleResult settle = settling_time(series, spec.settle_threshold);
    return {peak_amplitude(series), settle.time, settle.settled};
}

OscillatorSpec make_spec(const ModeParams& m, double strike_velocity, double c0, double eta,
                         double threshold) {
    OscillatorSpec spec;
    spec.inertia = 1.0;
    spec.stiffness = m.natural_sq();
    spec.base_damping = c0;
    spec.stiffness_damping = eta;
    spec.initial_velocity = strike_velocity;
    spec.settle_threshold = threshold;
    return spec;
}

// Decompose per-experiment damping into c = c0 + eta*k. Returns false when
// the pair cannot be represented with c0, eta >= 0.
bool decompose_damping(const ModeParams& base, const ModeParams& pre, double& c0, double& eta) {
    const double c_b = 2.0 * base.alpha;
    const double c_p = 2.0 * pre.alpha;
    const double k_b = base.natural_sq();
    const double k_p = pre.natural_sq();
    if (std::abs(k_p - k_b) < 1e-9 * std::max(k_b, k_p)) {
        eta = 0.0;
        c0 = 0.5 * (c_b + c_p);
    } else {
        eta = (c_p - c_b) / (k_p - k_b);
        c0 = c_b - eta * k_b;
    }
    return eta >= 0.0 && c0 >= 0.0;
}

// Minimal Nelder-Mead for the low-dimensional polish step. Deterministic.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::pair<double, std::vector<double>>> simplex;
    simplex.reserve(n + 1);
    simplex.emplace_back(f(x0), x0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = x0;
        x[i] += (x[i] != 0.0) ? 0.05 * std::abs(x[i]) : 0.05;
        simplex.emplace_back(f(x), x);
    }

    auto centroid_excluding_worst = [&]() {
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) c[j] += simplex[i].second[j];
        }
        for (double& v : c) v /= static_cast<double>(n);
        return c;
    };
    auto blend = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> out(n);
        for (std::size_t j = 0; j < n; ++j) out[j] = a[j] + t * (b[j] - a[j]);
        return out;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::vector<double> c = centroid_excluding_worst();
        auto& worst = simplex.back();

        const std::vector<double> reflected = blend(c, worst.second, -1.0);
        const double f_r = f(reflected);
        if (f_r < simplex.front().first) {
            const std::vector<double> expanded = blend(c, worst.second, -2.0);
            const double f_e = f(expanded);
            worst = (f_e < f_r) ? std::make_pair(f_e, expanded) : std::make_pair(f_r, reflected);
        } else if (f_r < simplex[n - 1].first) {
            worst = {f_r, reflected};
        } else {
            const std::vector<double> contracted = blend(c, worst.second, 0.5);
            const double f_c = f(contracted);
            if (f_c < worst.first) {
                worst = {f_c, contracted};
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    simplex[i].second = blend(simplex[0].second, simplex[i].second, 0.5);
                    simplex[i].first = f(simplex[i].second);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return simplex.front().second;
}

} // namespace

CalibrationResult calibrate(const CalibrationTarget& baseline,
                            const CalibrationTarget& pretensioned,
                            const CalibrationOptions& options) {
    for (const CalibrationTarget* t : {&baseline, &pretensioned}) {
        require(t->initial_velocity > 0.0, "calibrate: trigger velocity must be > 0");
        require(t->peak > options.threshold, "calibrate: peak must exceed the settle threshold");
        require(t->settle > 0.0, "calibrate: settle target must be > 0");
    }
    require(options.strike_gain > 0.0, "calibrate: strike gain must be > 0");

    const double v_b = options.strike_gain * baseline.initial_velocity;
    const double v_p = options.strike_gain * pretensioned.initial_velocity;

    // Closed-form seed.
    ModeParams base = solve_experiment(v_b, baseline.peak, baseline.settle, options.threshold);
    ModeParams pre;
    if (options.k_ratio_free) {
        pre = solve_experiment(v_p, pretensioned.peak, pretensioned.settle, options.threshold);
    } else {
        const double ratio = (baseline.peak * pretensioned.initial_velocity) /
                             (pretensioned.peak * baseline.initial_velocity);
        const double k_p = base.natural_sq() * ratio * ratio;
        double alpha = base.alpha;
        for (int i = 0; i < 50; ++i) {
            const double omega_d = std::sqrt(std::max(k_p - alpha * alpha, 1e-12));
            alpha = alpha_from_settle(pretensioned.peak, options.threshold, pretensioned.settle,
                                      omega_d);
        }
        pre = {alpha, std::sqrt(std::max(k_p - alpha * alpha, 1e-12))};
    }

    // Polish against the simulated observables at a coarser step.
    const double coarse_dt = std::min(2e-4, options.dt * 2.0);
    auto objective = [&](const std::vector<double>& x) {
        const ModeParams b{std::exp(x[0]), std::exp(x[1])};
        ModeParams p;
        if (options.k_ratio_free) {
            p = ModeParams{std::exp(x[2]), std::exp(x[3])};
        } else {
            const double ratio = (baseline.peak * pretensioned.initial_velocity) /
                                 (pretensioned.peak * baseline.initial_velocity);
            const double alpha_p = std::exp(x[2]);
            const double k_p = b.natural_sq() * ratio * ratio;
            if (k_p <= alpha_p * alpha_p) return 1e6;
            p = ModeParams{alpha_p, std::sqrt(k_p - alpha_p * alpha_p)};
        }
        double c0 = 0.0, eta = 0.0;
        double penalty = decompose_damping(b, p, c0, eta) ? 0.0 : 10.0;
        eta = std::max(eta, 0.0);
        c0 = std::max(c0, 0.0);

        const Observables ob =
            measure(make_spec(b, v_b, c0, eta, options.threshold), baseline.settle, coarse_dt);
        const Observables op =
            measure(make_spec(p, v_p, c0, eta, options.threshold), pretensioned.settle, coarse_dt);
        if (!ob.settled || !op.settled) penalty += 10.0;

        auto rel = [](double got, double want) { return (got - want) / want; };
        const double e0 = rel(ob.peak, baseline.peak);
        const double e1 = rel(ob.settle, baseline.settle);
        const double e2 = rel(op.peak, pretensioned.peak);
        const double e3 = rel(op.settle, pretensioned.settle);
        return e0 * e0 + e1 * e1 + e2 * e2 + e3 * e3 + penalty;
    };

    std::vector<double> x0{std::log(base.alpha), std::log(base.omega_d), std::log(pre.alpha)};
    if (options.k_ratio_free) x0.push_back(std::log(pre.omega_d));
    const std::vector<double> x = nelder_mead(objective, x0, 150);

    base = {std::exp(x[0]), std::exp(x[1])};
    if (options.k_ratio_free) {
        pre = {std::exp(x[2]), std::exp(x[3])};
    } else {
        const double ratio = (baseline.peak * pretensioned.initial_velocity) /
                             (pretensioned.peak * baseline.initial_velocity);
        const double alpha_p = std::exp(x[2]);
        pre = {alpha_p, std::sqrt(std::max(base.natural_sq() * ratio * ratio - alpha_p * alpha_p,
                                           1e-12))};
    }

    double c0 = 0.0, eta = 0.0;
    decompose_damping(base, pre, c0, eta);
    eta = std::max(eta, 0.0);
    c0 = std::max(c0, 0.0);

    CalibrationResult result;
    result.baseline = make_spec(base, v_b, c0, eta, options.threshold);
    result.pretensioned = make_spec(pre, v_p, c0, eta, options.threshold);
    result.strike_gain = options.strike_gain;

    const Observables ob = measure(result.baseline, baseline.settle, options.dt);
    const Observables op = measure(result.pretensioned, pretensioned.settle, options.dt);
    result.peak_baseline = ob.peak;
    result.settle_baseline = ob.settle;
    result.peak_pretensioned = op.peak;
    result.settle_pretensioned = op.settle;

    auto rel_err = [](double got, double want) { return std::abs(got - want) / want; };
    result.residual = std::max({rel_err(ob.peak, baseline.peak),
                                rel_err(ob.settle, baseline.settle),
                                rel_err(op.peak, pretensioned.peak),
                                rel_err(op.settle, pretensioned.settle)});
    if (!ob.settled || !op.settled)
        throw std::runtime_error("calibrate: fitted trace does not certify settling");
    if (result.residual > options.max_residual)
        throw std::runtime_error("calibrate: infeasible targets, residual " +
                                 std::to_string(result.residual));
    return result;
}

} // namespace softgrip::stability
