#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "softgrip/agent.hpp"
#include "softgrip/config.hpp"
#include "softgrip/image.hpp"
#include "softgrip/mech.hpp"
#include "softgrip/oracle.hpp"
#include "softgrip/policy.hpp"
#include "softgrip/stability.hpp"

namespace py = pybind11;
using namespace softgrip;

namespace {

mech::Stiffness stiffness_from_object(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) {
        if (obj.cast<std::string>() == "rigid") return mech::Stiffness::rigid();
        throw py::value_error("stiffness must be a number or 'rigid'");
    }
    return mech::Stiffness(obj.cast<double>());
}

// Replays one grasp episode against mock fixtures; returns the JSON line.
std::string run_mock_episode(const std::string& image_path, const std::string& fixtures_dir,
                             const std::vector<std::vector<std::string>>& script,
                             const std::string& episode_id, int max_retries) {
    const image::Image img = image::load_pnm(image_path);
    agent::MockVisionClient vision(fixtures_dir);
    std::vector<agent::ExecutionResult> steps;
    for (const auto& entry : script) {
        agent::ExecutionResult result;
        const std::string outcome = entry.empty() ? "correct" : entry[0];
        result.outcome =
            outcome == "correct" ? policy::Outcome::correct : policy::Outcome::abnormal;
        const std::string failure = entry.size() > 1 ? entry[1] : "none";
        result.failure = failure == "slip"    ? policy::FailureMode::slip
                         : failure == "crush" ? policy::FailureMode::crush
                                              : policy::FailureMode::none;
        result.hard_surface_cue = entry.size() > 2 && entry[2] == "cue";
        steps.push_back(result);
    }
    if (steps.empty()) steps.push_back({policy::Outcome::correct, policy::FailureMode::none, false});
    agent::ScriptedExecutor executor(std::move(steps));
    agent::LogicalClock clock;
    agent::AgentConfig config;
    config.max_retries = max_retries;
    agent::AgentContext ctx{vision, executor, clock};
    ctx.episode_id = episode_id;
    ctx.image_ref = std::filesystem::path(image_path).filename().string();
    return agent::run_episode(img, config, ctx).to_json_line();
}

} // namespace

PYBIND11_MODULE(softgrip, m) {
    m.doc() = "tendon-driven variable-stiffness soft gripper simulation";

    // ---- mechanics ----
    py::class_<mech::BeamSpec>(m, "BeamSpec")
        .def(py::init([](double e, double i, double length) {
                 mech::BeamSpec beam{e, i, length};
                 beam.validate();
                 return beam;
             }),
             py::arg("elastic_modulus"), py::arg("second_moment"), py::arg("length"))
        .def_readonly("elastic_modulus", &mech::BeamSpec::elastic_modulus)
        .def_readonly("second_moment", &mech::BeamSpec::second_moment)
        .def_readonly("length", &mech::BeamSpec::length)
        .def_property_readonly("flexural_rigidity", &mech::BeamSpec::flexural_rigidity);

    py::class_<mech::TendonSolution>(m, "TendonSolution")
        .def_readonly("stations", &mech::TendonSolution::stations)
        .def_readonly("slope_profile", &mech::TendonSolution::slope_profile)
        .def_readonly("deflection_profile", &mech::TendonSolution::deflection_profile)
        .def_readonly("tip_angle", &mech::TendonSolution::tip_angle)
        .def_readonly("tip_deflection", &mech::TendonSolution::tip_deflection)
        .def_readonly("tendon_stretch", &mech::TendonSolution::tendon_stretch)
        .def_readonly("tendon_tension", &mech::TendonSolution::tendon_tension);

    m.def("pure_tip_deflection", &mech::pure_tip_deflection, py::arg("beam"), py::arg("force"));
    m.def(
        "parallel_solve",
        [](const mech::BeamSpec& beam, double offset, double termination, const py::object& k_t,
           double force, std::size_t stations) {
            const auto routing =
                mech::TendonRouting::parallel(offset, termination, stiffness_from_object(k_t));
            return mech::parallel_solve(beam, routing, mech::LoadCase{force}, stations);
        },
        py::arg("beam"), py::arg("offset"), py::arg("termination"), py::arg("tendon_stiffness"),
        py::arg("force"), py::arg("stations") = mech::kDefaultProfileStations);
    m.def(
        "convergent_solve",
        [](const mech::BeamSpec& beam, double slope, double root_offset, const py::object& k_t,
           double force, std::size_t stations) {
            const auto routing = mech::TendonRouting::convergent(slope, root_offset, beam.length,
                                                                 stiffness_from_object(k_t));
            return mech::convergent_solve(beam, routing, mech::LoadCase{force}, stations);
        },
        py::arg("beam"), py::arg("slope"), py::arg("root_offset"), py::arg("tendon_stiffness"),
        py::arg("force"), py::arg("stations") = mech::kDefaultProfileStations);
    m.def("rigid_parallel_tip_deflection", &mech::rigid_parallel_tip_deflection, py::arg("beam"),
          py::arg("termination"), py::arg("force"));
    m.def("rigid_convergent_tip_deflection", &mech::rigid_convergent_tip_deflection,
          py::arg("beam"), py::arg("slope"), py::arg("root_offset"), py::arg("force"));
    m.def("rigid_convergent_deflection", &mech::rigid_convergent_deflection, py::arg("beam"),
          py::arg("slope"), py::arg("root_offset"), py::arg("termination"), py::arg("force"));
    m.def(
        "end_angle",
        [](const mech::BeamSpec& beam, double offset, const py::object& k_eff, double force) {
            return mech::end_angle(beam, offset, stiffness_from_object(k_eff), force);
        },
        py::arg("beam"), py::arg("offset"), py::arg("stiffness"), py::arg("force"));
    m.def(
        "total_stiffness",
        [](const py::object& k_s, const py::object& k_t, const py::object& k_m) -> py::object {
            const mech::Stiffness k = mech::total_stiffness({stiffness_from_object(k_s),
                                                             stiffness_from_object(k_t),
                                                             stiffness_from_object(k_m)});
            if (k.is_rigid()) return py::str("rigid");
            return py::float_(k.value());
        },
        py::arg("spring"), py::arg("tendon"), py::arg("material"));

    // ---- oracle ----
    m.def(
        "discretized_solve",
        [](const mech::BeamSpec& beam, double slope, double root_offset, double termination,
           const py::object& k_t, double force, std::size_t stations) {
            oracle::DiscretizedBeam d;
            d.beam = beam;
            d.routing = slope == 0.0
                            ? mech::TendonRouting::parallel(root_offset, termination,
                                                            stiffness_from_object(k_t))
                            : mech::TendonRouting::convergent(slope, root_offset, termination,
                                                              stiffness_from_object(k_t));
            d.load = mech::LoadCase{force};
            d.station_count = stations;
            return oracle::discretized_solve(d);
        },
        py::arg("beam"), py::arg("slope"), py::arg("root_offset"), py::arg("termination"),
        py::arg("tendon_stiffness"), py::arg("force"), py::arg("stations") = 4097);

    py::class_<oracle::SegmentChain>(m, "SegmentChain")
        .def(py::init<>())
        .def_readwrite("segment_count", &oracle::SegmentChain::segment_count)
        .def_readwrite("length", &oracle::SegmentChain::length)
        .def_readwrite("flexural_rigidity", &oracle::SegmentChain::flexural_rigidity)
        .def_readwrite("tendon_slope", &oracle::SegmentChain::tendon_slope)
        .def_readwrite("tendon_offset", &oracle::SegmentChain::tendon_offset)
        .def_readwrite("tension_schedule", &oracle::SegmentChain::tension_schedule)
        .def_readwrite("preload", &oracle::SegmentChain::preload)
        .def_readwrite("gravity", &oracle::SegmentChain::gravity)
        .def_readwrite("mass", &oracle::SegmentChain::mass)
        .def_readwrite("base_angle_deg", &oracle::SegmentChain::base_angle_deg);

    py::class_<oracle::BendStep>(m, "BendStep")
        .def_readonly("tension", &oracle::BendStep::tension)
        .def_readonly("tip_x", &oracle::BendStep::tip_x)
        .def_readonly("tip_y", &oracle::BendStep::tip_y)
        .def_readonly("bend_angle_deg", &oracle::BendStep::bend_angle_deg);

    m.def("simulate_bend", [](const oracle::SegmentChain& chain) {
        return oracle::simulate_bend(chain).steps;
    });

    // ---- stability ----
    py::class_<stability::OscillatorSpec>(m, "OscillatorSpec")
        .def(py::init<>())
        .def_readwrite("inertia", &stability::OscillatorSpec::inertia)
        .def_readwrite("base_damping", &stability::OscillatorSpec::base_damping)
        .def_readwrite("stiffness_damping", &stability::OscillatorSpec::stiffness_damping)
        .def_readwrite("stiffness", &stability::OscillatorSpec::stiffness)
        .def_readwrite("initial_velocity", &stability::OscillatorSpec::initial_velocity)
        .def_readwrite("settle_threshold", &stability::OscillatorSpec::settle_threshold);

    py::class_<stability::ResponseSeries>(m, "ResponseSeries")
        .def_readonly("angle", &stability::ResponseSeries::angle)
        .def_readonly("velocity", &stability::ResponseSeries::velocity)
        .def_readonly("dt", &stability::ResponseSeries::dt);

    m.def("impulse_response", &stability::impulse_response, py::arg("spec"), py::arg("duration"),
          py::arg("dt") = 1e-4);
    m.def("peak_amplitude", &stability::peak_amplitude);
    m.def(
        "settling_time",
        [](const stability::ResponseSeries& series, double threshold) {
            const stability::SettleResult result = stability::settling_time(series, threshold);
            return py::make_tuple(result.settled, result.time);
        },
        py::arg("series"), py::arg("threshold"));
    m.def(
        "calibrate",
        [](double omega0_base, double peak_base, double settle_base, double omega0_pre,
           double peak_pre, double settle_pre) {
            const stability::CalibrationResult fit = stability::calibrate(
                {omega0_base, peak_base, settle_base}, {omega0_pre, peak_pre, settle_pre});
            py::dict out;
            out["k_base"] = fit.baseline.stiffness;
            out["k_pre"] = fit.pretensioned.stiffness;
            out["c0"] = fit.baseline.base_damping;
            out["eta"] = fit.baseline.stiffness_damping;
            out["strike_gain"] = fit.strike_gain;
            out["peak_baseline"] = fit.peak_baseline;
            out["settle_baseline"] = fit.settle_baseline;
            out["peak_pretensioned"] = fit.peak_pretensioned;
            out["settle_pretensioned"] = fit.settle_pretensioned;
            out["residual"] = fit.residual;
            return out;
        },
        py::arg("omega0_baseline"), py::arg("peak_baseline"), py::arg("settle_baseline"),
        py::arg("omega0_pretensioned"), py::arg("peak_pretensioned"),
        py::arg("settle_pretensioned"));

    // ---- policy ----
    m.def(
        "classify_material",
        [](const std::string& label, const py::object& hint) -> py::object {
            std::optional<policy::MaterialClass> material;
            if (!hint.is_none()) {
                material = policy::material_class_from_tag(hint.cast<std::string>());
                if (!material) throw py::value_error("unknown material class tag");
            }
            const auto level = policy::classify_material(label, material);
            if (!level) return py::none();
            return py::int_(level->value());
        },
        py::arg("label"), py::arg("hint") = py::none());
    m.def(
        "level_to_pretension",
        [](int level) {
            const auto setting =
                policy::level_to_pretension(policy::StiffnessLevel(level), policy::PretensionTable());
            return py::make_tuple(setting.ratio, setting.actuator);
        },
        py::arg("level"));
    m.def(
        "adapt",
        [](const std::string& label, int level, const std::string& failure, bool hard_cue) {
            policy::OutcomeRecord rec;
            rec.label = label;
            rec.attempted = policy::StiffnessLevel(level);
            rec.outcome = policy::Outcome::abnormal;
            rec.failure =
                failure == "slip" ? policy::FailureMode::slip : policy::FailureMode::crush;
            rec.hard_surface_cue = hard_cue;
            return policy::adapt({}, rec).value();
        },
        py::arg("label"), py::arg("level"), py::arg("failure"), py::arg("hard_cue") = false);

    // ---- image ----
    m.def(
        "luminance_stats",
        [](const std::string& path) {
            const image::LumaStats stats = image::luminance_stats(image::load_pnm(path));
            return py::make_tuple(stats.mean, stats.p5, stats.p95);
        },
        py::arg("pnm_path"));
    m.def("gamma_lut", [](double gamma) {
        const image::TransferLut lut = image::gamma_lut(gamma);
        return std::vector<int>(lut.begin(), lut.end());
    });
    m.def(
        "enhance_file",
        [](const std::string& input, const std::string& output, const std::string& mode,
           double gamma, bool equalize) {
            const image::Image img = image::load_pnm(input);
            image::EnhanceMode m_ = mode == "brighten" ? image::EnhanceMode::brighten
                                    : mode == "darken" ? image::EnhanceMode::darken
                                                       : image::EnhanceMode::none;
            image::save_pnm(image::enhance(img, m_, {gamma, equalize}), output);
        },
        py::arg("input"), py::arg("output"), py::arg("mode"), py::arg("gamma") = 0.5,
        py::arg("equalize") = true);
    m.def("image_content_hash",
          [](const std::string& path) { return image::content_hash(image::load_pnm(path)); });

    // ---- agent ----
    m.def("run_mock_episode", &run_mock_episode, py::arg("image_path"), py::arg("fixtures_dir"),
          py::arg("script") = std::vector<std::vector<std::string>>{},
          py::arg("episode_id") = "ep-0001", py::arg("max_retries") = 2);
    m.def("build_prompt", [](const std::string& task, const std::vector<std::string>& tools,
                             const std::vector<std::string>& memory, std::size_t window) {
        return agent::build_prompt(task, tools, memory, window);
    }, py::arg("task"), py::arg("tools"), py::arg("memory") = std::vector<std::string>{},
       py::arg("window") = 5);
}
