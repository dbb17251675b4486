// softgrip: tendon-driven variable-stiffness gripper simulator.
//
// Subcommands: deflect, sweep-fig5, stability, bend, policy, agent-run,
// enhance, oracle. Exit codes: 0 success, 1 usage/config error, 2 numeric
// failure, 3 abnormal grasp outcome.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "softgrip/agent.hpp"
#include "softgrip/config.hpp"
#include "softgrip/mech.hpp"
#include "softgrip/oracle.hpp"
#include "softgrip/policy.hpp"
#include "softgrip/stability.hpp"

#include "svg.hpp"

namespace {

using namespace softgrip;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitAbnormal = 3;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Writes to the file at `path`, or stdout when path is "-".
void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

mech::Stiffness parse_stiffness(const std::string& text) {
    if (text == "rigid") return mech::Stiffness::rigid();
    try {
        return mech::Stiffness(std::stod(text));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("stiffness must be a number or 'rigid': " + text);
    }
}

struct DeflectArgs {
    double elastic_modulus = 1.0;
    double second_moment = 1.0;
    double length = 1.0;
    double force = 1.0;
    double termination = -1.0; // default: L
    double slope = -1.0;
    double offset = 1.0;
    double parallel_offset = -1.0; // default: offset
    std::string tendon = "1";
    bool rigid = false;
    std::size_t stations = mech::kDefaultProfileStations;
    std::string profile_csv;
};

int cmd_deflect(const DeflectArgs& args) {
    const mech::BeamSpec beam{args.elastic_modulus, args.second_moment, args.length};
    const double p = args.termination > 0.0 ? args.termination : beam.length;
    const double r = args.parallel_offset > 0.0 ? args.parallel_offset : args.offset;
    const mech::Stiffness k_t = args.rigid ? mech::Stiffness::rigid() : parse_stiffness(args.tendon);
    const mech::LoadCase load{args.force};

    std::ostringstream out;
    out << "pure        delta_tip=" << fmt(mech::pure_tip_deflection(beam, args.force)) << "\n";

    const auto par_routing = mech::TendonRouting::parallel(r, p, k_t);
    const mech::TendonSolution par = mech::parallel_solve(beam, par_routing, load, args.stations);
    out << "parallel    delta_tip=" << fmt(par.tip_deflection) << " theta_L=" << fmt(par.tip_angle)
        << " tau=" << fmt(par.tendon_tension) << " stretch=" << fmt(par.tendon_stretch) << "\n";

    std::optional<mech::TendonSolution> conv;
    if (p == beam.length) {
        const auto conv_routing = mech::TendonRouting::convergent(args.slope, args.offset, p, k_t);
        conv = mech::convergent_solve(beam, conv_routing, load, args.stations);
        out << "convergent  delta_tip=" << fmt(conv->tip_deflection)
            << " theta_L=" << fmt(conv->tip_angle) << " tau=" << fmt(conv->tendon_tension)
            << " stretch=" << fmt(conv->tendon_stretch) << "\n";
    } else {
        out << "convergent  (skipped: closed form needs p = L)\n";
    }

    out << "rigid       parallel=" << fmt(mech::rigid_parallel_tip_deflection(beam, p, args.force))
        << " convergent="
        << fmt(mech::rigid_convergent_deflection(beam, args.slope, args.offset, p, args.force))
        << "\n";
    std::cout << out.str();

    if (!args.profile_csv.empty()) {
        std::ostringstream csv;
        csv << "s,theta_parallel,delta_parallel";
        if (conv) csv << ",theta_convergent,delta_convergent";
        csv << "\n";
        for (std::size_t i = 0; i < par.stations.size(); ++i) {
            csv << fmt(par.stations[i]) << "," << fmt(par.slope_profile[i]) << ","
                << fmt(par.deflection_profile[i]);
            if (conv)
                csv << "," << fmt(conv->slope_profile[i]) << "," << fmt(conv->deflection_profile[i]);
            csv << "\n";
        }
        write_text(args.profile_csv, csv.str());
    }
    return kExitOk;
}

// Normalized stiffness comparison: rigid-limit tip deflection vs the tendon
// end position, for the bare beam, a parallel tendon (r = 1) and a convergent
// tendon with slope -1.
std::string fig5_csv(int points) {
    const mech::BeamSpec beam{1.0, 1.0, 1.0};
    std::ostringstream csv;
    csv << "p_over_L,pure,parallel,convergent\n";
    for (int i = 1; i <= points; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(points);
        const double pure = p * p * p / 3.0;
        const double parallel = mech::rigid_parallel_tip_deflection(beam, p, 1.0);
        const double convergent = mech::rigid_convergent_deflection(beam, -1.0, 1.0, p, 1.0);
        csv << fmt(p) << "," << fmt(pure) << "," << fmt(parallel) << "," << fmt(convergent) << "\n";
    }
    return csv.str();
}

int cmd_sweep_fig5(const config::RunConfig& cfg, const std::string& csv_path,
                   const std::string& svg_path) {
    const std::string csv = fig5_csv(cfg.sweep.points);
    write_text(csv_path, csv);
    if (!svg_path.empty()) {
        cli::SvgSeries pure{"pure", "red", {}};
        cli::SvgSeries par{"parallel", "blue", {}};
        cli::SvgSeries conv{"convergent", "green", {}};
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            double p, a, b, c;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p, &a, &b, &c) == 4) {
                pure.points.emplace_back(p, a);
                par.points.emplace_back(p, b);
                conv.points.emplace_back(p, c);
            }
        }
        cli::write_svg(svg_path, {pure, par, conv}, "p / L", "normalized tip deflection");
    }
    return kExitOk;
}

struct StabilityArgs {
    bool calibrate = false;
    double inertia = 1.0;
    double base_damping = 0.0;
    double stiffness_damping = 0.0;
    double stiffness = 1.0;
    double initial_velocity = 0.0;
    double duration = 6.0;
    std::string trace_csv;
    std::string report_json;
};

std::string trace_csv(const stability::ResponseSeries& series) {
    std::ostringstream csv;
    csv << "t,theta_deg,omega_deg_s\n";
    for (std::size_t i = 0; i < series.angle.size(); ++i)
        csv << fmt(series.dt * static_cast<double>(i)) << "," << fmt(series.angle[i]) << ","
            << fmt(series.velocity[i]) << "\n";
    return csv.str();
}

void print_observables(const char* tag, const stability::ResponseSeries& series, double threshold) {
    const double peak = stability::peak_amplitude(series);
    const stability::SettleResult settle = stability::settling_time(series, threshold);
    std::cout << tag << " peak_deg=" << fmt(peak);
    if (settle.settled)
        std::cout << " settle_s=" << fmt(settle.time) << "\n";
    else
        std::cout << " settle_s=not-settled\n";
}

int cmd_stability(const config::RunConfig& cfg, const StabilityArgs& args) {
    const auto& sc = cfg.stability;
    if (args.calibrate) {
        stability::CalibrationOptions options;
        options.k_ratio_free = sc.k_ratio_free;
        options.strike_gain = sc.strike_gain;
        options.threshold = sc.threshold;
        options.max_residual = sc.max_residual;
        options.dt = sc.dt;
        const stability::CalibrationResult fit =
            stability::calibrate(sc.baseline, sc.pretensioned, options);
        std::cout << "baseline    k=" << fmt(fit.baseline.stiffness)
                  << " c0=" << fmt(fit.baseline.base_damping)
                  << " eta=" << fmt(fit.baseline.stiffness_damping)
                  << " peak_deg=" << fmt(fit.peak_baseline)
                  << " settle_s=" << fmt(fit.settle_baseline) << "\n";
        std::cout << "pretension  k=" << fmt(fit.pretensioned.stiffness)
                  << " peak_deg=" << fmt(fit.peak_pretensioned)
                  << " settle_s=" << fmt(fit.settle_pretensioned) << "\n";
        std::cout << "residual    " << fmt(fit.residual) << "\n";
        if (!args.trace_csv.empty())
            write_text(args.trace_csv,
                       trace_csv(stability::impulse_response(fit.baseline, args.duration, sc.dt)));
        if (!args.report_json.empty()) {
            nlohmann::json j;
            j["strike_gain"] = fit.strike_gain;
            j["baseline"] = {{"k", fit.baseline.stiffness},
                             {"c0", fit.baseline.base_damping},
                             {"eta", fit.baseline.stiffness_damping},
                             {"omega0", fit.baseline.initial_velocity},
                             {"peak", fit.peak_baseline},
                             {"settle", fit.settle_baseline}};
            j["pretensioned"] = {{"k", fit.pretensioned.stiffness},
                                 {"omega0", fit.pretensioned.initial_velocity},
                                 {"peak", fit.peak_pretensioned},
                                 {"settle", fit.settle_pretensioned}};
            j["residual"] = fit.residual;
            write_text(args.report_json, j.dump(2) + "\n");
        }
        return kExitOk;
    }

    stability::OscillatorSpec spec;
    spec.inertia = args.inertia;
    spec.base_damping = args.base_damping;
    spec.stiffness_damping = args.stiffness_damping;
    spec.stiffness = args.stiffness;
    spec.initial_velocity = args.initial_velocity;
    spec.settle_threshold = sc.threshold;
    const stability::ResponseSeries series =
        stability::impulse_response(spec, args.duration, sc.dt);
    print_observables("response   ", series, sc.threshold);
    if (!args.trace_csv.empty()) write_text(args.trace_csv, trace_csv(series));
    return kExitOk;
}

int cmd_bend(const config::RunConfig& cfg, const std::string& csv_path,
             const std::string& svg_path) {
    const oracle::BendTrajectory traj = oracle::simulate_bend(cfg.bend);
    std::ostringstream csv;
    csv << "tension,tip_x,tip_y,bend_angle_deg\n";
    for (const auto& step : traj.steps)
        csv << fmt(step.tension) << "," << fmt(step.tip_x) << "," << fmt(step.tip_y) << ","
            << fmt(step.bend_angle_deg) << "\n";
    write_text(csv_path, csv.str());
    if (!svg_path.empty()) {
        cli::SvgSeries tip{"tip path", "black", {}};
        for (const auto& step : traj.steps) tip.points.emplace_back(step.tip_x, step.tip_y);
        cli::write_svg(svg_path, {tip}, "x (mm)", "y (mm)");
    }
    return kExitOk;
}

int cmd_policy_classify(const config::RunConfig& cfg, const std::string& label,
                        const std::string& hint_tag) {
    const policy::Lexicon lexicon = cfg.paths.lexicon.empty()
                                        ? policy::Lexicon::builtin()
                                        : policy::Lexicon::load(cfg.paths.lexicon);
    std::optional<policy::MaterialClass> hint;
    if (!hint_tag.empty()) {
        hint = policy::material_class_from_tag(hint_tag);
        if (!hint) throw std::invalid_argument("unknown material class tag: " + hint_tag);
    }
    const auto level = policy::classify_material(label, hint, lexicon);
    if (!level) {
        std::cout << "unclassified\n";
        return kExitOk;
    }
    const auto setting = policy::level_to_pretension(*level, cfg.agent.pretension);
    std::cout << "level=" << level->value() << " class=" << to_string(class_for(*level))
              << " pretension_ratio=" << fmt(setting.ratio) << " actuator=" << fmt(setting.actuator)
              << "\n";
    return kExitOk;
}

int cmd_policy_adapt(const std::string& label, int level, const std::string& failure, bool cue,
                     const std::string& ledger_path) {
    policy::OutcomeRecord rec;
    rec.label = label;
    rec.attempted = policy::StiffnessLevel(level);
    rec.outcome = policy::Outcome::abnormal;
    if (failure == "slip")
        rec.failure = policy::FailureMode::slip;
    else if (failure == "crush")
        rec.failure = policy::FailureMode::crush;
    else
        throw std::invalid_argument("failure must be slip or crush");
    rec.hard_surface_cue = cue;
    rec.timestamp = agent::SystemClock().now();

    std::vector<policy::OutcomeRecord> history;
    if (!ledger_path.empty() && std::filesystem::exists(ledger_path))
        history = agent::OutcomeLedger(ledger_path).read_all();
    std::cout << "revised_level=" << policy::adapt(history, rec).value() << "\n";
    if (!ledger_path.empty()) agent::OutcomeLedger(ledger_path).append(rec);
    return kExitOk;
}

struct AgentRunArgs {
    std::string image_path;
    bool live = false;
    std::string fixtures;
    std::string ledger;
    std::string episode_id = "ep-0001";
    bool wall_clock = false;
    bool print_hash = false;
};

std::unique_ptr<agent::GripExecutor> load_executor(const std::filesystem::path& fixtures,
                                                   const image::Image& img) {
    // Optional execution script keyed by the raw image hash.
    const auto script_path = fixtures / (image::content_hash(img) + ".script.json");
    std::ifstream in(script_path, std::ios::binary);
    if (!in)
        return std::make_unique<agent::ScriptedExecutor>(std::vector<agent::ExecutionResult>{
            {policy::Outcome::correct, policy::FailureMode::none, false}});
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("script") || !j["script"].is_array())
        throw agent::ConfigError("bad executor script: " + script_path.string());
    std::vector<agent::ExecutionResult> script;
    for (const auto& item : j["script"]) {
        agent::ExecutionResult result;
        const std::string outcome = item.value("outcome", "correct");
        result.outcome =
            outcome == "correct" ? policy::Outcome::correct : policy::Outcome::abnormal;
        const std::string failure = item.value("failure", "none");
        result.failure = failure == "slip"    ? policy::FailureMode::slip
                         : failure == "crush" ? policy::FailureMode::crush
                                              : policy::FailureMode::none;
        result.hard_surface_cue = item.value("cue", false);
        script.push_back(result);
    }
    return std::make_unique<agent::ScriptedExecutor>(std::move(script));
}

int cmd_agent_run(const config::RunConfig& cfg, const AgentRunArgs& args) {
    const image::Image img = image::load_pnm(args.image_path);
    if (args.print_hash) {
        std::cout << "image_hash=" << image::content_hash(img) << "\n";
        const image::LumaStats stats = image::luminance_stats(img);
        const image::EnhanceMode mode = image::should_enhance(stats, cfg.agent.gates);
        if (mode != image::EnhanceMode::none) {
            const image::Image enhanced = image::enhance(
                img, mode,
                {mode == image::EnhanceMode::brighten ? cfg.agent.gamma_brighten
                                                      : cfg.agent.gamma_darken,
                 cfg.agent.equalize});
            std::cout << "enhanced_hash=" << image::content_hash(enhanced) << "\n";
        }
        return kExitOk;
    }

    std::unique_ptr<agent::VisionClient> vision;
    std::unique_ptr<agent::GripExecutor> executor;
    if (args.live) {
        vision = std::make_unique<agent::HttpVisionClient>(cfg.endpoint.host, cfg.endpoint.port,
                                                           cfg.endpoint.path,
                                                           cfg.endpoint.timeout_s);
        executor = std::make_unique<agent::ScriptedExecutor>(std::vector<agent::ExecutionResult>{
            {policy::Outcome::correct, policy::FailureMode::none, false}});
    } else {
        const std::string fixtures = args.fixtures.empty() ? cfg.paths.fixtures : args.fixtures;
        vision = std::make_unique<agent::MockVisionClient>(fixtures);
        executor = load_executor(fixtures, img);
    }

    std::unique_ptr<agent::Clock> clock;
    if (args.wall_clock)
        clock = std::make_unique<agent::SystemClock>();
    else
        clock = std::make_unique<agent::LogicalClock>();

    const std::string ledger_path = args.ledger.empty() ? cfg.paths.ledger : args.ledger;
    agent::EpisodeLedger ledger(ledger_path);

    agent::AgentContext ctx{*vision, *executor, *clock};
    ctx.episode_id = args.episode_id;
    ctx.image_ref = std::filesystem::path(args.image_path).filename().string();
    ctx.ledger = &ledger;
    if (std::filesystem::exists(ledger_path)) {
        for (const agent::Episode& past : ledger.read_all())
            ctx.memory.push_back(agent::summarize(past));
    }
    policy::Lexicon lexicon = cfg.paths.lexicon.empty() ? policy::Lexicon::builtin()
                                                        : policy::Lexicon::load(cfg.paths.lexicon);
    ctx.lexicon = &lexicon;

    const agent::Episode ep = agent::run_episode(img, cfg.agent, ctx);

    for (const auto& ev : ep.stages)
        std::cout << "[" << ev.timestamp << "] stage=" << agent::to_string(ev.stage) << "\n";
    if (ep.enhancement.applied)
        std::cout << "enhancement mode=" << image::to_string(ep.enhancement.mode)
                  << " gamma=" << fmt(ep.enhancement.gamma)
                  << (ep.enhancement.fallback ? " (external hook failed, built-in used)" : "")
                  << "\n";
    else
        std::cout << "enhancement none\n";
    for (const auto& rec : ep.outcomes)
        std::cout << "attempt level=" << rec.attempted.value()
                  << " outcome=" << policy::to_string(rec.outcome)
                  << " failure=" << policy::to_string(rec.failure) << "\n";
    if (ep.plan)
        std::cout << "plan level=" << ep.plan->level.value()
                  << " ratio=" << fmt(ep.plan->pretension.ratio)
                  << " mode=" << policy::to_string(ep.plan->mode) << " box=["
                  << ep.plan->grasp_box.x << "," << ep.plan->grasp_box.y << ","
                  << ep.plan->grasp_box.w << "," << ep.plan->grasp_box.h << "]\n";
    std::cout << "status " << ep.final_status;
    if (!ep.abort_reason.empty()) std::cout << " (" << ep.abort_reason << ")";
    std::cout << "\n";

    if (ep.final_status == "abnormal") return kExitAbnormal;
    if (ep.final_status == "aborted") return kExitNumeric;
    return kExitOk;
}

struct EnhanceArgs {
    std::string input;
    std::string output;
    std::string mode = "auto";
    double gamma = 0.0; // 0 = per-mode default
    bool no_equalize = false;
    std::string external;
};

int cmd_enhance(const config::RunConfig& cfg, const EnhanceArgs& args) {
    const image::Image img = image::load_pnm(args.input);
    const image::LumaStats stats = image::luminance_stats(img);

    image::EnhanceMode mode;
    if (args.mode == "auto")
        mode = image::should_enhance(stats, cfg.agent.gates);
    else if (args.mode == "none")
        mode = image::EnhanceMode::none;
    else if (args.mode == "brighten")
        mode = image::EnhanceMode::brighten;
    else if (args.mode == "darken")
        mode = image::EnhanceMode::darken;
    else
        throw std::invalid_argument("mode must be auto|none|brighten|darken");

    image::Image out = img;
    if (mode != image::EnhanceMode::none) {
        if (!args.external.empty()) {
            const image::ExternalResult ext = image::run_external_enhancer(args.external, img);
            if (!ext.ok) throw std::runtime_error("external enhancer failed: " + ext.error);
            out = ext.image;
        } else {
            const double default_gamma = mode == image::EnhanceMode::brighten
                                             ? cfg.agent.gamma_brighten
                                             : cfg.agent.gamma_darken;
            out = image::enhance(img, mode,
                                 {args.gamma > 0.0 ? args.gamma : default_gamma,
                                  !args.no_equalize && cfg.agent.equalize});
        }
    }
    image::save_pnm(out, args.output);
    std::cout << "mode=" << image::to_string(mode) << " mean_before=" << fmt(stats.mean)
              << " mean_after=" << fmt(image::luminance_stats(out).mean) << "\n";
    return kExitOk;
}

struct OracleArgs {
    DeflectArgs deflect;
    std::size_t stations = 4097;
    std::size_t levels = 4;
    std::string csv;
};

oracle::DiscretizedBeam make_discretized(const DeflectArgs& args, std::size_t stations) {
    oracle::DiscretizedBeam d;
    d.beam = mech::BeamSpec{args.elastic_modulus, args.second_moment, args.length};
    const double p = args.termination > 0.0 ? args.termination : d.beam.length;
    const mech::Stiffness k_t = args.rigid ? mech::Stiffness::rigid() : parse_stiffness(args.tendon);
    if (args.slope == 0.0)
        d.routing = mech::TendonRouting::parallel(args.offset, p, k_t);
    else
        d.routing = mech::TendonRouting::convergent(args.slope, args.offset, p, k_t);
    d.load = mech::LoadCase{args.force};
    d.station_count = stations;
    return d;
}

int cmd_oracle_solve(const OracleArgs& args) {
    const oracle::DiscretizedBeam d = make_discretized(args.deflect, args.stations);
    const mech::TendonSolution numeric = oracle::discretized_solve(d);
    const mech::TendonSolution closed =
        d.routing.is_parallel() ? mech::parallel_solve(d.beam, d.routing, d.load)
                                : mech::convergent_solve(d.beam, d.routing, d.load);
    std::cout << "numeric     delta_tip=" << fmt(numeric.tip_deflection)
              << " theta_L=" << fmt(numeric.tip_angle) << " tau=" << fmt(numeric.tendon_tension)
              << "\n";
    std::cout << "closed      delta_tip=" << fmt(closed.tip_deflection)
              << " theta_L=" << fmt(closed.tip_angle) << " tau=" << fmt(closed.tendon_tension)
              << "\n";
    std::cout << "abs_error   delta_tip="
              << std::abs(numeric.tip_deflection - closed.tip_deflection) << "\n";
    return kExitOk;
}

int cmd_oracle_converge(const OracleArgs& args) {
    oracle::DiscretizedBeam base = make_discretized(args.deflect, args.stations);
    const auto rows = oracle::convergence_study(base, args.levels);
    std::ostringstream csv;
    csv << "stations,spacing,tip_error,ratio\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << rows[i].stations << "," << fmt(rows[i].spacing) << ",";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", rows[i].tip_error);
        csv << buf << ",";
        if (i == 0)
            csv << "";
        else
            csv << fmt(rows[i - 1].tip_error / rows[i].tip_error);
        csv << "\n";
    }
    write_text(args.csv.empty() ? "-" : args.csv, csv.str());
    return kExitOk;
}

void add_deflect_flags(CLI::App* app, DeflectArgs& args) {
    app->add_option("--E", args.elastic_modulus, "elastic modulus");
    app->add_option("--I", args.second_moment, "second moment of area");
    app->add_option("--L", args.length, "finger length");
    app->add_option("--F", args.force, "load at the tendon termination");
    app->add_option("--p", args.termination, "tendon termination (default: L)");
    app->add_option("--a", args.slope, "tendon offset slope");
    app->add_option("--b", args.offset, "tendon root offset");
    app->add_option("--r", args.parallel_offset, "parallel tendon offset (default: --b)");
    app->add_option("--k-t", args.tendon, "tendon stiffness, number or 'rigid'");
    app->add_flag("--rigid", args.rigid, "use the rigid tendon sentinel");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tendon-driven variable-stiffness soft gripper simulator"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (or $SOFTGRIP_CONFIG)");

    DeflectArgs deflect_args;
    deflect_args.slope = -1.0;
    CLI::App* deflect = app.add_subcommand("deflect", "closed-form finger deflection");
    add_deflect_flags(deflect, deflect_args);
    deflect->add_option("--stations", deflect_args.stations, "profile sample count");
    deflect->add_option("--profile-csv", deflect_args.profile_csv, "write sampled profiles");

    std::string sweep_csv = "-";
    std::string sweep_svg;
    CLI::App* sweep = app.add_subcommand("sweep-fig5", "normalized stiffness comparison sweep");
    sweep->add_option("--csv", sweep_csv, "output CSV path or -");
    sweep->add_option("--svg", sweep_svg, "optional SVG chart");

    StabilityArgs stability_args;
    CLI::App* stab = app.add_subcommand("stability", "struck-finger oscillation model");
    stab->add_flag("--calibrate", stability_args.calibrate, "fit against the configured targets");
    stab->add_option("--J", stability_args.inertia, "inertia");
    stab->add_option("--c0", stability_args.base_damping, "base damping");
    stab->add_option("--eta", stability_args.stiffness_damping, "stiffness-proportional damping");
    stab->add_option("--k", stability_args.stiffness, "stiffness");
    stab->add_option("--omega0", stability_args.initial_velocity, "strike velocity, deg/s");
    stab->add_option("--duration", stability_args.duration, "trace duration, s");
    stab->add_option("--trace-csv", stability_args.trace_csv, "write the angle trace");
    stab->add_option("--report-json", stability_args.report_json, "write the calibration report");

    std::string bend_csv = "-";
    std::string bend_svg;
    double bend_preload = -1.0, bend_tension_max = -1.0;
    int bend_steps = -1;
    bool bend_gravity = false;
    CLI::App* bend = app.add_subcommand("bend", "segment-chain large-deflection trajectory");
    bend->add_option("--csv", bend_csv, "output CSV path or -");
    bend->add_option("--svg", bend_svg, "optional SVG chart");
    bend->add_option("--preload", bend_preload, "tendon preload");
    bend->add_option("--tension-max", bend_tension_max, "ramp end tension");
    bend->add_option("--steps", bend_steps, "ramp step count");
    bend->add_flag("--gravity", bend_gravity, "enable gravity");

    CLI::App* pol = app.add_subcommand("policy", "stiffness taxonomy dry runs");
    pol->require_subcommand(1);
    std::string classify_label, classify_hint;
    CLI::App* classify = pol->add_subcommand("classify", "label -> stiffness level");
    classify->add_option("label", classify_label, "object label")->required();
    classify->add_option("--hint", classify_hint, "material class hint");
    std::string adapt_label = "object", adapt_failure, adapt_ledger;
    int adapt_level = 0;
    bool adapt_cue = false;
    CLI::App* adapt = pol->add_subcommand("adapt", "failure-driven level revision");
    adapt->add_option("--label", adapt_label, "object label");
    adapt->add_option("--level", adapt_level, "attempted level")->required();
    adapt->add_option("--failure", adapt_failure, "slip or crush")->required();
    adapt->add_flag("--hard-cue", adapt_cue, "hard surface cue observed");
    adapt->add_option("--ledger", adapt_ledger, "outcome ledger to read and append");

    AgentRunArgs agent_args;
    CLI::App* agent_run = app.add_subcommand("agent-run", "run one grasp episode");
    agent_run->add_option("--image", agent_args.image_path, "PNM image")->required();
    agent_run->add_flag("--live", agent_args.live, "query the configured HTTP endpoint");
    agent_run->add_option("--fixtures", agent_args.fixtures, "mock fixtures directory");
    agent_run->add_option("--ledger", agent_args.ledger, "episode ledger path");
    agent_run->add_option("--id", agent_args.episode_id, "episode id");
    agent_run->add_flag("--wall-clock", agent_args.wall_clock, "timestamp with the system clock");
    agent_run->add_flag("--print-hash", agent_args.print_hash,
                        "print fixture hashes for this image and exit");

    EnhanceArgs enhance_args;
    CLI::App* enh = app.add_subcommand("enhance", "standalone image filter");
    enh->add_option("--in", enhance_args.input, "input PNM")->required();
    enh->add_option("--out", enhance_args.output, "output PNM")->required();
    enh->add_option("--mode", enhance_args.mode, "auto|none|brighten|darken");
    enh->add_option("--gamma", enhance_args.gamma, "override gamma");
    enh->add_flag("--no-equalize", enhance_args.no_equalize, "skip histogram equalization");
    enh->add_option("--external", enhance_args.external, "external enhancer command");

    OracleArgs oracle_args;
    oracle_args.deflect.slope = 0.0;
    CLI::App* orc = app.add_subcommand("oracle", "discretized solver and convergence study");
    orc->require_subcommand(1);
    CLI::App* orc_solve = orc->add_subcommand("solve", "numeric vs closed form");
    add_deflect_flags(orc_solve, oracle_args.deflect);
    orc_solve->add_option("--n", oracle_args.stations, "station count");
    CLI::App* orc_conv = orc->add_subcommand("converge", "grid refinement error table");
    add_deflect_flags(orc_conv, oracle_args.deflect);
    orc_conv->add_option("--n0", oracle_args.stations, "base station count");
    orc_conv->add_option("--levels", oracle_args.levels, "refinement levels");
    orc_conv->add_option("--csv", oracle_args.csv, "output CSV path or -");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        config::RunConfig cfg = config::default_config();
        if (config_path.empty()) {
            if (const char* env = std::getenv("SOFTGRIP_CONFIG")) config_path = env;
        }
        if (!config_path.empty()) cfg = config::load_config(config_path);

        if (deflect->parsed()) return cmd_deflect(deflect_args);
        if (sweep->parsed()) return cmd_sweep_fig5(cfg, sweep_csv, sweep_svg);
        if (stab->parsed()) return cmd_stability(cfg, stability_args);
        if (bend->parsed()) {
            if (bend_preload >= 0.0) cfg.bend.preload = bend_preload;
            if (bend_tension_max >= 0.0) cfg.bend_tension_max = bend_tension_max;
            if (bend_steps >= 0) cfg.bend_tension_steps = bend_steps;
            if (bend_gravity) cfg.bend.gravity = true;
            cfg.bend.tension_schedule = config::bend_schedule(cfg);
            return cmd_bend(cfg, bend_csv, bend_svg);
        }
        if (pol->parsed()) {
            if (classify->parsed()) return cmd_policy_classify(cfg, classify_label, classify_hint);
            if (adapt->parsed())
                return cmd_policy_adapt(adapt_label, adapt_level, adapt_failure, adapt_cue,
                                        adapt_ledger);
        }
        if (agent_run->parsed()) return cmd_agent_run(cfg, agent_args);
        if (enh->parsed()) return cmd_enhance(cfg, enhance_args);
        if (orc->parsed()) {
            if (orc_solve->parsed()) return cmd_oracle_solve(oracle_args);
            if (orc_conv->parsed()) return cmd_oracle_converge(oracle_args);
        }
        return kExitUsage;
    } catch (const agent::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
