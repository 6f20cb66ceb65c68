// sidebandtherm: simulate, fit and estimate sideband-asymmetry thermometry runs.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid input or usage.
// Errors are reported as one JSON object on stderr.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sbt/sbt.hpp"

namespace fs = std::filesystem;
using sbt::json;

namespace {

constexpr const char* config_env = "SIDEBAND_CONFIG";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const sbt::ValidationError*>(&e)) return "validation";
    if (dynamic_cast<const sbt::ParseError*>(&e)) return "parse";
    if (dynamic_cast<const sbt::DegenerateDetuningError*>(&e)) return "degenerate_detuning";
    if (dynamic_cast<const sbt::DegenerateFitError*>(&e)) return "degenerate_fit";
    if (dynamic_cast<const sbt::ConvergenceError*>(&e)) return "convergence";
    if (dynamic_cast<const sbt::CalibrationError*>(&e)) return "calibration";
    if (dynamic_cast<const sbt::ExtrapolationError*>(&e)) return "extrapolation";
    if (dynamic_cast<const sbt::FlatObjectiveError*>(&e)) return "flat_objective";
    if (dynamic_cast<const UsageError*>(&e)) return "usage";
    return "runtime";
}

int report(const std::exception& e) {
    json j{{"error", error_kind(e)}, {"message", e.what()}};
    if (const auto* v = dynamic_cast<const sbt::ValidationError*>(&e)) j["field"] = v->field();
    std::cerr << j.dump() << '\n';
    const bool input = dynamic_cast<const sbt::ValidationError*>(&e) || dynamic_cast<const sbt::ParseError*>(&e) ||
                       dynamic_cast<const UsageError*>(&e);
    return input ? 2 : 1;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw sbt::Error("cannot open '" + path.string() + "' for writing");
    os << text;
}

std::string resolve_config_path(const std::string& flag, const CLI::App& app) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(config_env); env && *env) return env;
    throw UsageError("--config is required (or set " + std::string(config_env) + ")\n" + app.help());
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw sbt::ParseError("--range expects MIN:MAX in Hz, got '" + text + "'");
    return {sbt::parse_double(text.substr(0, colon), "--range"), sbt::parse_double(text.substr(colon + 1), "--range")};
}

sbt::Units units_flag(const std::string& s) { return sbt::units_from_string(s); }

std::string summary(const sbt::FitResult& f, const sbt::Asymmetry& z) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "omega_tilde/2pi = %.3f Hz, gamma_tilde/2pi = %.2f +- %.2f Hz, zeta = %.4f +- %.4f",
                  sbt::angular_to_hz(f.omega_tilde), sbt::angular_to_hz(f.gamma_tilde),
                  sbt::angular_to_hz(f.sigma(sbt::p_gamma)), z.zeta, z.sigma);
    return buf;
}

// ---------------------------------------------------------------------------

struct Common {
    std::string config;
    unsigned threads = 1;
};

struct SimulateArgs {
    std::optional<double> pcl;
    std::optional<double> nbar_override;
    std::optional<std::uint64_t> seed;
    std::optional<int> m_avg;
    std::string out = ".";
    bool noiseless = false;
    std::string units = "displacement";
};

int run_simulate(const Common& c, const SimulateArgs& a, const CLI::App& app) {
    sbt::RunConfig cfg = sbt::load_config(resolve_config_path(c.config, app));
    cfg.validate();
    const double p_cl = a.pcl.value_or(cfg.cooling.power);
    if (!(p_cl >= 0.0)) throw sbt::ValidationError("pcl", "must be >= 0");
    if (a.nbar_override && !(*a.nbar_override >= 0.0)) throw sbt::ValidationError("nbar_override", "must be >= 0");
    const sbt::Units units = units_flag(a.units);

    sbt::SimulatedPair sim = sbt::simulate_pair(cfg, p_cl, a.nbar_override);
    if (units == sbt::Units::photocurrent) {
        sim.red = sbt::detection_forward(sim.detection, sim.red);
        sim.blue = sbt::detection_forward(sim.detection, sim.blue);
    }
    if (!a.noiseless) {
        const sbt::NoiseSettings ns{a.seed.value_or(cfg.seed), a.m_avg.value_or(cfg.params.n_avg)};
        sim.red = sbt::synthesize(sim.red, ns, c.threads);
        sim.blue = sbt::synthesize(sim.blue, ns, c.threads);
    }
    const fs::path out(a.out);
    fs::create_directories(out);
    sbt::write_csv_file((out / "red.csv").string(), sim.red);
    sbt::write_csv_file((out / "blue.csv").string(), sim.blue);
    std::printf("wrote %s and %s (P_CL = %g W, n_bar = %.6g)\n", (out / "red.csv").c_str(), (out / "blue.csv").c_str(),
                p_cl, sim.n_bar);
    return 0;
}

struct FitArgs {
    std::string red, blue;
    std::string range = "702e3:714e3";
    std::string out = "fit.json";
    std::string weighting = "model_refreshed";
};

sbt::FitOptions fit_options(const std::string& range, const std::string& weighting) {
    sbt::FitOptions o;
    std::tie(o.fit_min_hz, o.fit_max_hz) = parse_range(range);
    if (weighting == "model_refreshed")
        o.weighting = sbt::Weighting::model_refreshed;
    else if (weighting == "unweighted")
        o.weighting = sbt::Weighting::unweighted;
    else
        throw sbt::ValidationError("weighting", "expected model_refreshed or unweighted");
    return o;
}

int run_fit(const Common& c, const FitArgs& a) {
    const auto red = sbt::read_csv_file(a.red);
    const auto blue = sbt::read_csv_file(a.blue);
    const sbt::FitResult fit = sbt::fit_sidebands(red, blue, fit_options(a.range, a.weighting));

    // Photocurrent ratios need the detection layer of the configured beams.
    sbt::SystemParams params = sbt::SystemParams::paper_defaults();
    std::vector<sbt::BeamConfig> beams = sbt::RunConfig{}.beams();
    const char* env = std::getenv(config_env);
    if (!c.config.empty() || (env && *env)) {
        const auto cfg = sbt::load_config(!c.config.empty() ? c.config : std::string(env));
        params = cfg.params;
        beams = cfg.beams();
    }
    const sbt::Asymmetry z = sbt::sideband_asymmetry(fit, params, beams);
    json j = sbt::to_json(fit);
    j["zeta"] = sbt::finite_or_null(z.zeta);
    j["zeta_sigma"] = sbt::finite_or_null(z.sigma);
    write_file(a.out, j.dump(2) + '\n');
    std::printf("%s\n", summary(fit, z).c_str());
    return 0;
}

struct EstimateArgs {
    std::string red, blue;
    std::optional<double> pcl;
    std::optional<double> t_bath;
    std::optional<double> t_bath_sigma;
    std::string range;
    std::string out = ".";
};

int run_estimate(const Common& c, const EstimateArgs& a, const CLI::App& app) {
    const sbt::RunConfig cfg = sbt::load_config(resolve_config_path(c.config, app));
    cfg.validate();
    const double p_cl = a.pcl.value_or(cfg.cooling.power);
    const auto beams = cfg.beams_at(p_cl);
    const auto reading = cfg.thermo(p_cl);
    const double T_bath = a.t_bath.value_or(sbt::bath_temperature(cfg.params.alpha, reading.T_pot, reading.T_stage));
    const double T_sigma = a.t_bath_sigma.value_or(cfg.t_bath_sigma_k);

    sbt::FitOptions opt = cfg.fit_options();
    if (!a.range.empty()) std::tie(opt.fit_min_hz, opt.fit_max_hz) = parse_range(a.range);
    const sbt::FitResult fit = sbt::fit_sidebands(sbt::read_csv_file(a.red), sbt::read_csv_file(a.blue), opt);
    const sbt::Asymmetry z = sbt::sideband_asymmetry(fit, cfg.params, beams);

    json j;
    j["p_cl_w"] = p_cl;
    j["t_bath_k"] = T_bath;
    j["t_bath_k_sigma"] = T_sigma;
    j["fit"] = sbt::to_json(fit);
    j["zeta"] = sbt::finite_or_null(z.zeta);
    j["zeta_sigma"] = sbt::finite_or_null(z.sigma);
    j["estimates"] = json::array();
    std::string dat = "# method n_bar n_bar_sigma mode_temperature_k status\n";
    for (sbt::Method m : sbt::all_methods) {
        json e;
        try {
            sbt::PhononEstimate pe;
            switch (m) {
                case sbt::Method::asymmetry: pe = sbt::estimate_asymmetry(fit, cfg.params, beams); break;
                case sbt::Method::red_area: pe = sbt::estimate_area(fit, cfg.params, sbt::Side::red); break;
                case sbt::Method::blue_area: pe = sbt::estimate_area(fit, cfg.params, sbt::Side::blue); break;
                case sbt::Method::damping_balance:
                    pe = sbt::estimate_damping(fit, cfg.params, beams, T_bath, T_sigma);
                    break;
            }
            e = sbt::to_json(pe);
            e["mode_temperature_k"] = sbt::finite_or_null(sbt::mode_temperature(pe, fit.omega_tilde));
            dat += std::string(sbt::to_string(m)) + ' ' + sbt::detail::cell(pe.n_bar) + ' ' +
                   sbt::detail::cell(pe.sigma) + ' ' + sbt::detail::cell(sbt::mode_temperature(pe, fit.omega_tilde)) +
                   ' ' + std::string(sbt::to_string(pe.status)) + '\n';
        } catch (const sbt::Error& err) {
            // One failing method (e.g. areas on photocurrent data) does not hide the others.
            e = {{"method", sbt::to_string(m)}, {"error", error_kind(err)}, {"message", err.what()}};
            dat += std::string(sbt::to_string(m)) + " nan nan nan error\n";
        }
        j["estimates"].push_back(e);
    }
    const fs::path out(a.out);
    write_file(out / "estimate.json", j.dump(2) + '\n');
    write_file(out / "estimate.dat", dat);
    std::printf("%s\n", summary(fit, z).c_str());
    for (const auto& e : j["estimates"]) {
        if (e.contains("n_bar") && e["n_bar"].is_number())
            std::printf("  %-16s n_bar = %.4g +- %.2g\n", e["method"].get<std::string>().c_str(),
                        e["n_bar"].get<double>(), e["n_bar_sigma"].is_number() ? e["n_bar_sigma"].get<double>() : NAN);
        else
            std::printf("  %-16s failed\n", e["method"].get<std::string>().c_str());
    }
    return 0;
}

struct SweepArgs {
    std::optional<std::uint64_t> seed;
    std::optional<int> m_avg;
    bool noiseless = false;
    std::string out = "sweep";
};

int run_sweep_verb(const Common& c, const SweepArgs& a, const CLI::App& app) {
    const sbt::RunConfig cfg = sbt::load_config(resolve_config_path(c.config, app));
    sbt::SweepSettings st;
    st.seed = a.seed.value_or(cfg.seed);
    st.n_avg = a.m_avg.value_or(cfg.params.n_avg);
    st.noiseless = a.noiseless;
    st.threads = c.threads;
    if (st.n_avg < 1) throw sbt::ValidationError("m_avg", "must be >= 1");
    const auto recs = sbt::run_sweep(cfg, st);
    sbt::write_sweep_outputs(recs, a.out, st);
    int failed = 0;
    for (const auto& r : recs) failed += r.ok() ? 0 : 1;
    std::printf("swept %zu cooling powers (%d failed); outputs in %s\n", recs.size(), failed, a.out.c_str());
    return 0;
}

struct CalibrateArgs {
    std::string sweep;
    std::string reference;
    std::optional<bool> weighted;
    std::string out = "calibration";
};

int run_calibrate(const Common& c, const CalibrateArgs& a, const CLI::App& app) {
    const sbt::RunConfig cfg = sbt::load_config(resolve_config_path(c.config, app));
    cfg.validate();
    const auto recs = sbt::read_sweep_json(a.sweep);

    sbt::AlphaReference ref = cfg.alpha_reference;
    if (a.reference == "asymmetry")
        ref = sbt::AlphaReference::asymmetry;
    else if (a.reference == "blue_area")
        ref = sbt::AlphaReference::blue_area;
    else if (!a.reference.empty())
        throw sbt::ValidationError("reference", "expected asymmetry or blue_area");
    const bool weighted = a.weighted.value_or(cfg.alpha_weighted);

    json j;
    const auto apts = sbt::alpha_points(recs);
    const auto alpha = sbt::fit_alpha(apts, cfg.params, ref, weighted);
    j["alpha"] = {{"alpha", alpha.alpha},
                  {"objective", alpha.objective},
                  {"points_used", alpha.points_used},
                  {"reference", ref == sbt::AlphaReference::asymmetry ? "asymmetry" : "blue_area"},
                  {"weighted", weighted}};

    const auto spts = sbt::spring_points(recs);
    const auto cal = sbt::calibrate_g0_and_detuning(spts, cfg.params, cfg.probe.power, *cfg.cooling.detuning);
    j["coupling"] = sbt::to_json(cal);

    // Model curves at the calibrated values next to the fitted points.
    sbt::SystemParams p = cfg.params;
    p.g0 = cal.g0;
    std::string dat =
        "# p_cl_w omega_tilde_hz omega_tilde_hz_sigma model_omega_tilde_hz gamma_tilde_hz gamma_tilde_hz_sigma "
        "model_gamma_tilde_hz\n";
    for (const auto& s : spts) {
        const sbt::BeamConfig beams[] = {sbt::BeamConfig::probe(cfg.probe.power, cal.delta_probe),
                                         sbt::BeamConfig::cooling(s.p_cl, *cfg.cooling.detuning)};
        const auto m = sbt::effective_mode(p, beams);
        using sbt::angular_to_hz;
        using sbt::detail::cell;
        dat += cell(s.p_cl) + ' ' + cell(angular_to_hz(s.omega_tilde)) + ' ' + cell(angular_to_hz(s.omega_sigma)) +
               ' ' + cell(angular_to_hz(m.omega_tilde)) + ' ' + cell(angular_to_hz(s.gamma_tilde)) + ' ' +
               cell(angular_to_hz(s.gamma_sigma)) + ' ' + cell(angular_to_hz(m.gamma_tilde)) + '\n';
    }
    const fs::path out(a.out);
    write_file(out / "calibration.json", j.dump(2) + '\n');
    write_file(out / "spring.dat", dat);
    std::printf("alpha = %.4f; g0/2pi = %.4f +- %.4f Hz; Delta_probe/2pi = %.1f +- %.1f Hz\n", alpha.alpha,
                sbt::angular_to_hz(cal.g0), sbt::angular_to_hz(cal.g0_sigma), sbt::angular_to_hz(cal.delta_probe),
                sbt::angular_to_hz(cal.delta_probe_sigma));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sideband-asymmetry thermometry: simulate, fit and estimate phonon occupancy"};
    app.require_subcommand(1, 1);
    Common common;
    app.add_option("--threads", common.threads, "Maximum worker threads")->check(CLI::PositiveNumber);

    auto config_opt = [&](CLI::App* sub) {
        sub->add_option("--config", common.config,
                        "Run configuration (key = value or JSON); defaults to $" + std::string(config_env));
    };

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Write red and blue sideband spectra");
    config_opt(s);
    s->add_option("--pcl", sim.pcl, "Cooling power in W");
    s->add_option("--nbar-override", sim.nbar_override, "Plant this occupancy instead of the damping balance");
    s->add_option("--seed", sim.seed, "Noise seed");
    s->add_option("--m-avg", sim.m_avg, "Number of averaged periodograms")->check(CLI::PositiveNumber);
    s->add_option("--out", sim.out, "Output directory");
    s->add_flag("--noiseless", sim.noiseless, "Write the model without noise");
    s->add_option("--units", sim.units, "displacement or photocurrent");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Fit the joint Lorentzian model to a sideband pair");
    config_opt(f);
    f->add_option("--red", fit.red, "Red sideband CSV")->required();
    f->add_option("--blue", fit.blue, "Blue sideband CSV")->required();
    f->add_option("--range", fit.range, "Fit window MIN:MAX in Hz");
    f->add_option("--out", fit.out, "Fit JSON path");
    f->add_option("--weighting", fit.weighting, "model_refreshed or unweighted");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Fit a pair and report all four occupancy estimates");
    config_opt(e);
    e->add_option("--red", est.red, "Red sideband CSV")->required();
    e->add_option("--blue", est.blue, "Blue sideband CSV")->required();
    e->add_option("--pcl", est.pcl, "Cooling power in W used for the pair");
    e->add_option("--t-bath", est.t_bath, "Bath temperature in K (default: thermometer model)");
    e->add_option("--t-bath-sigma", est.t_bath_sigma, "Bath temperature uncertainty in K");
    e->add_option("--range", est.range, "Fit window MIN:MAX in Hz");
    e->add_option("--out", est.out, "Output directory");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "Run the configured cooling-power sweep");
    config_opt(w);
    w->add_option("--seed", sw.seed, "Master seed");
    w->add_option("--m-avg", sw.m_avg, "Number of averaged periodograms")->check(CLI::PositiveNumber);
    w->add_flag("--noiseless", sw.noiseless, "Fit the noiseless model");
    w->add_option("--out", sw.out, "Output directory");

    CalibrateArgs cal;
    auto* k = app.add_subcommand("calibrate", "Recover alpha, g0 and the probe detuning from a sweep");
    config_opt(k);
    k->add_option("--sweep", cal.sweep, "sweep.json written by the sweep verb")->required();
    k->add_option("--reference", cal.reference, "Occupancy reference for alpha: asymmetry or blue_area");
    k->add_option("--weighted", cal.weighted, "Inverse-variance weights in the alpha fit (true/false)");
    k->add_option("--out", cal.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        std::cerr << app.help() << '\n';
        std::cerr << json{{"error", "usage"}, {"message", ex.what()}}.dump() << '\n';
        return 2;
    }

    try {
        if (*s) return run_simulate(common, sim, *s);
        if (*f) return run_fit(common, fit);
        if (*e) return run_estimate(common, est, *e);
        if (*w) return run_sweep_verb(common, sw, *w);
        if (*k) return run_calibrate(common, cal, *k);
    } catch (const UsageError& ex) {
        std::cerr << ex.what() << '\n';
        std::cerr << json{{"error", "usage"}, {"message", "--config is required"}}.dump() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        return report(ex);
    }
    return 2;
}
