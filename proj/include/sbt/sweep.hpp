#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sbt/calibration.hpp"
#include "sbt/config.hpp"
#include "sbt/detection.hpp"
#include "sbt/dynamics.hpp"
#include "sbt/estimators.hpp"
#include "sbt/parallel.hpp"
#include "sbt/serialize.hpp"
#include "sbt/sideband_fit.hpp"
#include "sbt/sideband_model.hpp"
#include "sbt/synth.hpp"

namespace sbt {

// Contaminant lines are sized from the imprecision floor with the cooling
// beam off, so that they do not change with P_CL or Delta_CL.
inline std::vector<ContaminantPeak> configured_contaminants(const RunConfig& cfg) {
    if (!cfg.contaminants) return {};
    const auto beams = cfg.beams_at(0.0);
    const double floor = detection_layer(cfg.params, beams).blue.floor_x();
    std::vector<ContaminantPeak> out;
    for (double c : cfg.contaminant_centers_hz)
        out.push_back({c, cfg.contaminant_width_hz, cfg.contaminant_area_factor * floor * cfg.contaminant_width_hz});
    return out;
}

struct SimulatedPair {
    SidebandSpectrum red;
    SidebandSpectrum blue;
    std::vector<BeamConfig> beams;
    EffectiveMode mode;
    DetectionLayer detection;
    ThermoReading thermo;
    double T_bath = 0.0;
    double n_bar = 0.0;  // generating occupancy
};

// Forward model for both sidebands at one cooling power. Without an override
// the occupancy follows from the damping balance at the thermometer-derived
// bath temperature. Noise is added when `noise` is given.
inline SimulatedPair simulate_pair(const RunConfig& cfg, double p_cl, std::optional<double> nbar_override = {},
                                   std::optional<NoiseSettings> noise = {}, unsigned threads = 1) {
    SimulatedPair s;
    s.beams = cfg.beams_at(p_cl);
    s.mode = effective_mode(cfg.params, s.beams);
    s.thermo = cfg.thermo(p_cl);
    s.T_bath = bath_temperature(cfg.params.alpha, s.thermo.T_pot, s.thermo.T_stage);
    s.n_bar = nbar_override ? *nbar_override : phonon_balance(cfg.params, s.mode, s.T_bath);
    s.detection = detection_layer(cfg.params, s.beams);
    const auto freqs = cfg.grid.values();
    const auto peaks = configured_contaminants(cfg);
    s.red = model_sxx(cfg.params, s.mode, s.n_bar, Side::red, freqs, s.detection, peaks);
    s.blue = model_sxx(cfg.params, s.mode, s.n_bar, Side::blue, freqs, s.detection, peaks);
    for (auto* sp : {&s.red, &s.blue}) {
        sp->metadata["p_cl_w"] = format_double(p_cl);
        sp->metadata["n_bar_truth"] = format_double(s.n_bar);
    }
    if (noise) {
        s.red = synthesize(s.red, *noise, threads);
        s.blue = synthesize(s.blue, *noise, threads);
    }
    return s;
}

struct SweepSettings {
    std::uint64_t seed = 1;
    int n_avg = 100;
    bool noiseless = false;
    unsigned threads = 1;
};

// Model-truth counterparts of the fitted quantities.
struct TruthValues {
    double omega_tilde = 0.0;
    double gamma_tilde = 0.0;
    double n_bar = 0.0;
    double zeta = 0.0;
    double inv_a_red = 0.0;
    double inv_a_blue = 0.0;
};

struct SweepRecord {
    double p_cl = 0.0;
    double T_pot = 0.0;
    double T_stage = 0.0;
    double T_bath = 0.0;
    std::vector<BeamConfig> beams;
    std::optional<FitResult> fit;
    SidebandAreas areas;
    double inv_a_red = 0.0, inv_a_red_sigma = 0.0;
    double inv_a_blue = 0.0, inv_a_blue_sigma = 0.0;
    Asymmetry zeta;
    std::array<PhononEstimate, 4> estimates{};
    TruthValues truth;
    std::string error;  // non-empty when the point failed

    bool ok() const { return error.empty(); }
};

// Seed for one sweep point, keyed by its cooling power so that adding or
// removing other points leaves this point's data unchanged.
inline std::uint64_t point_seed(std::uint64_t master, double p_cl) {
    return derive_key(master, 0x5357454550ULL, std::bit_cast<std::uint64_t>(p_cl));
}

inline SweepRecord run_point(const RunConfig& cfg, double p_cl, const SweepSettings& st) {
    SweepRecord rec;
    rec.p_cl = p_cl;
    try {
        std::optional<NoiseSettings> noise;
        if (!st.noiseless) noise = NoiseSettings{point_seed(st.seed, p_cl), st.n_avg};
        const SimulatedPair sim = simulate_pair(cfg, p_cl, std::nullopt, noise);
        rec.beams = sim.beams;
        rec.T_pot = sim.thermo.T_pot;
        rec.T_stage = sim.thermo.T_stage;
        rec.T_bath = sim.T_bath;
        rec.truth = {sim.mode.omega_tilde,
                     sim.mode.gamma_tilde,
                     sim.n_bar,
                     1.0 / sim.n_bar,
                     1.0 / sideband_area(cfg.params, sim.n_bar, Side::red),
                     1.0 / sideband_area(cfg.params, sim.n_bar, Side::blue)};
        const FitResult fit = fit_sidebands(sim.red, sim.blue, cfg.fit_options());
        rec.fit = fit;
        rec.areas = areas(fit);
        rec.inv_a_red = 1.0 / rec.areas.red;
        rec.inv_a_red_sigma = rec.areas.red_sigma / (rec.areas.red * rec.areas.red);
        rec.inv_a_blue = 1.0 / rec.areas.blue;
        rec.inv_a_blue_sigma = rec.areas.blue_sigma / (rec.areas.blue * rec.areas.blue);
        rec.zeta = sideband_asymmetry(fit, cfg.params, rec.beams);
        rec.estimates = estimate_all(fit, cfg.params, rec.beams, rec.T_bath, cfg.t_bath_sigma_k);
    } catch (const Error& e) {
        rec.error = e.what();
    }
    return rec;
}

// Model -> noise -> fit -> four estimates at every configured cooling power.
// Output order follows cfg.pcl_list_w whatever the thread count.
inline std::vector<SweepRecord> run_sweep(const RunConfig& cfg, const SweepSettings& st) {
    cfg.validate();
    std::vector<SweepRecord> out(cfg.pcl_list_w.size());
    parallel_for(out.size(), st.threads, [&](std::size_t i) { out[i] = run_point(cfg, cfg.pcl_list_w[i], st); });
    return out;
}

inline std::vector<AlphaPoint> alpha_points(const std::vector<SweepRecord>& recs) {
    std::vector<AlphaPoint> pts;
    for (const auto& r : recs)
        if (r.ok() && r.fit) pts.push_back({*r.fit, r.beams, r.T_pot, r.T_stage});
    return pts;
}

inline std::vector<SpringPoint> spring_points(const std::vector<SweepRecord>& recs) {
    std::vector<SpringPoint> pts;
    for (const auto& r : recs)
        if (r.ok() && r.fit)
            pts.push_back({r.p_cl, r.fit->omega_tilde, r.fit->gamma_tilde, r.fit->sigma(p_omega), r.fit->sigma(p_gamma)});
    return pts;
}

// ---------------------------------------------------------------------------
// Output files

inline json to_json(const SweepRecord& r) {
    json j;
    j["p_cl_w"] = r.p_cl;
    j["t_pot_k"] = r.T_pot;
    j["t_stage_k"] = r.T_stage;
    j["t_bath_k"] = r.T_bath;
    j["beams"] = json::array();
    for (const auto& b : r.beams) j["beams"].push_back(to_json(b));
    j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
    j["truth"] = {{"omega_tilde_rad_s", r.truth.omega_tilde}, {"gamma_tilde_rad_s", r.truth.gamma_tilde},
                  {"n_bar", r.truth.n_bar},                   {"zeta", r.truth.zeta},
                  {"inv_a_red", r.truth.inv_a_red},           {"inv_a_blue", r.truth.inv_a_blue}};
    if (r.fit) {
        j["fit"] = to_json(*r.fit);
        j["inv_a_red"] = finite_or_null(r.inv_a_red);
        j["inv_a_red_sigma"] = finite_or_null(r.inv_a_red_sigma);
        j["inv_a_blue"] = finite_or_null(r.inv_a_blue);
        j["inv_a_blue_sigma"] = finite_or_null(r.inv_a_blue_sigma);
        j["zeta"] = finite_or_null(r.zeta.zeta);
        j["zeta_sigma"] = finite_or_null(r.zeta.sigma);
    }
    if (r.ok()) {
        j["estimates"] = json::array();
        for (const auto& e : r.estimates) j["estimates"].push_back(to_json(e));
    }
    return j;
}

inline SweepRecord sweep_record_from_json(const json& j) {
    try {
        SweepRecord r;
        r.p_cl = j.at("p_cl_w").get<double>();
        r.T_pot = j.at("t_pot_k").get<double>();
        r.T_stage = j.at("t_stage_k").get<double>();
        r.T_bath = j.at("t_bath_k").get<double>();
        for (const auto& b : j.at("beams")) r.beams.push_back(beam_from_json(b));
        if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
        if (j.contains("fit")) r.fit = fit_from_json(j.at("fit"));
        if (j.contains("estimates"))
            for (std::size_t i = 0; i < 4; ++i) r.estimates[i] = estimate_from_json(j.at("estimates").at(i));
        const auto& t = j.at("truth");
        r.truth = {t.at("omega_tilde_rad_s").get<double>(), t.at("gamma_tilde_rad_s").get<double>(),
                   t.at("n_bar").get<double>(),              t.at("zeta").get<double>(),
                   t.at("inv_a_red").get<double>(),          t.at("inv_a_blue").get<double>()};
        if (r.fit) {
            r.areas = areas(*r.fit);
            r.inv_a_red = 1.0 / r.areas.red;
            r.inv_a_blue = 1.0 / r.areas.blue;
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("sweep JSON: ") + e.what());
    }
}

inline std::vector<SweepRecord> read_sweep_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open sweep file '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw ParseError(std::string("sweep JSON: ") + e.what());
    }
    std::vector<SweepRecord> out;
    for (const auto& p : j.at("points")) out.push_back(sweep_record_from_json(p));
    return out;
}

namespace detail {

inline std::string cell(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << text;
}

}  // namespace detail

// Writes sweep.csv, sweep.json and one whitespace-separated .dat file per
// plotted quantity into `dir`.
inline void write_sweep_outputs(const std::vector<SweepRecord>& recs, const std::filesystem::path& dir,
                                const SweepSettings& st) {
    using detail::cell;
    std::filesystem::create_directories(dir);

    std::string csv =
        "p_cl_w,t_pot_k,t_stage_k,t_bath_k,omega_tilde_hz,omega_tilde_hz_sigma,gamma_tilde_hz,"
        "gamma_tilde_hz_sigma,b_red,b_blue,s_red,s_blue,inv_a_red,inv_a_red_sigma,inv_a_blue,inv_a_blue_sigma,"
        "zeta,zeta_sigma,nbar_asymmetry,nbar_asymmetry_sigma,nbar_red_area,nbar_red_area_sigma,nbar_blue_area,"
        "nbar_blue_area_sigma,nbar_damping,nbar_damping_sigma,truth_gamma_tilde_hz,truth_inv_a_red,"
        "truth_inv_a_blue,truth_zeta,truth_nbar,error\n";
    std::string temps = "# p_cl_w t_pot_k t_stage_k t_bath_k\n";
    std::string width = "# p_cl_w gamma_tilde_hz gamma_tilde_hz_sigma truth_gamma_tilde_hz\n";
    std::string inv_area =
        "# p_cl_w inv_a_red inv_a_red_sigma inv_a_blue inv_a_blue_sigma truth_inv_a_red truth_inv_a_blue\n";
    std::string asym = "# p_cl_w zeta zeta_sigma truth_zeta\n";
    std::string inv_n =
        "# p_cl_w inv_n_asymmetry sigma inv_n_red_area sigma inv_n_blue_area sigma inv_n_damping sigma truth_inv_n\n";

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : recs) {
        const bool has_fit = r.fit.has_value();
        const FitResult f = has_fit ? *r.fit : FitResult{};
        auto fv = [&](double v) { return has_fit ? v : nan; };
        auto ev = [&](std::size_t i, bool sigma) {
            if (!r.ok()) return nan;
            return sigma ? r.estimates[i].sigma : r.estimates[i].n_bar;
        };
        csv += cell(r.p_cl) + ',' + cell(r.T_pot) + ',' + cell(r.T_stage) + ',' + cell(r.T_bath) + ',';
        csv += cell(fv(angular_to_hz(f.omega_tilde))) + ',' + cell(fv(angular_to_hz(f.sigma(p_omega)))) + ',';
        csv += cell(fv(angular_to_hz(f.gamma_tilde))) + ',' + cell(fv(angular_to_hz(f.sigma(p_gamma)))) + ',';
        csv += cell(fv(f.b_red)) + ',' + cell(fv(f.b_blue)) + ',' + cell(fv(f.s_red)) + ',' + cell(fv(f.s_blue)) + ',';
        csv += cell(fv(r.inv_a_red)) + ',' + cell(fv(r.inv_a_red_sigma)) + ',' + cell(fv(r.inv_a_blue)) + ',' +
               cell(fv(r.inv_a_blue_sigma)) + ',';
        csv += cell(fv(r.zeta.zeta)) + ',' + cell(fv(r.zeta.sigma)) + ',';
        for (std::size_t i = 0; i < 4; ++i) csv += cell(ev(i, false)) + ',' + cell(ev(i, true)) + ',';
        csv += cell(angular_to_hz(r.truth.gamma_tilde)) + ',' + cell(r.truth.inv_a_red) + ',' +
               cell(r.truth.inv_a_blue) + ',' + cell(r.truth.zeta) + ',' + cell(r.truth.n_bar) + ',';
        std::string err = r.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ';';
        csv += err + '\n';

        temps += cell(r.p_cl) + ' ' + cell(r.T_pot) + ' ' + cell(r.T_stage) + ' ' + cell(r.T_bath) + '\n';
        width += cell(r.p_cl) + ' ' + cell(fv(angular_to_hz(f.gamma_tilde))) + ' ' +
                 cell(fv(angular_to_hz(f.sigma(p_gamma)))) + ' ' + cell(angular_to_hz(r.truth.gamma_tilde)) + '\n';
        inv_area += cell(r.p_cl) + ' ' + cell(fv(r.inv_a_red)) + ' ' + cell(fv(r.inv_a_red_sigma)) + ' ' +
                    cell(fv(r.inv_a_blue)) + ' ' + cell(fv(r.inv_a_blue_sigma)) + ' ' + cell(r.truth.inv_a_red) + ' ' +
                    cell(r.truth.inv_a_blue) + '\n';
        asym += cell(r.p_cl) + ' ' + cell(fv(r.zeta.zeta)) + ' ' + cell(fv(r.zeta.sigma)) + ' ' + cell(r.truth.zeta) +
                '\n';
        inv_n += cell(r.p_cl);
        for (std::size_t i = 0; i < 4; ++i) {
            const double n = ev(i, false), s = ev(i, true);
            inv_n += ' ' + cell(1.0 / n) + ' ' + cell(s / (n * n));
        }
        inv_n += ' ' + cell(1.0 / r.truth.n_bar) + '\n';
    }

    json j;
    j["seed"] = st.seed;
    j["n_avg"] = st.n_avg;
    j["noiseless"] = st.noiseless;
    j["rng"] = rng_algorithm;
    j["points"] = json::array();
    for (const auto& r : recs) j["points"].push_back(to_json(r));

    detail::write_text(dir / "sweep.csv", csv);
    detail::write_text(dir / "sweep.json", j.dump(2) + '\n');
    detail::write_text(dir / "temperatures.dat", temps);
    detail::write_text(dir / "linewidth.dat", width);
    detail::write_text(dir / "inverse_areas.dat", inv_area);
    detail::write_text(dir / "asymmetry.dat", asym);
    detail::write_text(dir / "inverse_nbar.dat", inv_n);
}

}  // namespace sbt
