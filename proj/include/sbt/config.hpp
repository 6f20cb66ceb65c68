#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "sbt/calibration.hpp"
#include "sbt/constants.hpp"
#include "sbt/error.hpp"
#include "sbt/format.hpp"
#include "sbt/params.hpp"
#include "sbt/sideband_fit.hpp"
#include "sbt/spectrum.hpp"
#include "sbt/thermo.hpp"

namespace sbt {

// Everything a run needs: the physical parameters, the three beams and the
// simulation/fit settings.
struct RunConfig {
    SystemParams params = SystemParams::paper_defaults();
    BeamConfig probe = BeamConfig::probe(32e-6, hz_to_angular(-6.5e3));
    BeamConfig lo = BeamConfig::local_oscillator(1.57e-3);
    BeamConfig cooling = BeamConfig::cooling(415e-6, -hz_to_angular(705.2e3));
    ThermoModel thermo = ThermoModel::paper_default();

    FrequencyGrid grid = FrequencyGrid::from_range(640e3, 770e3, 2.0);
    double fit_min_hz = 702e3;
    double fit_max_hz = 714e3;
    Weighting weighting = Weighting::model_refreshed;

    bool contaminants = true;
    std::vector<double> contaminant_centers_hz{699e3, 701e3};
    double contaminant_width_hz = 50.0;
    double contaminant_area_factor = 10.0;

    // Invented default grid; includes the four powers shown in the published spectra.
    std::vector<double> pcl_list_w{0.0, 10e-6, 20e-6, 34e-6, 60e-6, 100e-6, 158e-6, 220e-6, 300e-6, 415e-6};
    std::uint64_t seed = 1;
    double t_bath_sigma_k = 0.0;
    AlphaReference alpha_reference = AlphaReference::asymmetry;
    bool alpha_weighted = false;

    std::vector<BeamConfig> beams() const { return {probe, lo, cooling}; }
    std::vector<BeamConfig> beams_at(double p_cl) const {
        BeamConfig cl = cooling;
        cl.power = p_cl;
        return {probe, lo, cl};
    }

    FitOptions fit_options() const {
        FitOptions o;
        o.fit_min_hz = fit_min_hz;
        o.fit_max_hz = fit_max_hz;
        o.weighting = weighting;
        return o;
    }

    void validate() const {
        params.validate();
        probe.validate();
        lo.validate();
        cooling.validate();
        if (probe.role != BeamRole::probe || lo.role != BeamRole::local_oscillator || cooling.role != BeamRole::cooling)
            throw ValidationError("beams", "beam roles are fixed (probe, local oscillator, cooling)");
        thermo.validate();
        if (!(grid.step_hz > 0.0) || grid.count < 2) throw ValidationError("grid_step_hz", "grid needs >= 2 bins");
        if (!(fit_max_hz > fit_min_hz)) throw ValidationError("fit_max_hz", "must exceed fit_min_hz");
        const double gmax = grid[grid.count - 1];
        if (fit_min_hz < grid.start_hz || fit_max_hz > gmax)
            throw ValidationError("fit_min_hz", "fit range must lie inside the frequency grid");
        if (!(contaminant_width_hz > 0.0)) throw ValidationError("contaminant_width_hz", "must be > 0");
        if (!(contaminant_area_factor >= 0.0)) throw ValidationError("contaminant_area_factor", "must be >= 0");
        if (pcl_list_w.empty()) throw ValidationError("pcl_list_w", "must not be empty");
        for (double v : pcl_list_w)
            if (!(v >= 0.0)) throw ValidationError("pcl_list_w", "powers must be >= 0");
        if (!(t_bath_sigma_k >= 0.0)) throw ValidationError("t_bath_sigma_k", "must be >= 0");
    }

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        return a.params == b.params && a.probe == b.probe && a.lo == b.lo && a.cooling == b.cooling &&
               a.thermo == b.thermo && a.grid.start_hz == b.grid.start_hz && a.grid.step_hz == b.grid.step_hz &&
               a.grid.count == b.grid.count && a.fit_min_hz == b.fit_min_hz && a.fit_max_hz == b.fit_max_hz &&
               a.weighting == b.weighting && a.contaminants == b.contaminants &&
               a.contaminant_centers_hz == b.contaminant_centers_hz &&
               a.contaminant_width_hz == b.contaminant_width_hz &&
               a.contaminant_area_factor == b.contaminant_area_factor && a.pcl_list_w == b.pcl_list_w &&
               a.seed == b.seed && a.t_bath_sigma_k == b.t_bath_sigma_k && a.alpha_reference == b.alpha_reference &&
               a.alpha_weighted == b.alpha_weighted;
    }
};

namespace detail {

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_value_text(std::string_view text) {
    KeyValues kv;
    std::size_t lineno = 0, pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw ParseError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return kv;
}

inline KeyValues parse_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config JSON must be an object");
    KeyValues kv;
    for (const auto& [key, v] : j.items()) {
        if (v.is_number_integer()) kv[key] = std::to_string(v.get<long long>());
        else if (v.is_number()) kv[key] = format_double(v.get<double>());
        else if (v.is_boolean()) kv[key] = v.get<bool>() ? "true" : "false";
        else if (v.is_string()) kv[key] = v.get<std::string>();
        else if (v.is_array()) {
            std::vector<double> xs;
            for (const auto& e : v) {
                if (!e.is_number()) throw ParseError("config JSON: array '" + key + "' must hold numbers");
                xs.push_back(e.get<double>());
            }
            kv[key] = join_doubles(xs);
        } else {
            throw ParseError("config JSON: unsupported value for '" + key + "'");
        }
    }
    return kv;
}

class KeyReader {
public:
    explicit KeyReader(KeyValues kv) : kv_(std::move(kv)) {}

    bool has(const std::string& k) const { return kv_.count(k) != 0; }

    void number(const std::string& k, double& out) {
        if (auto it = take(k)) out = parse_double(**it, k);
    }

    // Angular quantity given either as `<stem>_hz` or `<stem>_rad_s`.
    void angular(const std::string& stem, double& out) {
        const std::string hz = stem + "_hz", rad = stem + "_rad_s";
        if (has(hz) && has(rad)) throw ParseError("both '" + hz + "' and '" + rad + "' given");
        if (auto it = take(hz)) out = hz_to_angular(parse_double(**it, hz));
        if (auto it = take(rad)) out = parse_double(**it, rad);
    }

    void integer(const std::string& k, int& out) {
        if (auto it = take(k)) out = static_cast<int>(parse_integer(**it, k));
    }

    void unsigned64(const std::string& k, std::uint64_t& out) {
        if (auto it = take(k)) {
            const long long v = parse_integer(**it, k);
            if (v < 0) throw ValidationError(k, "must be >= 0");
            out = static_cast<std::uint64_t>(v);
        }
    }

    void boolean(const std::string& k, bool& out) {
        if (auto it = take(k)) {
            const std::string& v = **it;
            if (v == "true" || v == "on" || v == "1") out = true;
            else if (v == "false" || v == "off" || v == "0") out = false;
            else throw ParseError("cannot parse '" + v + "' as a boolean for " + k);
        }
    }

    void list(const std::string& k, std::vector<double>& out) {
        if (auto it = take(k)) out = parse_double_list(**it, k);
    }

    std::optional<std::string> text(const std::string& k) {
        if (auto it = take(k)) return **it;
        return std::nullopt;
    }

    void finish() const {
        for (const auto& [k, v] : kv_)
            if (!used_.count(k)) throw ParseError("unknown config key '" + k + "'");
    }

private:
    std::optional<const std::string*> take(const std::string& k) {
        auto it = kv_.find(k);
        if (it == kv_.end()) return std::nullopt;
        used_.insert(k);
        return &it->second;
    }

    KeyValues kv_;
    std::set<std::string> used_;
};

}  // namespace detail

// Parses the key-value or JSON form. Missing keys keep the published defaults.
inline RunConfig parse_config(std::string_view text) {
    const std::string_view head = trim(text);
    detail::KeyReader r(!head.empty() && head.front() == '{' ? detail::parse_json_text(text)
                                                             : detail::parse_key_value_text(text));
    RunConfig c;
    SystemParams& p = c.params;

    r.angular("omega_m", p.omega_m);
    r.angular("gamma_m", p.gamma_m);
    r.number("mass_eff_kg", p.mass_eff);
    r.angular("kappa", p.kappa);
    p.kappa_in = 0.4 * p.kappa;
    if (r.has("kappa_in_ratio")) {
        double ratio = 0.4;
        r.number("kappa_in_ratio", ratio);
        p.kappa_in = ratio * p.kappa;
    }
    r.angular("kappa_in", p.kappa_in);
    r.angular("g0", p.g0);
    r.number("lambda_m", p.lambda_laser);
    p.shot_coeff = 2.0 * laser_photon_energy(p.lambda_laser);
    r.number("eta", p.eta);
    r.number("gain_red", p.gain_red);
    r.number("gain_blue", p.gain_blue);
    r.number("dark_red", p.dark_red);
    r.number("dark_blue", p.dark_blue);
    r.number("shot_coeff", p.shot_coeff);
    r.number("reflect_probe", p.reflect_probe);
    r.number("reflect_cl", p.reflect_cl);
    r.number("t_pot_k", p.T_pot);
    r.number("t_stage_k", p.T_stage);
    r.number("alpha", p.alpha);
    r.integer("n_avg", p.n_avg);
    r.angular("fsr", p.omega_fsr);

    r.number("probe_power_w", c.probe.power);
    double d_probe = *c.probe.detuning;
    r.angular("probe_detuning", d_probe);
    c.probe.detuning = d_probe;
    r.number("lo_power_w", c.lo.power);
    r.number("cl_power_w", c.cooling.power);
    double d_cl = -p.omega_m;
    r.angular("cl_detuning", d_cl);
    c.cooling.detuning = d_cl;

    const std::string model = r.text("thermo_model").value_or("affine");
    if (model == "affine") {
        AffineThermo a = ThermoModel::paper_default().affine();
        r.number("thermo_pot0_k", a.pot0);
        r.number("thermo_pot_slope_k_per_w", a.pot_slope);
        r.number("thermo_stage0_k", a.stage0);
        r.number("thermo_stage_slope_k_per_w", a.stage_slope);
        c.thermo = ThermoModel(a);
    } else if (model == "table") {
        TabulatedThermo t;
        r.list("thermo_table_power_w", t.power);
        r.list("thermo_table_pot_k", t.pot);
        r.list("thermo_table_stage_k", t.stage);
        c.thermo = ThermoModel(std::move(t));
    } else {
        throw ParseError("thermo_model must be 'affine' or 'table'");
    }

    double gmin = c.grid.start_hz, gstep = c.grid.step_hz, gmax = c.grid[c.grid.count - 1];
    r.number("grid_min_hz", gmin);
    r.number("grid_max_hz", gmax);
    r.number("grid_step_hz", gstep);
    c.grid = FrequencyGrid::from_range(gmin, gmax, gstep);
    r.number("fit_min_hz", c.fit_min_hz);
    r.number("fit_max_hz", c.fit_max_hz);
    if (auto w = r.text("fit_weighting")) {
        if (*w == "model_refreshed") c.weighting = Weighting::model_refreshed;
        else if (*w == "unweighted") c.weighting = Weighting::unweighted;
        else throw ParseError("fit_weighting must be 'model_refreshed' or 'unweighted'");
    }

    r.boolean("contaminants", c.contaminants);
    r.list("contaminant_centers_hz", c.contaminant_centers_hz);
    r.number("contaminant_width_hz", c.contaminant_width_hz);
    r.number("contaminant_area_factor", c.contaminant_area_factor);

    r.list("pcl_list_w", c.pcl_list_w);
    r.unsigned64("seed", c.seed);
    r.number("t_bath_sigma_k", c.t_bath_sigma_k);
    if (auto ref = r.text("alpha_reference")) {
        if (*ref == "asymmetry") c.alpha_reference = AlphaReference::asymmetry;
        else if (*ref == "blue_area") c.alpha_reference = AlphaReference::blue_area;
        else throw ParseError("alpha_reference must be 'asymmetry' or 'blue_area'");
    }
    r.boolean("alpha_weighted", c.alpha_weighted);

    r.finish();
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

// Key-value text that parse_config reads back to an identical RunConfig.
// Angular quantities are written in rad/s to avoid a 2 pi round trip.
inline std::string save_config(const RunConfig& c) {
    std::ostringstream os;
    const SystemParams& p = c.params;
    auto line = [&](std::string_view k, const std::string& v) { os << k << " = " << v << '\n'; };
    auto num = [&](std::string_view k, double v) { line(k, format_double(v)); };
    os << "# mechanical mode\n";
    num("omega_m_rad_s", p.omega_m);
    num("gamma_m_rad_s", p.gamma_m);
    num("mass_eff_kg", p.mass_eff);
    os << "# cavity and coupling\n";
    num("kappa_rad_s", p.kappa);
    num("kappa_in_rad_s", p.kappa_in);
    num("g0_rad_s", p.g0);
    num("lambda_m", p.lambda_laser);
    num("fsr_rad_s", p.omega_fsr);
    os << "# detection\n";
    num("eta", p.eta);
    num("gain_red", p.gain_red);
    num("gain_blue", p.gain_blue);
    num("dark_red", p.dark_red);
    num("dark_blue", p.dark_blue);
    num("shot_coeff", p.shot_coeff);
    num("reflect_probe", p.reflect_probe);
    num("reflect_cl", p.reflect_cl);
    os << "# thermometry\n";
    num("t_pot_k", p.T_pot);
    num("t_stage_k", p.T_stage);
    num("alpha", p.alpha);
    num("t_bath_sigma_k", c.t_bath_sigma_k);
    if (c.thermo.is_affine()) {
        const auto& a = c.thermo.affine();
        line("thermo_model", "affine");
        num("thermo_pot0_k", a.pot0);
        num("thermo_pot_slope_k_per_w", a.pot_slope);
        num("thermo_stage0_k", a.stage0);
        num("thermo_stage_slope_k_per_w", a.stage_slope);
    } else {
        const auto& t = c.thermo.table();
        line("thermo_model", "table");
        line("thermo_table_power_w", join_doubles(t.power));
        line("thermo_table_pot_k", join_doubles(t.pot));
        line("thermo_table_stage_k", join_doubles(t.stage));
    }
    os << "# beams\n";
    num("probe_power_w", c.probe.power);
    num("probe_detuning_rad_s", *c.probe.detuning);
    num("lo_power_w", c.lo.power);
    num("cl_power_w", c.cooling.power);
    num("cl_detuning_rad_s", *c.cooling.detuning);
    os << "# spectra and fits\n";
    num("grid_min_hz", c.grid.start_hz);
    num("grid_max_hz", c.grid[c.grid.count - 1]);
    num("grid_step_hz", c.grid.step_hz);
    num("fit_min_hz", c.fit_min_hz);
    num("fit_max_hz", c.fit_max_hz);
    line("fit_weighting", c.weighting == Weighting::model_refreshed ? "model_refreshed" : "unweighted");
    line("contaminants", c.contaminants ? "true" : "false");
    line("contaminant_centers_hz", join_doubles(c.contaminant_centers_hz));
    num("contaminant_width_hz", c.contaminant_width_hz);
    num("contaminant_area_factor", c.contaminant_area_factor);
    line("n_avg", std::to_string(p.n_avg));
    os << "# sweep\n";
    line("pcl_list_w", join_doubles(c.pcl_list_w));
    line("seed", std::to_string(c.seed));
    line("alpha_reference", c.alpha_reference == AlphaReference::asymmetry ? "asymmetry" : "blue_area");
    line("alpha_weighted", c.alpha_weighted ? "true" : "false");
    return os.str();
}

inline void save_config_file(const std::string& path, const RunConfig& c) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << save_config(c);
}

}  // namespace sbt
