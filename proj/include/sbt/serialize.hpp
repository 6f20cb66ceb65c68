#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"

#include "sbt/calibration.hpp"
#include "sbt/estimators.hpp"
#include "sbt/params.hpp"
#include "sbt/sideband_fit.hpp"

// JSON forms: snake_case keys, SI units, one-sigma fields suffixed _sigma.
// Non-finite numbers are written as null.

namespace sbt {

using json = nlohmann::json;

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_inf(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline constexpr const char* fit_param_names[n_fit_params] = {"omega_tilde", "gamma_tilde", "b_red",
                                                              "b_blue",      "s_red",       "s_blue"};

inline json to_json(const FitResult& f) {
    json j;
    j["omega_tilde_rad_s"] = f.omega_tilde;
    j["omega_tilde_rad_s_sigma"] = f.sigma(p_omega);
    j["gamma_tilde_rad_s"] = f.gamma_tilde;
    j["gamma_tilde_rad_s_sigma"] = f.sigma(p_gamma);
    j["omega_tilde_hz"] = angular_to_hz(f.omega_tilde);
    j["gamma_tilde_hz"] = angular_to_hz(f.gamma_tilde);
    j["b_red"] = f.b_red;
    j["b_red_sigma"] = f.sigma(p_b_red);
    j["b_blue"] = f.b_blue;
    j["b_blue_sigma"] = f.sigma(p_b_blue);
    j["s_red"] = f.s_red;
    j["s_red_sigma"] = f.sigma(p_s_red);
    j["s_blue"] = f.s_blue;
    j["s_blue_sigma"] = f.sigma(p_s_blue);
    j["parameter_order"] = {"omega_tilde_rad_s", "gamma_tilde_rad_s", "b_red", "b_blue", "s_red", "s_blue"};
    json cov = json::array();
    for (int r = 0; r < n_fit_params; ++r) {
        json row = json::array();
        for (int c = 0; c < n_fit_params; ++c) row.push_back(f.covariance(r, c));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    j["fit_min_hz"] = f.fit_min_hz;
    j["fit_max_hz"] = f.fit_max_hz;
    j["residual_norm"] = f.residual_norm;
    j["reduced_chi2"] = f.reduced_chi2;
    j["n_points"] = f.n_points;
    j["iterations"] = f.iterations;
    j["n_avg"] = f.n_avg;
    j["units"] = std::string(to_string(f.units));
    return j;
}

inline FitResult fit_from_json(const json& j) {
    try {
        FitResult f;
        f.omega_tilde = j.at("omega_tilde_rad_s").get<double>();
        f.gamma_tilde = j.at("gamma_tilde_rad_s").get<double>();
        f.b_red = j.at("b_red").get<double>();
        f.b_blue = j.at("b_blue").get<double>();
        f.s_red = j.at("s_red").get<double>();
        f.s_blue = j.at("s_blue").get<double>();
        const auto& cov = j.at("covariance");
        for (int r = 0; r < n_fit_params; ++r)
            for (int c = 0; c < n_fit_params; ++c) f.covariance(r, c) = cov.at(r).at(c).get<double>();
        f.fit_min_hz = j.at("fit_min_hz").get<double>();
        f.fit_max_hz = j.at("fit_max_hz").get<double>();
        f.residual_norm = j.at("residual_norm").get<double>();
        f.reduced_chi2 = j.at("reduced_chi2").get<double>();
        f.n_points = j.at("n_points").get<int>();
        f.iterations = j.at("iterations").get<int>();
        f.n_avg = j.at("n_avg").get<int>();
        f.units = units_from_string(j.at("units").get<std::string>());
        return f;
    } catch (const json::exception& e) {
        throw ParseError(std::string("fit JSON: ") + e.what());
    }
}

inline json to_json(const PhononEstimate& e) {
    return {{"method", std::string(to_string(e.method))},
            {"n_bar", finite_or_null(e.n_bar)},
            {"n_bar_sigma", finite_or_null(e.sigma)},
            {"status", std::string(to_string(e.status))}};
}

inline PhononEstimate estimate_from_json(const json& j) {
    try {
        PhononEstimate e;
        e.method = method_from_string(j.at("method").get<std::string>());
        e.n_bar = number_or_inf(j.at("n_bar"));
        e.sigma = number_or_inf(j.at("n_bar_sigma"));
        e.status = status_from_string(j.at("status").get<std::string>());
        return e;
    } catch (const json::exception& ex) {
        throw ParseError(std::string("estimate JSON: ") + ex.what());
    }
}

inline json to_json(const BeamConfig& b) {
    json j{{"role", std::string(to_string(b.role))}, {"power_w", b.power}};
    j["detuning_rad_s"] = b.detuning ? json(*b.detuning) : json(nullptr);
    return j;
}

inline BeamConfig beam_from_json(const json& j) {
    try {
        BeamConfig b;
        b.role = beam_role_from_string(j.at("role").get<std::string>());
        b.power = j.at("power_w").get<double>();
        if (!j.at("detuning_rad_s").is_null()) b.detuning = j.at("detuning_rad_s").get<double>();
        b.validate();
        return b;
    } catch (const json::exception& e) {
        throw ParseError(std::string("beam JSON: ") + e.what());
    }
}

inline json to_json(const CouplingCalibration& c) {
    return {{"g0_rad_s", c.g0},
            {"g0_rad_s_sigma", c.g0_sigma},
            {"g0_hz", angular_to_hz(c.g0)},
            {"g0_hz_sigma", angular_to_hz(c.g0_sigma)},
            {"delta_probe_rad_s", c.delta_probe},
            {"delta_probe_rad_s_sigma", c.delta_probe_sigma},
            {"delta_probe_hz", angular_to_hz(c.delta_probe)},
            {"delta_probe_hz_sigma", angular_to_hz(c.delta_probe_sigma)},
            {"reduced_chi2", c.reduced_chi2},
            {"weighted", c.weighted}};
}

}  // namespace sbt
