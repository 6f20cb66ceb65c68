#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "sbt/constants.hpp"
#include "sbt/error.hpp"

namespace sbt {

// Physical parameter set of the membrane-in-cavity system.
// All frequencies and rates are angular (rad/s).
struct SystemParams {
    double omega_m;       // mechanical resonance
    double gamma_m;       // intrinsic mechanical linewidth
    double mass_eff;      // kg
    double kappa;         // cavity linewidth
    double kappa_in;      // input coupling rate
    double g0;            // vacuum optomechanical coupling
    double lambda_laser;  // m
    double eta;           // detection efficiency

    // Detection layer. Gains multiply the photocurrent PSD.
    double gain_red;
    double gain_blue;
    double dark_red;     // detector units^2/Hz
    double dark_blue;    // detector units^2/Hz
    double shot_coeff;   // detector units^2/Hz per W of detected power
    double reflect_probe;  // fraction of probe power reaching the photodiode
    double reflect_cl;     // fraction of cooling power reaching the photodiode

    double T_pot;    // K
    double T_stage;  // K
    double alpha;    // bath weighting between the two thermometers
    int n_avg;       // periodogram averaging count

    double omega_fsr;  // metadata only

    // Published values of the 705 kHz (2,2) membrane mode experiment.
    // eta, the detector floors and the thermometer readings are not
    // published and carry invented defaults (see README).
    static SystemParams paper_defaults();

    void validate() const;

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

enum class BeamRole { probe, cooling, local_oscillator };

constexpr std::string_view to_string(BeamRole r) {
    switch (r) {
        case BeamRole::probe: return "probe";
        case BeamRole::cooling: return "cooling";
        case BeamRole::local_oscillator: return "local_oscillator";
    }
    return "?";
}

inline BeamRole beam_role_from_string(std::string_view s) {
    if (s == "probe") return BeamRole::probe;
    if (s == "cooling") return BeamRole::cooling;
    if (s == "local_oscillator") return BeamRole::local_oscillator;
    throw ParseError("unknown beam role '" + std::string(s) + "'");
}

// One optical drive. The local oscillator has no cavity detuning.
struct BeamConfig {
    double power = 0.0;              // W, incident on the cavity
    std::optional<double> detuning;  // rad/s, laser minus cavity resonance
    BeamRole role = BeamRole::probe;

    static BeamConfig probe(double power, double detuning) {
        return {power, detuning, BeamRole::probe};
    }
    static BeamConfig cooling(double power, double detuning) {
        return {power, detuning, BeamRole::cooling};
    }
    static BeamConfig local_oscillator(double power) {
        return {power, std::nullopt, BeamRole::local_oscillator};
    }

    void validate() const {
        if (!(power >= 0.0) || !std::isfinite(power))
            throw ValidationError("power", "beam power must be finite and >= 0");
        if (role == BeamRole::local_oscillator) {
            if (detuning)
                throw ValidationError("detuning", "local oscillator carries no detuning");
        } else if (!detuning || !std::isfinite(*detuning)) {
            throw ValidationError("detuning", "drive beam requires a finite detuning");
        }
    }

    friend bool operator==(const BeamConfig&, const BeamConfig&) = default;
};

struct DerivedScales {
    double x_zp;       // m
    double n_bath;     // dimensionless
    double omega_fsr;  // rad/s, metadata
};

inline double laser_photon_energy(double lambda) {
    return two_pi * PhysicalConstants::hbar * PhysicalConstants::c / lambda;
}

inline SystemParams SystemParams::paper_defaults() {
    SystemParams p{};
    p.omega_m = hz_to_angular(705.2e3);
    p.gamma_m = hz_to_angular(0.14);
    p.mass_eff = 43e-12;
    p.kappa = hz_to_angular(165e3);
    p.kappa_in = 0.4 * p.kappa;
    p.g0 = hz_to_angular(2.2);
    p.lambda_laser = 1064e-9;
    p.eta = 0.3;
    p.gain_blue = 1.0;
    p.gain_red = 1.005;
    p.dark_blue = 1.2e-22;
    p.dark_red = 1.015 * p.dark_blue;
    p.shot_coeff = 2.0 * laser_photon_energy(p.lambda_laser);
    p.reflect_probe = 1.0;
    p.reflect_cl = 1.0;
    p.T_pot = 0.798;
    p.T_stage = 1.2024;
    p.alpha = 0.498;
    p.n_avg = 100;
    p.omega_fsr = hz_to_angular(4e9);
    return p;
}

inline void SystemParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be finite and > 0");
    };
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be finite and >= 0");
    };
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(name, "must lie in [0, 1]");
    };
    positive(omega_m, "omega_m");
    positive(gamma_m, "gamma_m");
    positive(mass_eff, "mass_eff");
    positive(kappa, "kappa");
    positive(kappa_in, "kappa_in");
    if (kappa_in > kappa) throw ValidationError("kappa_in", "must not exceed kappa");
    positive(g0, "g0");
    positive(lambda_laser, "lambda_laser");
    if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta", "must lie in (0, 1]");
    positive(gain_red, "gain_red");
    positive(gain_blue, "gain_blue");
    nonneg(dark_red, "dark_red");
    nonneg(dark_blue, "dark_blue");
    positive(shot_coeff, "shot_coeff");
    unit(reflect_probe, "reflect_probe");
    unit(reflect_cl, "reflect_cl");
    nonneg(T_pot, "T_pot");
    nonneg(T_stage, "T_stage");
    unit(alpha, "alpha");
    if (n_avg < 1) throw ValidationError("n_avg", "must be >= 1");
    positive(omega_fsr, "omega_fsr");
}

inline double zero_point_amplitude(double mass_eff, double omega_m) {
    return std::sqrt(PhysicalConstants::hbar / (2.0 * mass_eff * omega_m));
}

inline double zero_point_amplitude(const SystemParams& p) {
    return zero_point_amplitude(p.mass_eff, p.omega_m);
}

// High-temperature (linear) occupancy k_B T / (hbar omega).
inline double bath_occupancy(double T_bath, double omega) {
    return PhysicalConstants::k_B * T_bath / (PhysicalConstants::hbar * omega);
}

// Bose-Einstein occupancy, for comparison with the linear form only.
inline double bose_occupancy(double T, double omega) {
    if (T <= 0.0) return 0.0;
    return 1.0 / std::expm1(PhysicalConstants::hbar * omega / (PhysicalConstants::k_B * T));
}

inline double bath_temperature(double alpha, double T_pot, double T_stage) {
    return alpha * T_stage + (1.0 - alpha) * T_pot;
}

inline DerivedScales derived_scales(const SystemParams& p, double T_bath) {
    return {zero_point_amplitude(p), bath_occupancy(T_bath, p.omega_m), p.omega_fsr};
}

}  // namespace sbt
