#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "sbt/detection.hpp"
#include "sbt/dynamics.hpp"
#include "sbt/params.hpp"
#include "sbt/spectrum.hpp"

namespace sbt {

// A spurious mechanical line of the cavity structure. Drawn with a Gaussian
// profile of the given full width at half maximum; area in m^2.
struct ContaminantPeak {
    double center_hz = 0.0;
    double width_hz = 0.0;
    double area = 0.0;

    void validate() const {
        if (!(width_hz > 0.0)) throw ValidationError("contaminant_width_hz", "must be > 0");
        if (!(area >= 0.0)) throw ValidationError("contaminant_area", "must be >= 0");
    }

    double density(double f_hz) const {
        const double sigma = width_hz / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
        const double u = (f_hz - center_hz) / sigma;
        return area / (sigma * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * u * u);
    }
};

// Lines at 699 and 701 kHz, 50 Hz wide, each with ten times the floor
// integrated over one width. Invented magnitudes.
inline std::vector<ContaminantPeak> default_contaminants(double floor_psd, double area_factor = 10.0,
                                                         double width_hz = 50.0) {
    const double area = area_factor * floor_psd * width_hz;
    return {{699e3, width_hz, area}, {701e3, width_hz, area}};
}

// Unit-height sideband Lorentzian at ordinary frequency f_hz.
inline double sideband_lorentzian(double f_hz, double omega_tilde, double gamma_tilde) {
    const double h = 0.5 * gamma_tilde;
    const double d = two_pi * f_hz - omega_tilde;
    return h * h / (d * d + h * h);
}

// Lorentzian area (integral over ordinary frequency) of one sideband:
// 2 x_zp^2 (n + 1) for red, 2 x_zp^2 n for blue.
inline double sideband_area(const SystemParams& p, double n_bar, Side side) {
    const double x = zero_point_amplitude(p);
    return 2.0 * x * x * (side == Side::red ? n_bar + 1.0 : n_bar);
}

// Peak height of a Lorentzian of given area and angular linewidth.
inline double peak_from_area(double area, double gamma_tilde) { return 4.0 * area / gamma_tilde; }

// Bin-by-bin parts of the displacement-referred spectrum.
struct SpectrumComponents {
    std::vector<double> shot;
    std::vector<double> dark;
    std::vector<double> thermal;      // weight n
    std::vector<double> zero_point;   // weight 1/2
    std::vector<double> backaction;   // weight +1/2 red, -1/2 blue
    std::vector<double> contaminant;

    std::vector<double> total() const {
        std::vector<double> t(shot.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = shot[i] + dark[i] + thermal[i] + zero_point[i] + backaction[i] + contaminant[i];
        return t;
    }
};

inline SpectrumComponents decompose(const SystemParams& p, const EffectiveMode& mode, double n_bar, Side side,
                                    std::span<const double> freqs_hz, const DetectionLayer& det,
                                    std::span<const ContaminantPeak> contaminants = {}) {
    if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) throw ValidationError("n_bar", "must be finite and >= 0");
    if (!(mode.gamma_tilde > 0.0)) throw ValidationError("gamma_tilde", "must be > 0");
    const double x = zero_point_amplitude(p);
    const double unit_peak = peak_from_area(2.0 * x * x, mode.gamma_tilde);
    const double w_ba = side == Side::red ? 0.5 : -0.5;
    const DetectionChannel& ch = det.channel(side);
    const std::size_t n = freqs_hz.size();
    SpectrumComponents c;
    c.shot.assign(n, ch.shot_x());
    c.dark.assign(n, ch.dark_x());
    c.thermal.resize(n);
    c.zero_point.resize(n);
    c.backaction.resize(n);
    c.contaminant.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double L = unit_peak * sideband_lorentzian(freqs_hz[i], mode.omega_tilde, mode.gamma_tilde);
        c.thermal[i] = n_bar * L;
        c.zero_point[i] = 0.5 * L;
        c.backaction[i] = w_ba * L;
        for (const auto& pk : contaminants) c.contaminant[i] += pk.density(freqs_hz[i]);
    }
    return c;
}

// Displacement PSD b + s (gamma/2)^2 / ((|omega| - omega_tilde)^2 + (gamma/2)^2)
// with s = 4 A / gamma_tilde and b the detection layer's imprecision floor.
inline SidebandSpectrum model_sxx(const SystemParams& p, const EffectiveMode& mode, double n_bar, Side side,
                                  std::span<const double> freqs_hz, const DetectionLayer& det,
                                  std::span<const ContaminantPeak> contaminants = {}) {
    if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) throw ValidationError("n_bar", "must be finite and >= 0");
    const double b = det.channel(side).floor_x();
    const double s = peak_from_area(sideband_area(p, n_bar, side), mode.gamma_tilde);
    SidebandSpectrum out;
    out.side = side;
    out.units = Units::displacement;
    out.n_avg = 1;
    out.freqs_hz.assign(freqs_hz.begin(), freqs_hz.end());
    out.psd.resize(freqs_hz.size());
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        double v = b + s * sideband_lorentzian(freqs_hz[i], mode.omega_tilde, mode.gamma_tilde);
        for (const auto& pk : contaminants) v += pk.density(freqs_hz[i]);
        out.psd[i] = v;
    }
    return out;
}

}  // namespace sbt
