#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>

#include "sbt/detection.hpp"
#include "sbt/dynamics.hpp"
#include "sbt/params.hpp"
#include "sbt/sideband_fit.hpp"

namespace sbt {

enum class Method { asymmetry, red_area, blue_area, damping_balance };
inline constexpr std::array<Method, 4> all_methods{Method::asymmetry, Method::red_area, Method::blue_area,
                                                   Method::damping_balance};

constexpr std::string_view to_string(Method m) {
    switch (m) {
        case Method::asymmetry: return "asymmetry";
        case Method::red_area: return "red_area";
        case Method::blue_area: return "blue_area";
        case Method::damping_balance: return "damping_balance";
    }
    return "?";
}

inline Method method_from_string(std::string_view s) {
    for (Method m : all_methods)
        if (to_string(m) == s) return m;
    throw ParseError("unknown estimation method '" + std::string(s) + "'");
}

// ok: regular value. overflow: zero asymmetry, n is +inf.
// nonphysical: reported unclamped (negative asymmetry or amplitude).
enum class EstimateStatus { ok, overflow, nonphysical };

constexpr std::string_view to_string(EstimateStatus s) {
    switch (s) {
        case EstimateStatus::ok: return "ok";
        case EstimateStatus::overflow: return "overflow";
        case EstimateStatus::nonphysical: return "nonphysical";
    }
    return "?";
}

inline EstimateStatus status_from_string(std::string_view s) {
    if (s == "ok") return EstimateStatus::ok;
    if (s == "overflow") return EstimateStatus::overflow;
    if (s == "nonphysical") return EstimateStatus::nonphysical;
    throw ParseError("unknown estimate status '" + std::string(s) + "'");
}

struct PhononEstimate {
    Method method = Method::asymmetry;
    double n_bar = 0.0;
    double sigma = 0.0;
    EstimateStatus status = EstimateStatus::ok;
};

struct SidebandAreas {
    double red = 0.0;
    double blue = 0.0;
    double red_sigma = 0.0;
    double blue_sigma = 0.0;
    double covariance = 0.0;  // cov(A_red, A_blue)
};

// A = gamma_tilde s / 4, first-order propagation through the fit covariance.
inline SidebandAreas areas(const FitResult& fit) {
    using Vec = Eigen::Matrix<double, 6, 1>;
    Vec gr = Vec::Zero(), gb = Vec::Zero();
    gr[p_gamma] = 0.25 * fit.s_red;
    gr[p_s_red] = 0.25 * fit.gamma_tilde;
    gb[p_gamma] = 0.25 * fit.s_blue;
    gb[p_s_blue] = 0.25 * fit.gamma_tilde;
    SidebandAreas a;
    a.red = 0.25 * fit.gamma_tilde * fit.s_red;
    a.blue = 0.25 * fit.gamma_tilde * fit.s_blue;
    a.red_sigma = std::sqrt(std::max(gr.dot(fit.covariance * gr), 0.0));
    a.blue_sigma = std::sqrt(std::max(gb.dot(fit.covariance * gb), 0.0));
    a.covariance = gr.dot(fit.covariance * gb);
    return a;
}

namespace detail {

// Ratio correction that undoes unequal detection of the two sidebands when
// the fit was done on photocurrent spectra.
inline double detection_ratio(const FitResult& fit, const SystemParams& p, std::span<const BeamConfig> beams) {
    if (fit.units == Units::displacement) return 1.0;
    const DetectionLayer det = detection_layer(p, beams);
    return det.blue.transduction / det.red.transduction;
}

inline double propagate(double d_sr, double d_sb, const FitResult& fit) {
    const auto& C = fit.covariance;
    const double v = d_sr * d_sr * C(p_s_red, p_s_red) + d_sb * d_sb * C(p_s_blue, p_s_blue) +
                     2.0 * d_sr * d_sb * C(p_s_red, p_s_blue);
    return std::sqrt(std::max(v, 0.0));
}

}  // namespace detail

struct Asymmetry {
    double zeta = 0.0;
    double sigma = 0.0;
};

// zeta = A_red / A_blue - 1. The linewidth cancels in the ratio.
inline Asymmetry sideband_asymmetry(const FitResult& fit, const SystemParams& p, std::span<const BeamConfig> beams) {
    const double k = detail::detection_ratio(fit, p, beams);
    Asymmetry a;
    a.zeta = k * fit.s_red / fit.s_blue - 1.0;
    a.sigma = detail::propagate(k / fit.s_blue, -k * fit.s_red / (fit.s_blue * fit.s_blue), fit);
    return a;
}

// n = 1 / zeta, evaluated as s_b / (k s_r - s_b) so that a vanishing blue
// sideband gives n = 0 rather than a division by zero.
inline PhononEstimate estimate_asymmetry(const FitResult& fit, const SystemParams& p,
                                         std::span<const BeamConfig> beams) {
    const double k = detail::detection_ratio(fit, p, beams);
    const double den = k * fit.s_red - fit.s_blue;
    PhononEstimate e;
    e.method = Method::asymmetry;
    if (den == 0.0) {
        e.n_bar = std::numeric_limits<double>::infinity();
        e.sigma = std::numeric_limits<double>::infinity();
        e.status = EstimateStatus::overflow;
        return e;
    }
    e.n_bar = fit.s_blue / den;
    e.sigma = detail::propagate(-k * fit.s_blue / (den * den), k * fit.s_red / (den * den), fit);
    if (den < 0.0 || fit.s_blue < 0.0) e.status = EstimateStatus::nonphysical;
    return e;
}

// Equipartition: n = A_blue / 2 x_zp^2 and n + 1 = A_red / 2 x_zp^2.
// Negative values are reported as they come out.
inline PhononEstimate estimate_area(const FitResult& fit, const SystemParams& p, Side side) {
    if (fit.units != Units::displacement)
        throw ValidationError("units", "area estimates need displacement-calibrated spectra");
    const SidebandAreas a = areas(fit);
    const double x = zero_point_amplitude(p);
    const double two_x2 = 2.0 * x * x;
    PhononEstimate e;
    if (side == Side::red) {
        e.method = Method::red_area;
        e.n_bar = a.red / two_x2 - 1.0;
        e.sigma = a.red_sigma / two_x2;
    } else {
        e.method = Method::blue_area;
        e.n_bar = a.blue / two_x2;
        e.sigma = a.blue_sigma / two_x2;
    }
    if (e.n_bar < 0.0) e.status = EstimateStatus::nonphysical;
    return e;
}

// Damping balance with the cooling-beam damping inferred from the fitted
// linewidth, gamma_CL = gamma_tilde_fit - gamma_m - gamma_probe. The beam
// list must contain the probe and the cooling beam (power may be zero).
inline PhononEstimate estimate_damping(const FitResult& fit, const SystemParams& p,
                                       std::span<const BeamConfig> beams, double T_bath,
                                       double T_bath_sigma = 0.0) {
    const DriveSet d = classify_beams(beams);
    if (!d.probe) throw ValidationError("beams", "damping estimate requires the probe beam");
    if (!d.cooling) throw ValidationError("beams", "damping estimate requires the cooling beam");
    const BeamDynamics probe = beam_dynamics(p, *d.probe);
    const double n_cl = backaction_occupancy(p, *d.cooling->detuning);
    const double gt = fit.gamma_tilde;
    const double gamma_cl = gt - p.gamma_m - probe.gamma_opt;
    const double tol = 3.0 * fit.sigma(p_gamma) + 1e-9 * gt;
    if (gamma_cl < -tol)
        throw CalibrationError("fitted linewidth is below gamma_m + gamma_probe; calibration is inconsistent");

    const double n_bath = bath_occupancy(T_bath, fit.omega_tilde);
    const double n = (n_bath * p.gamma_m + n_cl * gamma_cl + probe.heating_rate) / gt;

    const double dn_dgamma = (n_cl - n) / gt;
    const double dn_domega = -n_bath * p.gamma_m / (fit.omega_tilde * gt);
    const double dn_dT = PhysicalConstants::k_B * p.gamma_m / (PhysicalConstants::hbar * fit.omega_tilde * gt);
    const auto& C = fit.covariance;
    const double var = dn_dgamma * dn_dgamma * C(p_gamma, p_gamma) + dn_domega * dn_domega * C(p_omega, p_omega) +
                       2.0 * dn_dgamma * dn_domega * C(p_gamma, p_omega) +
                       dn_dT * dn_dT * T_bath_sigma * T_bath_sigma;
    PhononEstimate e;
    e.method = Method::damping_balance;
    e.n_bar = n;
    e.sigma = std::sqrt(std::max(var, 0.0));
    return e;
}

inline std::array<PhononEstimate, 4> estimate_all(const FitResult& fit, const SystemParams& p,
                                                  std::span<const BeamConfig> beams, double T_bath,
                                                  double T_bath_sigma = 0.0) {
    return {estimate_asymmetry(fit, p, beams), estimate_area(fit, p, Side::red), estimate_area(fit, p, Side::blue),
            estimate_damping(fit, p, beams, T_bath, T_bath_sigma)};
}

// Linear convention T = n hbar omega / k_B.
inline double mode_temperature(double n_bar, double omega) {
    return n_bar * PhysicalConstants::hbar * omega / PhysicalConstants::k_B;
}

inline double mode_temperature(const PhononEstimate& e, double omega) { return mode_temperature(e.n_bar, omega); }

// Temperature whose Bose-Einstein occupancy equals n_bar.
inline double mode_temperature_bose(double n_bar, double omega) {
    if (n_bar <= 0.0) return 0.0;
    return PhysicalConstants::hbar * omega / (PhysicalConstants::k_B * std::log1p(1.0 / n_bar));
}

}  // namespace sbt
