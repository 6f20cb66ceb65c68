#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sbt/dynamics.hpp"
#include "sbt/estimators.hpp"
#include "sbt/levmar.hpp"

namespace sbt {

// ---------------------------------------------------------------------------
// Bath weighting between the two thermometers

struct AlphaPoint {
    FitResult fit;
    std::vector<BeamConfig> beams;
    double T_pot = 0.0;
    double T_stage = 0.0;
};

enum class AlphaReference { asymmetry, blue_area };

struct AlphaFit {
    double alpha = 0.0;
    double objective = 0.0;  // sum of squared differences at alpha
    int points_used = 0;
};

namespace detail {

inline double cooling_power(std::span<const BeamConfig> beams) {
    for (const auto& b : beams)
        if (b.role == BeamRole::cooling) return b.power;
    return 0.0;
}

}  // namespace detail

// Chooses alpha in [0, 1] minimising sum_i (n_balance(alpha; i) - n_ref(i))^2
// where n_balance uses T_bath = alpha T_stage + (1 - alpha) T_pot. Golden
// section search after a coarse scan, to `tol` in alpha.
// With `weighted`, each term is divided by sigma_ref^2 + sigma_balance^2;
// points without a positive sigma then make the whole fit fall back to
// equal weights.
inline AlphaFit fit_alpha(std::span<const AlphaPoint> sweep, const SystemParams& p,
                          AlphaReference reference = AlphaReference::asymmetry, bool weighted = false,
                          double tol = 1e-4) {
    std::set<double> powers;
    for (const auto& pt : sweep) powers.insert(detail::cooling_power(pt.beams));
    if (sweep.size() < 2 || powers.size() < 2)
        throw ValidationError("sweep", "alpha fit needs at least two points with distinct cooling powers");

    struct Row {
        double n_ref;
        double n_at_0;  // n_balance at alpha = 0
        double slope;   // d n_balance / d alpha (exactly linear)
        double var;
    };
    std::vector<Row> rows;
    double scale = 0.0;
    for (const auto& pt : sweep) {
        const PhononEstimate ref = reference == AlphaReference::asymmetry ? estimate_asymmetry(pt.fit, p, pt.beams)
                                                                          : estimate_area(pt.fit, p, Side::blue);
        if (!std::isfinite(ref.n_bar)) continue;
        const double n0 = estimate_damping(pt.fit, p, pt.beams, bath_temperature(0.0, pt.T_pot, pt.T_stage)).n_bar;
        const double n1 = estimate_damping(pt.fit, p, pt.beams, bath_temperature(1.0, pt.T_pot, pt.T_stage)).n_bar;
        const double s_bal =
            estimate_damping(pt.fit, p, pt.beams, bath_temperature(0.5, pt.T_pot, pt.T_stage)).sigma;
        rows.push_back({ref.n_bar, n0, n1 - n0, ref.sigma * ref.sigma + s_bal * s_bal});
        scale = std::max({scale, std::abs(n0), std::abs(n1)});
    }
    if (rows.size() < 2) throw ValidationError("sweep", "fewer than two points carry a finite reference estimate");
    double max_slope = 0.0;
    for (const auto& r : rows) max_slope = std::max(max_slope, std::abs(r.slope));
    if (!(max_slope > 1e-12 * scale))
        throw FlatObjectiveError("alpha objective is flat: the two thermometers agree at every point");

    bool use_weights = weighted;
    for (const auto& r : rows)
        if (!(r.var > 0.0) || !std::isfinite(r.var)) use_weights = false;

    auto objective = [&](double a) {
        double s = 0.0;
        for (const auto& r : rows) {
            const double d = r.n_at_0 + a * r.slope - r.n_ref;
            s += use_weights ? d * d / r.var : d * d;
        }
        return s;
    };

    constexpr int coarse = 100;
    int best = 0;
    double best_val = objective(0.0);
    for (int i = 1; i <= coarse; ++i) {
        const double v = objective(static_cast<double>(i) / coarse);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double lo = std::max(0, best - 1) / static_cast<double>(coarse);
    double hi = std::min(coarse, best + 1) / static_cast<double>(coarse);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > 0.5 * tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        }
    }
    AlphaFit out;
    out.alpha = 0.5 * (lo + hi);
    // Boundary minima.
    for (double edge : {0.0, 1.0})
        if (objective(edge) < objective(out.alpha)) out.alpha = edge;
    out.objective = objective(out.alpha);
    out.points_used = static_cast<int>(rows.size());
    return out;
}

// ---------------------------------------------------------------------------
// Coupling rate and probe detuning from the spring/damping sweep

struct SpringPoint {
    double p_cl = 0.0;         // W
    double omega_tilde = 0.0;  // rad/s
    double gamma_tilde = 0.0;  // rad/s
    double omega_sigma = 0.0;  // rad/s; <= 0 means unknown
    double gamma_sigma = 0.0;
};

struct CouplingCalibration {
    double g0 = 0.0;  // rad/s
    double g0_sigma = 0.0;
    double delta_probe = 0.0;  // rad/s
    double delta_probe_sigma = 0.0;
    double reduced_chi2 = 0.0;
    bool weighted = false;  // true when every point carried its own sigmas
};

namespace detail {

struct SpringModel {
    const SystemParams& params;
    double probe_power;
    double cl_detuning;

    std::pair<double, double> predict(double g0, double delta_probe, double p_cl) const {
        SystemParams p = params;
        p.g0 = g0;
        const BeamConfig beams[] = {BeamConfig::probe(probe_power, delta_probe), BeamConfig::cooling(p_cl, cl_detuning)};
        const EffectiveMode m = effective_mode(p, beams);
        return {m.omega_tilde, m.gamma_tilde};
    }
};

// Nominal scatter used when a sweep point carries no uncertainty.
inline constexpr double nominal_rate_sigma = two_pi * 1.0;
inline constexpr double g0_unit = two_pi * 1.0;       // x[0] in Hz
inline constexpr double detuning_unit = two_pi * 1e3;  // x[1] in kHz

class SpringProblem {
public:
    SpringProblem(const SpringModel& model, std::span<const SpringPoint> pts) : model_(model), pts_(pts) {}

    void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
        residuals(x, r);
        if (!J) return;
        J->resize(r.size(), 2);
        Eigen::VectorXd rp, rm;
        for (int j = 0; j < 2; ++j) {
            const double h = 1e-6 * std::max(std::abs(x[j]), 1.0);
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            residuals(xp, rp);
            residuals(xm, rm);
            J->col(j) = (rp - rm) / (2.0 * h);
        }
    }

private:
    void residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        r.resize(static_cast<Eigen::Index>(2 * pts_.size()));
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            const auto& pt = pts_[i];
            const auto [w, g] = model_.predict(x[0] * g0_unit, x[1] * detuning_unit, pt.p_cl);
            const double sw = pt.omega_sigma > 0.0 ? pt.omega_sigma : nominal_rate_sigma;
            const double sg = pt.gamma_sigma > 0.0 ? pt.gamma_sigma : nominal_rate_sigma;
            r[static_cast<Eigen::Index>(2 * i)] = (w - pt.omega_tilde) / sw;
            r[static_cast<Eigen::Index>(2 * i + 1)] = (g - pt.gamma_tilde) / sg;
        }
    }

    const SpringModel& model_;
    std::span<const SpringPoint> pts_;
};

}  // namespace detail

// Least-squares fit of (g0, Delta_probe) to the fitted omega_tilde(P_CL) and
// gamma_tilde(P_CL) with all other parameters held at their calibrated values.
// Uncertainties come from (J^T W J)^-1 when every point carries sigmas and are
// rescaled by the reduced chi^2 otherwise.
inline CouplingCalibration calibrate_g0_and_detuning(std::span<const SpringPoint> sweep, const SystemParams& p,
                                                     double probe_power, double cl_detuning) {
    const SpringPoint* zero = nullptr;
    std::set<double> nonzero;
    for (const auto& pt : sweep) {
        if (pt.p_cl == 0.0) zero = &pt;
        else if (pt.p_cl > 0.0) nonzero.insert(pt.p_cl);
        else throw ValidationError("p_cl", "cooling powers must be >= 0");
    }
    if (!zero || nonzero.size() < 3)
        throw ValidationError("sweep", "calibration needs a P_CL = 0 point and at least three nonzero powers");

    const detail::SpringModel model{p, probe_power, cl_detuning};

    // g0^2 from the cooling-beam damping, which is linear in g0^2 and P_CL.
    double num = 0.0, den = 0.0;
    for (const auto& pt : sweep) {
        if (pt.p_cl == 0.0) continue;
        SystemParams unit = p;
        unit.g0 = 1.0;
        const double k = beam_dynamics(unit, BeamConfig::cooling(pt.p_cl, cl_detuning)).gamma_opt;
        num += k * (pt.gamma_tilde - zero->gamma_tilde);
        den += k * k;
    }
    const double g0_start = num > 0.0 && den > 0.0 ? std::sqrt(num / den) : p.g0;

    // Probe detuning from a scan over +-kappa/2 at P_CL = 0.
    double d_start = 0.0, best = HUGE_VAL;
    for (int i = -400; i <= 400; ++i) {
        const double d = 0.5 * p.kappa * i / 400.0;
        const auto [w, g] = model.predict(g0_start, d, 0.0);
        const double sw = zero->omega_sigma > 0.0 ? zero->omega_sigma : detail::nominal_rate_sigma;
        const double sg = zero->gamma_sigma > 0.0 ? zero->gamma_sigma : detail::nominal_rate_sigma;
        const double c = std::pow((w - zero->omega_tilde) / sw, 2) + std::pow((g - zero->gamma_tilde) / sg, 2);
        if (c < best) {
            best = c;
            d_start = d;
        }
    }

    detail::SpringProblem problem(model, sweep);
    Eigen::VectorXd x(2);
    x << g0_start / detail::g0_unit, d_start / detail::detuning_unit;
    LmOptions lm;
    lm.rel_tol = 1e-10;
    const LmResult res = levenberg_marquardt(problem, x, lm);
    if (!res.converged) throw ConvergenceError("coupling calibration did not converge");

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    problem.evaluate(res.x, r, &J);
    const auto dof = static_cast<double>(r.size() - 2);
    CouplingCalibration out;
    out.reduced_chi2 = r.squaredNorm() / dof;
    out.weighted = std::all_of(sweep.begin(), sweep.end(),
                               [](const SpringPoint& s) { return s.omega_sigma > 0.0 && s.gamma_sigma > 0.0; });
    Eigen::Matrix2d cov = (J.transpose() * J).inverse();
    if (!out.weighted) cov *= out.reduced_chi2;
    out.g0 = res.x[0] * detail::g0_unit;
    out.delta_probe = res.x[1] * detail::detuning_unit;
    out.g0_sigma = std::sqrt(std::max(cov(0, 0), 0.0)) * detail::g0_unit;
    out.delta_probe_sigma = std::sqrt(std::max(cov(1, 1), 0.0)) * detail::detuning_unit;
    if (out.g0 < 0.0) out.g0 = -out.g0;  // only g0^2 is observable
    return out;
}

}  // namespace sbt
