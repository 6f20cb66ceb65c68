#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbt/constants.hpp"
#include "sbt/error.hpp"
#include "sbt/levmar.hpp"
#include "sbt/spectrum.hpp"

namespace sbt {

// Parameter order shared by the model, the Jacobian and the covariance.
enum FitParam : int { p_omega = 0, p_gamma, p_b_red, p_b_blue, p_s_red, p_s_blue };
inline constexpr int n_fit_params = 6;

// Joint two-sideband Lorentzian
//   S^(q)(f) = b_q + s_q (G/2)^2 / ((f - F)^2 + (G/2)^2),   q in {red, blue},
// in ordinary frequency: theta = (F [Hz], G [Hz], b_red, b_blue, s_red, s_blue).
struct SidebandPairModel {
    using Theta = std::array<double, n_fit_params>;

    static double lorentz(const Theta& t, double f) {
        const double h = 0.5 * t[p_gamma];
        const double d = f - t[p_omega];
        return h * h / (d * d + h * h);
    }

    static double value(const Theta& t, double f, Side side) {
        const bool red = side == Side::red;
        return (red ? t[p_b_red] : t[p_b_blue]) + (red ? t[p_s_red] : t[p_s_blue]) * lorentz(t, f);
    }

    static Theta gradient(const Theta& t, double f, Side side) {
        const bool red = side == Side::red;
        const double s = red ? t[p_s_red] : t[p_s_blue];
        const double h = 0.5 * t[p_gamma];
        const double d = f - t[p_omega];
        const double den = d * d + h * h;
        Theta g{};
        g[p_omega] = s * 2.0 * d * h * h / (den * den);
        g[p_gamma] = s * h * d * d / (den * den);
        g[red ? p_b_red : p_b_blue] = 1.0;
        g[red ? p_s_red : p_s_blue] = h * h / den;
        return g;
    }
};

enum class Weighting { model_refreshed, unweighted };

struct FitOptions {
    double fit_min_hz = 702e3;
    double fit_max_hz = 714e3;
    Weighting weighting = Weighting::model_refreshed;
    int max_iterations = 500;  // per Levenberg-Marquardt pass
    int max_reweights = 50;
    double rel_tol = 1e-8;
    // Degenerate when the stronger sideband's s/b falls below this (30 dB).
    double min_contrast = 1e-3;
    // Degenerate when the stronger sideband's s/sigma_s falls below this.
    double min_significance = 3.0;
    double min_width_bins = 0.01;
};

struct FitResult {
    double omega_tilde = 0.0;  // rad/s
    double gamma_tilde = 0.0;  // rad/s
    double b_red = 0.0;
    double b_blue = 0.0;
    double s_red = 0.0;
    double s_blue = 0.0;
    // Order (omega_tilde, gamma_tilde, b_red, b_blue, s_red, s_blue), stored units.
    Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Zero();
    double fit_min_hz = 0.0;
    double fit_max_hz = 0.0;
    double residual_norm = 0.0;  // sqrt(weighted chi^2)
    double reduced_chi2 = 0.0;
    int n_points = 0;
    int iterations = 0;
    int n_avg = 1;
    Units units = Units::displacement;

    double value(FitParam p) const {
        switch (p) {
            case p_omega: return omega_tilde;
            case p_gamma: return gamma_tilde;
            case p_b_red: return b_red;
            case p_b_blue: return b_blue;
            case p_s_red: return s_red;
            case p_s_blue: return s_blue;
        }
        return 0.0;
    }
    double sigma(FitParam p) const { return std::sqrt(std::max(covariance(p, p), 0.0)); }
};

namespace detail {

struct FitData {
    std::vector<double> f;
    std::vector<double> y;
    std::vector<Side> side;
    std::vector<double> m;  // averaging count per bin
};

inline double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (v.size() % 2) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

struct SideWindow {
    std::vector<double> f;
    std::vector<double> y;
};

inline SideWindow select(const SidebandSpectrum& s, double lo, double hi) {
    SideWindow w;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.freqs_hz[i] >= lo && s.freqs_hz[i] <= hi) {
            w.f.push_back(s.freqs_hz[i]);
            w.y.push_back(s.psd[i]);
        }
    return w;
}

struct SideGuess {
    double floor = 0.0;
    std::vector<double> excess;  // y / floor - 1
};

// Floor is the median of the outer 20% of bins (10% at each end).
inline SideGuess side_guess(const SideWindow& w) {
    const std::size_t n = w.y.size();
    const std::size_t k = std::max<std::size_t>(1, n / 10);
    std::vector<double> outer(w.y.begin(), w.y.begin() + static_cast<std::ptrdiff_t>(k));
    outer.insert(outer.end(), w.y.end() - static_cast<std::ptrdiff_t>(k), w.y.end());
    SideGuess g;
    g.floor = median(outer);
    if (!(g.floor > 0.0)) g.floor = std::max(*std::max_element(w.y.begin(), w.y.end()), 1e-300);
    g.excess.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.excess[i] = w.y[i] / g.floor - 1.0;
    return g;
}

inline std::vector<double> boxcar(const std::vector<double>& v, std::size_t width) {
    const std::size_t n = v.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];
    std::vector<double> out(n);
    const std::size_t half = width / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i >= half ? i - half : 0;
        const std::size_t b = std::min(n, i + half + 1);
        out[i] = (prefix[b] - prefix[a]) / static_cast<double>(b - a);
    }
    return out;
}

// Robust per-bin scatter from first differences.
inline double robust_scatter(const std::vector<double>& v) {
    if (v.size() < 3) return 0.0;
    std::vector<double> d(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = std::abs(v[i + 1] - v[i]);
    return 1.4826 * median(d) / std::sqrt(2.0);
}

struct PeakGuess {
    double center = 0.0;
    double width = 0.0;
    std::size_t width_bins = 1;
    double significance = -1.0;
};

// Peak location on the smoothed excess, with the boxcar width chosen from
// 1, 3, 9, ... bins to maximise the peak's significance.
inline PeakGuess peak_guess(const SideWindow& w, const SideGuess& g, double step) {
    const double sigma = robust_scatter(g.excess);
    PeakGuess best;
    for (std::size_t width = 1; width <= std::max<std::size_t>(1, w.y.size() / 4); width *= 3) {
        const auto z = width == 1 ? g.excess : boxcar(g.excess, width);
        const auto it = std::max_element(z.begin(), z.end());
        const double noise = sigma / std::sqrt(static_cast<double>(width));
        const double sig = noise > 0.0 ? *it / noise : (width == 1 ? std::numeric_limits<double>::max() : -1.0);
        if (sig > best.significance) {
            const auto i0 = static_cast<std::size_t>(it - z.begin());
            const double half = 0.5 * *it;
            std::size_t lo = i0, hi = i0;
            while (lo > 0 && z[lo - 1] > half) --lo;
            while (hi + 1 < z.size() && z[hi + 1] > half) ++hi;
            const double measured = static_cast<double>(hi - lo + 1) * step;
            const double smear = static_cast<double>(width - 1) * step;
            best.center = w.f[i0];
            best.width = std::max(std::sqrt(std::max(measured * measured - smear * smear, 0.0)), step);
            best.width_bins = width;
            best.significance = sig;
        }
    }
    return best;
}

class PairProblem {
public:
    PairProblem(const FitData& d, std::array<double, 6> offset, std::array<double, 6> scale)
        : d_(d), offset_(offset), scale_(scale), w_(d.f.size(), 1.0) {}

    SidebandPairModel::Theta theta(const Eigen::VectorXd& x) const {
        SidebandPairModel::Theta t{};
        for (int j = 0; j < n_fit_params; ++j) t[j] = offset_[j] + scale_[j] * x[j];
        return t;
    }

    void set_weights_from_model(const Eigen::VectorXd& x) {
        const auto t = theta(x);
        for (std::size_t i = 0; i < d_.f.size(); ++i) {
            const double f = SidebandPairModel::value(t, d_.f[i], d_.side[i]);
            w_[i] = d_.m[i] / (f * f);
        }
    }

    void set_uniform_weights(double red_scale, double blue_scale) {
        for (std::size_t i = 0; i < d_.f.size(); ++i) {
            const double s = d_.side[i] == Side::red ? red_scale : blue_scale;
            w_[i] = 1.0 / (s * s);
        }
    }

    void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
        const auto t = theta(x);
        const auto n = static_cast<Eigen::Index>(d_.f.size());
        r.resize(n);
        if (J) J->resize(n, n_fit_params);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double sw = std::sqrt(w_[k]);
            r[i] = sw * (d_.y[k] - SidebandPairModel::value(t, d_.f[k], d_.side[k]));
            if (J) {
                const auto g = SidebandPairModel::gradient(t, d_.f[k], d_.side[k]);
                for (int j = 0; j < n_fit_params; ++j) (*J)(i, j) = -sw * g[j] * scale_[j];
            }
        }
    }

    const std::array<double, 6>& scale() const { return scale_; }

private:
    const FitData& d_;
    std::array<double, 6> offset_;
    std::array<double, 6> scale_;
    std::vector<double> w_;
};

}  // namespace detail

// Joint weighted least-squares fit of both sidebands with shared centre and
// linewidth. Model-refreshed weights sigma_i = S_model,i / sqrt(M).
inline FitResult fit_sidebands(const SidebandSpectrum& red, const SidebandSpectrum& blue, const FitOptions& opt = {}) {
    red.validate();
    blue.validate();
    if (red.side != Side::red || blue.side != Side::blue)
        throw ValidationError("side", "fit_sidebands expects (red, blue) spectra");
    if (red.units != blue.units) throw ValidationError("units", "red and blue spectra must share units");
    const double step = red.step_hz();
    if (std::abs(blue.step_hz() - step) > 1e-9 * step)
        throw ValidationError("freqs", "red and blue spectra must share grid spacing");
    if (!(opt.fit_max_hz > opt.fit_min_hz)) throw ValidationError("fit_range", "upper bound must exceed lower bound");

    const auto wr = detail::select(red, opt.fit_min_hz, opt.fit_max_hz);
    const auto wb = detail::select(blue, opt.fit_min_hz, opt.fit_max_hz);
    if (wr.y.size() < 10 || wb.y.size() < 10)
        throw ValidationError("fit_range", "fewer than 10 bins of each sideband inside the fit range");

    detail::FitData data;
    for (const auto* w : {&wr, &wb}) {
        const Side s = w == &wr ? Side::red : Side::blue;
        const double m = s == Side::red ? red.n_avg : blue.n_avg;
        for (std::size_t i = 0; i < w->f.size(); ++i) {
            data.f.push_back(w->f[i]);
            data.y.push_back(w->y[i]);
            data.side.push_back(s);
            data.m.push_back(m);
        }
    }

    // Initial values.
    const auto gr = detail::side_guess(wr);
    const auto gb = detail::side_guess(wb);
    const auto pr = detail::peak_guess(wr, gr, step);
    const auto pb = detail::peak_guess(wb, gb, step);
    const detail::PeakGuess& pk = pr.significance >= pb.significance ? pr : pb;
    auto amplitude = [&](const detail::SideWindow& w, const detail::SideGuess& g) {
        const auto z = pk.width_bins == 1 ? g.excess : detail::boxcar(g.excess, pk.width_bins);
        std::size_t i0 = 0;
        while (i0 + 1 < w.f.size() && w.f[i0] < pk.center) ++i0;
        return std::max(z[i0], 0.0) * g.floor;
    };
    const double s0r = amplitude(wr, gr);
    const double s0b = amplitude(wb, gb);

    const std::array<double, 6> offset{pk.center, 0.0, 0.0, 0.0, 0.0, 0.0};
    const std::array<double, 6> scale{pk.width, pk.width, gr.floor, gb.floor, gr.floor, gb.floor};
    detail::PairProblem problem(data, offset, scale);
    Eigen::VectorXd x(6);
    x << 0.0, 1.0, 1.0, 1.0, s0r / gr.floor, s0b / gb.floor;

    LmOptions lm;
    lm.max_iterations = opt.max_iterations;
    lm.rel_tol = opt.rel_tol;

    auto center_outside = [&](const Eigen::VectorXd& xv) {
        const double c = problem.theta(xv)[p_omega];
        return !(c >= opt.fit_min_hz && c <= opt.fit_max_hz);
    };

    int total_iterations = 0;
    bool converged = false;
    const int passes = opt.weighting == Weighting::model_refreshed ? opt.max_reweights : 1;
    for (int pass = 0; pass < passes; ++pass) {
        if (opt.weighting == Weighting::model_refreshed)
            problem.set_weights_from_model(x);
        else
            problem.set_uniform_weights(gr.floor, gb.floor);
        const LmResult res = levenberg_marquardt(problem, x, lm);
        total_iterations += res.iterations;
        if (!res.converged) {
            if (center_outside(res.x)) throw DegenerateFitError("fitted centre left the fit range");
            throw ConvergenceError("Lorentzian fit did not converge within " + std::to_string(opt.max_iterations) +
                                   " iterations");
        }
        const Eigen::VectorXd change = res.x - x;
        x = res.x;
        bool stable = true;
        for (int j = 0; j < 6; ++j)
            if (std::abs(change[j]) > opt.rel_tol * std::max(std::abs(x[j]), 1.0)) stable = false;
        if (stable || opt.weighting == Weighting::unweighted) {
            converged = true;
            break;
        }
    }
    if (!converged) throw ConvergenceError("iteratively reweighted fit did not settle");

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    problem.evaluate(x, r, &J);
    const double chi2 = r.squaredNorm();
    const auto n = static_cast<double>(data.f.size());
    const double red_chi2 = chi2 / (n - n_fit_params);
    const Eigen::MatrixXd info = J.transpose() * J;
    const Eigen::MatrixXd cov_x = info.completeOrthogonalDecomposition().pseudoInverse() * red_chi2;

    auto t = problem.theta(x);
    Eigen::Matrix<double, 6, 6> jac = Eigen::Matrix<double, 6, 6>::Zero();
    for (int j = 0; j < 6; ++j) jac(j, j) = problem.scale()[j];
    jac(p_omega, p_omega) *= two_pi;
    jac(p_gamma, p_gamma) *= two_pi * (t[p_gamma] < 0.0 ? -1.0 : 1.0);

    FitResult fr;
    fr.omega_tilde = two_pi * t[p_omega];
    fr.gamma_tilde = two_pi * std::abs(t[p_gamma]);
    fr.b_red = t[p_b_red];
    fr.b_blue = t[p_b_blue];
    fr.s_red = t[p_s_red];
    fr.s_blue = t[p_s_blue];
    fr.covariance = jac * cov_x * jac.transpose();
    fr.covariance = 0.5 * (fr.covariance + fr.covariance.transpose()).eval();
    fr.fit_min_hz = opt.fit_min_hz;
    fr.fit_max_hz = opt.fit_max_hz;
    fr.residual_norm = std::sqrt(chi2);
    fr.reduced_chi2 = red_chi2;
    fr.n_points = static_cast<int>(data.f.size());
    fr.iterations = total_iterations;
    fr.n_avg = std::min(red.n_avg, blue.n_avg);
    fr.units = red.units;

    if (center_outside(x)) throw DegenerateFitError("fitted centre lies outside the fit range");
    const double width_hz = opt.fit_max_hz - opt.fit_min_hz;
    if (!(std::abs(t[p_gamma]) < width_hz)) throw DegenerateFitError("fitted linewidth exceeds the fit range");
    // A width collapsed onto a single bin is a noise spike. Unresolved but real
    // peaks (noiseless spectra) sit well above this.
    if (!(std::abs(t[p_gamma]) >= opt.min_width_bins * step))
        throw DegenerateFitError("fitted linewidth collapsed below the frequency resolution");
    const double contrast = std::max(fr.s_red / fr.b_red, fr.s_blue / fr.b_blue);
    if (!(contrast >= opt.min_contrast))
        throw DegenerateFitError("sideband peak is below the floor by more than the contrast threshold");
    auto significance = [&](FitParam p) {
        const double s = fr.value(p), e = fr.sigma(p);
        if (e > 0.0) return s / e;
        return s > 0.0 ? HUGE_VAL : 0.0;
    };
    if (!(std::max(significance(p_s_red), significance(p_s_blue)) >= opt.min_significance))
        throw DegenerateFitError("sideband peak is not significant above the noise");
    return fr;
}

}  // namespace sbt
