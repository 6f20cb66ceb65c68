#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracle_values.hpp"
#include "sbt/config.hpp"
#include "sbt/sideband_model.hpp"
#include "sbt/sweep.hpp"

using namespace sbt;

namespace {

const SystemParams P = SystemParams::paper_defaults();

std::vector<BeamConfig> beams(double p_cl, double probe_detuning_hz = -6.5e3) {
    return {BeamConfig::probe(32e-6, hz_to_angular(probe_detuning_hz)), BeamConfig::local_oscillator(1.57e-3),
            BeamConfig::cooling(p_cl, -P.omega_m)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// Trapezoid integral over ordinary frequency.
double integrate(const std::vector<double>& f, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (f[i] - f[i - 1]);
    return s;
}

}  // namespace

TEST(Spectra, SidebandAreas) {
    const double x2 = oracle::x_zp * oracle::x_zp;
    EXPECT_EQ(sideband_area(P, 0.0, Side::blue), 0.0);
    EXPECT_NEAR(sideband_area(P, 0.0, Side::red) / (2 * x2), 1.0, 1e-14);
    EXPECT_NEAR(sideband_area(P, 0.84, Side::red) / sideband_area(P, 0.84, Side::blue), 1.84 / 0.84, 1e-14);
    EXPECT_NEAR(sideband_area(P, 0.84, Side::red) / sideband_area(P, 0.84, Side::blue), 2.19, 5e-4);
    EXPECT_NEAR(sideband_area(P, 0.84, Side::blue), 4.65e-31, 0.005e-31);
    for (double n : {0.0, 0.1, 0.84, 7.0, 1e4}) {
        const double mean = 0.5 * (sideband_area(P, n, Side::red) + sideband_area(P, n, Side::blue));
        EXPECT_NEAR(mean / (x2 * (2 * n + 1)), 1.0, 1e-12);
    }
}

TEST(Spectra, LorentzianAreaConvention) {
    // A = gamma s / 4 with gamma angular and the Lorentzian sampled in Hz.
    const double gamma = hz_to_angular(500.0), omega = hz_to_angular(705e3), area = 3.0;
    const double s = peak_from_area(area, gamma);
    std::vector<double> f, y;
    for (double v = 705e3 - 3e5; v <= 705e3 + 3e5; v += 0.5) {
        f.push_back(v);
        y.push_back(s * sideband_lorentzian(v, omega, gamma));
    }
    EXPECT_NEAR(integrate(f, y), area, 2e-3 * area);  // tails beyond the window
    EXPECT_DOUBLE_EQ(sideband_lorentzian(705e3, omega, gamma), 1.0);
    EXPECT_NEAR(sideband_lorentzian(705e3 + 250.0, omega, gamma), 0.5, 1e-12);
}

TEST(Spectra, DecompositionIdentity) {
    const auto b = beams(415e-6);
    const EffectiveMode m = effective_mode(P, b);
    const DetectionLayer det = detection_layer(P, b);
    const auto f = FrequencyGrid::from_range(690e3, 720e3, 2.0).values();
    const auto peaks = default_contaminants(det.blue.floor_x());
    for (Side side : {Side::red, Side::blue})
        for (double n : {0.0, 0.84, 12.0}) {
            const SpectrumComponents c = decompose(P, m, n, side, f, det, peaks);
            const auto total = c.total();
            const SidebandSpectrum s = model_sxx(P, m, n, side, f, det, peaks);
            for (std::size_t i = 0; i < f.size(); ++i) {
                ASSERT_LE(rel(total[i], s.psd[i]), 1e-12) << i;
                const double lor = c.thermal[i] + c.zero_point[i] + c.backaction[i];
                const double unit = c.zero_point[i] * 2.0;  // weight 1 Lorentzian
                EXPECT_NEAR(lor, unit * (side == Side::red ? n + 1 : n), 1e-12 * std::max(unit * (n + 1), 1e-300));
            }
        }
}

TEST(Spectra, GroundStateBlueSidebandVanishes) {
    const auto b = beams(415e-6);
    const EffectiveMode m = effective_mode(P, b);
    const DetectionLayer det = detection_layer(P, b);
    const auto f = FrequencyGrid::from_range(702e3, 714e3, 2.0).values();
    const SidebandSpectrum blue = model_sxx(P, m, 0.0, Side::blue, f, det);
    for (double v : blue.psd) EXPECT_DOUBLE_EQ(v, det.blue.floor_x());
}

TEST(Spectra, NonNegative) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto f = FrequencyGrid::from_range(640e3, 770e3, 50.0).values();
    for (int i = 0; i < 50; ++i) {
        const auto b = beams(6e-4 * u(rng), -2e4 * u(rng));
        const EffectiveMode m = effective_mode(P, b);
        const DetectionLayer det = detection_layer(P, b);
        for (Side side : {Side::red, Side::blue})
            for (double v : model_sxx(P, m, 50 * u(rng), side, f, det, default_contaminants(1e-33)).psd)
                ASSERT_GE(v, 0.0);
    }
}

TEST(Spectra, DetectionRoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    const auto b = beams(158e-6);
    const DetectionLayer det = detection_layer(P, b);
    for (Side side : {Side::red, Side::blue}) {
        SidebandSpectrum s;
        s.side = side;
        for (int i = 0; i < 500; ++i) {
            s.freqs_hz.push_back(700e3 + i);
            s.psd.push_back(u(rng) * 1e-33);
        }
        const SidebandSpectrum back = detection_inverse(det, detection_forward(det, s));
        EXPECT_EQ(back.units, Units::displacement);
        for (std::size_t i = 0; i < s.psd.size(); ++i) ASSERT_LE(rel(back.psd[i], s.psd[i]), 1e-12);
        const SidebandSpectrum via_params = detection_forward(P, s, b);
        EXPECT_EQ(via_params.psd, detection_forward(det, s).psd);
    }
}

TEST(Spectra, ZeroSignalMapsToFloors) {
    const auto b = beams(100e-6);
    const DetectionLayer det = detection_layer(P, b);
    SidebandSpectrum s;
    s.side = Side::blue;
    s.freqs_hz = {1.0, 2.0, 3.0};
    s.psd.assign(3, det.blue.floor_x());
    const auto sii = detection_forward(det, s);
    for (double v : sii.psd) EXPECT_NEAR(v, det.blue.floor_sii(), 1e-12 * v);
    for (double v : detection_inverse(det, sii).psd) EXPECT_NEAR(v, det.blue.floor_x(), 1e-12 * v);
}

TEST(Spectra, DirectionChecks) {
    const DetectionLayer det = detection_layer(P, beams(0.0));
    SidebandSpectrum s;
    s.freqs_hz = {1.0, 2.0};
    s.psd = {1.0, 1.0};
    s.units = Units::photocurrent;
    EXPECT_THROW(detection_forward(det, s), ValidationError);
    s.units = Units::displacement;
    EXPECT_THROW(detection_inverse(det, s), ValidationError);
    DetectionLayer bad = det;
    bad.red.transduction = 0.0;
    s.units = Units::photocurrent;
    EXPECT_THROW(detection_inverse(bad, s), CalibrationError);
}

TEST(Spectra, ShotFloorLinearInTotalPower) {
    SystemParams p = P;
    p.dark_red = p.dark_blue = 0.0;
    auto b = beams(100e-6);
    const DetectionLayer a = detection_layer(p, b);
    for (auto& beam : b) beam.power *= 2.0;
    const DetectionLayer d = detection_layer(p, b);
    EXPECT_NEAR(d.p_total, 2.0 * a.p_total, 1e-15);
    EXPECT_NEAR(d.red.floor_sii() / a.red.floor_sii(), 2.0, 1e-13);
    EXPECT_NEAR(d.blue.floor_sii() / a.blue.floor_sii(), 2.0, 1e-13);

    // With dark noise present, S_II - dark doubles with P_total.
    auto b1 = beams(100e-6);
    const DetectionLayer e = detection_layer(P, b1);
    b1[1].power = 2.0 * e.p_total - (e.p_total - b1[1].power);  // raise the LO to double P_total
    const DetectionLayer g = detection_layer(P, b1);
    EXPECT_NEAR(g.p_total, 2.0 * e.p_total, 1e-15);
    EXPECT_NEAR((g.red.floor_sii() - P.dark_red) / (e.red.floor_sii() - P.dark_red), 2.0, 1e-12);
}

TEST(Spectra, GainAndDarkAsymmetry) {
    const auto b = beams(0.0);
    const DetectionLayer det = detection_layer(P, b);
    EXPECT_NEAR(det.red.shot / det.blue.shot, 1.005, 1e-14);
    EXPECT_NEAR(det.red.dark / det.blue.dark, 1.015, 1e-14);
}

TEST(Spectra, FilteringMovesImprecisionFloors) {
    const DetectionLayer det = detection_layer(P, beams(0.0));
    EXPECT_NEAR(det.blue.shot_x() / det.red.shot_x(), oracle::phi_ratio, 1e-13);
    SystemParams flat = P;
    flat.gain_red = flat.gain_blue;
    flat.dark_red = flat.dark_blue;
    const DetectionLayer d2 = detection_layer(flat, beams(0.0));
    EXPECT_NEAR(d2.blue.floor_x() / d2.red.floor_x(), oracle::phi_ratio, 1e-13);
    const DetectionLayer sym = detection_layer(flat, beams(0.0, 0.0));
    EXPECT_NEAR(sym.blue.floor_x() / sym.red.floor_x(), 1.0, 1e-14);
}

TEST(Spectra, AreaRatioAcrossUnits) {
    // Displacement units: (n+1)/n whatever the probe detuning. Photocurrent:
    // weighted by the two transduction coefficients.
    const double n = 0.84;
    for (double dp : {0.0, -6.5e3, -30e3}) {
        const auto b = beams(415e-6, dp);
        const DetectionLayer det = detection_layer(P, b);
        const double ar = sideband_area(P, n, Side::red), ab = sideband_area(P, n, Side::blue);
        EXPECT_NEAR(ar / ab, (n + 1) / n, 1e-14);
        const double ir = det.red.transduction * ar, ib = det.blue.transduction * ab;
        EXPECT_NEAR(ir / ib, P.gain_red * det.red.filter * (n + 1) / (P.gain_blue * det.blue.filter * n), 1e-13);
    }
}

TEST(Spectra, ContaminantsIndependentOfCoolingBeam) {
    RunConfig cfg;
    const auto a = configured_contaminants(cfg);
    cfg.cooling.power = 1e-6;
    cfg.cooling.detuning = -0.7 * cfg.params.omega_m;
    const auto b = configured_contaminants(cfg);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].area, b[i].area);
        EXPECT_EQ(a[i].center_hz, b[i].center_hz);
    }
    // Outside the fit window they contribute nothing measurable.
    EXPECT_LT(a[1].density(702e3), 1e-12 * a[1].density(701e3));
    EXPECT_THROW((ContaminantPeak{1.0, 0.0, 1.0}.validate()), ValidationError);
}

TEST(Spectra, CsvRoundTripIsBitExact) {
    const auto b = beams(415e-6);
    const EffectiveMode m = effective_mode(P, b);
    const DetectionLayer det = detection_layer(P, b);
    const auto f = FrequencyGrid::from_range(700e3, 716e3, 2.0).values();
    SidebandSpectrum s = model_sxx(P, m, 0.84, Side::red, f, det);
    s.n_avg = 37;
    s.metadata["seed"] = "42";
    std::stringstream io;
    write_csv(io, s);
    const SidebandSpectrum r = read_csv(io);
    EXPECT_EQ(r.side, s.side);
    EXPECT_EQ(r.units, s.units);
    EXPECT_EQ(r.n_avg, 37);
    EXPECT_EQ(r.metadata.at("seed"), "42");
    EXPECT_EQ(r.freqs_hz, s.freqs_hz);
    EXPECT_EQ(r.psd, s.psd);
}

TEST(Spectra, CsvRejectsBadInput) {
    std::stringstream a("freq_hz,psd\n1,2\n2,3\n");
    EXPECT_THROW(read_csv(a), ParseError);
    std::stringstream b("# side: red\nfreq_hz,psd\n1,2\n3,3\n4,1\n");
    EXPECT_THROW(read_csv(b), ValidationError);
    std::stringstream c("# side: red\nfreq_hz,psd\n1,2\n2,-3\n");
    EXPECT_THROW(read_csv(c), ValidationError);
    std::stringstream d("# side: green\n");
    EXPECT_THROW(read_csv(d), ParseError);
    std::stringstream e("# side: blue\nfreq_hz,psd\n1;2\n");
    EXPECT_THROW(read_csv(e), ParseError);
}
