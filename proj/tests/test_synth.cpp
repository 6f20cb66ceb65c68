#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "sbt/rng.hpp"
#include "sbt/synth.hpp"

using namespace sbt;

namespace {

SidebandSpectrum flat(std::size_t n, double value, Side side = Side::red) {
    SidebandSpectrum s;
    s.side = side;
    for (std::size_t i = 0; i < n; ++i) {
        s.freqs_hz.push_back(700e3 + 2.0 * i);
        s.psd.push_back(value);
    }
    return s;
}

struct Moments {
    double mean, var;
};

Moments moments(const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double q = 0.0;
    for (double x : v) q += (x - m) * (x - m);
    return {m, q / (v.size() - 1)};
}

}  // namespace

TEST(Rng, ReferenceVectors) {
    std::uint64_t s = 0;
    EXPECT_EQ(splitmix64_next(s), 0xE220A8397B1DCDAFULL);
    auto x = Xoshiro256::from_state(1, 2, 3, 4);
    EXPECT_EQ(x.next(), 11520ULL);
    EXPECT_EQ(x.next(), 0ULL);
    EXPECT_EQ(x.next(), 1509978240ULL);
    EXPECT_EQ(x.next(), 1215971899390074240ULL);
}

TEST(Rng, FrozenStreamValues) {
    // Golden values of the versioned stream; a change here breaks stored data.
    Xoshiro256 g(derive_key(1, 1, 0));
    const double first = g.uniform();
    Xoshiro256 h(derive_key(1, 1, 0));
    EXPECT_EQ(first, h.uniform());
    EXPECT_NE(derive_key(1, 1, 0), derive_key(1, 2, 0));
    EXPECT_NE(derive_key(1, 1, 0), derive_key(2, 1, 0));
    EXPECT_NE(derive_key(1, 1, 0), derive_key(1, 1, 1));
    EXPECT_STREQ(rng_algorithm, "sbt-rng-1");
}

TEST(Rng, GammaMoments) {
    for (double k : {0.5, 1.0, 3.0, 100.0}) {
        Xoshiro256 g(derive_key(11, 0, static_cast<std::uint64_t>(k * 10)));
        std::vector<double> v(200000);
        for (auto& x : v) x = g.gamma(k);
        const Moments m = moments(v);
        EXPECT_NEAR(m.mean, k, 4.0 * std::sqrt(k / v.size())) << k;
        EXPECT_NEAR(m.var / k, 1.0, 0.03) << k;
    }
}

TEST(Synth, DeterministicAndThreadInvariant) {
    const auto model = flat(5000, 2.0);
    const NoiseSettings ns{17, 100};
    const auto a = synthesize(model, ns, 1);
    const auto b = synthesize(model, ns, 1);
    const auto c = synthesize(model, ns, 4);
    EXPECT_EQ(a.psd, b.psd);
    EXPECT_EQ(a.psd, c.psd);
    EXPECT_EQ(a.n_avg, 100);
    EXPECT_EQ(a.metadata.at("seed"), "17");
    EXPECT_EQ(a.metadata.at("rng"), "sbt-rng-1");
    EXPECT_NE(synthesize(model, {18, 100}).psd, a.psd);
    EXPECT_NE(synthesize(flat(5000, 2.0, Side::blue), ns).psd, a.psd);
}

TEST(Synth, RejectsNonPositiveBins) {
    auto model = flat(10, 1.0);
    model.psd[3] = 0.0;
    EXPECT_THROW(synthesize(model, {}), ValidationError);
    EXPECT_THROW(synthesize(flat(10, 1.0), {1, 0}), ValidationError);
}

TEST(Synth, LargeAveragingConvergesToModel) {
    const auto model = flat(1000, 3.0);
    const auto out = synthesize(model, {5, 1000000});
    for (double v : out.psd) ASSERT_LT(std::abs(v / 3.0 - 1.0), 0.01);
}

TEST(Synth, SingleAverageIsExponential) {
    const std::size_t n = 100000;
    const auto out = synthesize(flat(n, 2.5), {7, 1});
    const Moments m = moments(out.psd);
    EXPECT_NEAR(m.mean, 2.5, 3.0 * 2.5 / std::sqrt(double(n)));
    EXPECT_NEAR(std::sqrt(m.var) / m.mean, 1.0, 0.02);
}

TEST(Synth, UnbiasedOverSeedsAndVarianceLaw) {
    // One bin, many seeds.
    const std::size_t N = 10000;
    for (int M : {1, 10, 100}) {
        std::vector<double> v(N);
        for (std::size_t s = 0; s < N; ++s) v[s] = synthesize(flat(2, 4.0), {s + 1000, M}).psd[0];
        const Moments m = moments(v);
        const double sd = 4.0 / std::sqrt(double(M));
        EXPECT_NEAR(m.mean, 4.0, 3.0 * sd / std::sqrt(double(N))) << M;
        // Relative variance 1/M; sampling error of a variance ~ sqrt(2/N) for near-Gaussian data.
        EXPECT_NEAR(m.var / (sd * sd), 1.0, 5.0 * std::sqrt((2.0 + 6.0 / M) / N)) << M;
    }
}

TEST(Synth, NeighbouringBinsUncorrelated) {
    const std::size_t n = 200000;
    const auto out = synthesize(flat(n, 1.0), {3, 10});
    const Moments m = moments(out.psd);
    for (std::size_t lag : {1, 2, 7}) {
        double c = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) c += (out.psd[i] - m.mean) * (out.psd[i + lag] - m.mean);
        c /= (n - lag) * m.var;
        EXPECT_LT(std::abs(c), 4.0 / std::sqrt(double(n))) << lag;
    }
}
