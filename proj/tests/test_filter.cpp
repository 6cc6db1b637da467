#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chatter/error.hpp"
#include "chatter/filter.hpp"
#include "oracle.hpp"

using namespace chatter;

namespace {

// Analytic magnitude of the bilinear-transformed Butterworth low-pass.
double butterworth_magnitude(int order, double f, double fc, double fs) {
    const double ratio = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
    return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * order));
}

double rms(std::span<const double> x) { return std::sqrt(oracle::energy(x) / static_cast<double>(x.size())); }

} // namespace

TEST_CASE("second-order design: unit DC gain and -3 dB at the cutoff") {
    const auto f = design_lowpass(2, 100.0, 1000.0);
    CHECK(f.sections().size() == 1);
    CHECK(f.magnitude(0.0, 1000.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(f.magnitude(100.0, 1000.0) - 1.0 / std::sqrt(2.0)) < 1e-6);
}

TEST_CASE("order 100 at 160 kHz: 50 sections and deep stopband") {
    const auto f = design_lowpass(100, 10000.0, 160000.0);
    CHECK(f.sections().size() == 50);
    CHECK(f.order() == 100);
    CHECK(std::abs(f.magnitude(0.0, 160000.0) - 1.0) < 1e-9);
    CHECK(f.magnitude(20000.0, 160000.0) < 1e-12);
}

TEST_CASE("magnitude matches the analytic response across the band") {
    for (int order : {2, 4, 8, 20, 100}) {
        const double fs = 160000.0, fc = 10000.0;
        const auto f = design_lowpass(order, fc, fs);
        for (double freq = 0.0; freq < fs / 2.0; freq += 997.0) {
            const double expected = butterworth_magnitude(order, freq, fc, fs);
            const double got = f.magnitude(freq, fs);
            CHECK(std::abs(got - expected) <= 1e-9 * std::max(1.0, expected) + 1e-14);
        }
    }
}

TEST_CASE("invalid designs are domain errors") {
    CHECK_THROWS_AS(design_lowpass(2, 600.0, 1000.0), DomainError);
    CHECK_THROWS_AS(design_lowpass(2, 500.0, 1000.0), DomainError);
    CHECK_THROWS_AS(design_lowpass(3, 100.0, 1000.0), DomainError);
    CHECK_THROWS_AS(design_lowpass(-2, 100.0, 1000.0), DomainError);
    CHECK(design_lowpass(0, 100.0, 1000.0).sections().empty());
}

TEST_CASE("decimation from 160 kHz to 10 kHz") {
    TimeSeries ts;
    ts.sample_rate_hz = 160000.0;
    ts.samples = oracle::gaussian(1600, 5);
    const auto out = filter_and_downsample(ts, design_lowpass(100, 10000.0, 160000.0), 10000.0);
    CHECK(out.size() == 100);
    CHECK(out.sample_rate_hz == 10000.0);
    ts.samples.resize(1615);
    CHECK(filter_and_downsample(ts, FilterCascade{}, 10000.0).size() == 100);
}

TEST_CASE("constant input stays constant after settling") {
    TimeSeries ts;
    ts.sample_rate_hz = 160000.0;
    ts.samples.assign(64000, 2.5);
    const auto out = filter_and_downsample(ts, design_lowpass(100, 10000.0, 160000.0), 10000.0);
    for (std::size_t i = out.size() / 2; i < out.size(); ++i) CHECK(std::abs(out.samples[i] - 2.5) < 1e-9);
}

TEST_CASE("identity cascade with factor 1 leaves the signal unchanged") {
    TimeSeries ts;
    ts.sample_rate_hz = 1000.0;
    ts.samples = oracle::gaussian(257, 9);
    const auto out = filter_and_downsample(ts, FilterCascade{}, 1000.0);
    CHECK(out.samples == ts.samples);
}

TEST_CASE("non-integer decimation factor is rejected") {
    TimeSeries ts;
    ts.sample_rate_hz = 160000.0;
    ts.samples.assign(100, 1.0);
    CHECK_THROWS_AS(filter_and_downsample(ts, FilterCascade{}, 15000.0), DomainError);
    CHECK_THROWS_AS(filter_and_downsample(ts, FilterCascade{}, 320000.0), DomainError);
}

TEST_CASE("passband flatness of the order-100 design") {
    const double fs = 160000.0, fc = 10000.0;
    const auto f = design_lowpass(100, fc, fs);
    for (double tone : {500.0, 1250.0, 2400.0}) {
        const auto x = oracle::sine(160000, tone, fs);
        const auto y = f.apply(x);
        // Skip the start-up transient of the high-order recursion.
        const std::span<const double> tail_x(x.data() + 80000, 80000);
        const std::span<const double> tail_y(y.data() + 80000, 80000);
        CHECK(std::abs(rms(tail_y) / rms(tail_x) - 1.0) < 1e-3);
    }
}

TEST_CASE("anti-aliasing: stopband energy above the target Nyquist") {
    // White noise through the filter: the share of output power above the
    // target Nyquist equals the ratio of |H|^2 integrals. Cutoff placed below
    // the target Nyquist so the band above it is stopband.
    const double fs = 160000.0, target = 10000.0, fc = 4000.0;
    const auto f = design_lowpass(100, fc, fs);
    double total = 0.0, above = 0.0;
    const int steps = 200000;
    for (int i = 0; i < steps; ++i) {
        const double freq = (i + 0.5) * (fs / 2.0) / steps;
        const double p = std::pow(f.magnitude(freq, fs), 2);
        total += p;
        if (freq > target / 2.0) above += p;
    }
    CHECK(above / total < 1e-10);

    // A tone above the target Nyquist must not alias into the decimated output.
    TimeSeries ts;
    ts.sample_rate_hz = fs;
    ts.samples = oracle::sine(160000, 7000.0, fs);
    const auto out = filter_and_downsample(ts, f, target);
    double peak = 0.0;
    for (std::size_t i = out.size() / 2; i < out.size(); ++i) peak = std::max(peak, std::abs(out.samples[i]));
    CHECK(peak < 1e-8);
}
