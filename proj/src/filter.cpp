#include "chatter/filter.hpp"

#include <cmath>
#include <numbers>

#include "chatter/error.hpp"

namespace chatter {

std::complex<double> Biquad::response(double freq_hz, double sample_rate_hz) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

std::complex<double> FilterCascade::response(double freq_hz, double sample_rate_hz) const {
    std::complex<double> h = 1.0;
    for (const auto& s : sections_) h *= s.response(freq_hz, sample_rate_hz);
    return h;
}

double FilterCascade::magnitude(double freq_hz, double sample_rate_hz) const {
    // Product of magnitudes; avoids complex underflow noise in deep stopbands.
    double m = 1.0;
    for (const auto& s : sections_) m *= std::abs(s.response(freq_hz, sample_rate_hz));
    return m;
}

std::vector<double> FilterCascade::apply(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections_) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

FilterCascade design_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
    if (order < 0 || order % 2 != 0) throw DomainError("Butterworth order must be even and non-negative");
    if (!(sample_rate_hz > 0.0)) throw DomainError("sample rate must be positive");
    if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate_hz / 2.0)
        throw DomainError("cutoff must lie strictly between 0 and Nyquist");
    if (order == 0) return {};

    // Prewarped analog cutoff for the bilinear map s = 2 fs (z - 1) / (z + 1).
    const double fs2 = 2.0 * sample_rate_hz;
    const double wc = fs2 * std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);

    std::vector<Biquad> sections;
    sections.reserve(static_cast<std::size_t>(order / 2));
    // Left-half-plane poles come in conjugate pairs p_k, conj(p_k), k < order/2.
    for (int k = 0; k < order / 2; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + 1.0 + order) / (2.0 * order);
        const std::complex<double> p = wc * std::polar(1.0, theta);
        // Analog section wc^2 / (s^2 - 2 Re(p) s + |p|^2) under the bilinear map.
        const double re = p.real();
        const double mag2 = std::norm(p);
        const double a0 = fs2 * fs2 - 2.0 * re * fs2 + mag2;
        Biquad s;
        s.a1 = (2.0 * mag2 - 2.0 * fs2 * fs2) / a0;
        s.a2 = (fs2 * fs2 + 2.0 * re * fs2 + mag2) / a0;
        // Numerator K (1 + z^-1)^2 with K fixing unit DC gain of the section.
        const double k_gain = (1.0 + s.a1 + s.a2) / 4.0;
        s.b0 = k_gain;
        s.b1 = 2.0 * k_gain;
        s.b2 = k_gain;
        sections.push_back(s);
    }
    return FilterCascade(std::move(sections));
}

TimeSeries filter_and_downsample(const TimeSeries& ts, const FilterCascade& filter, double target_rate_hz) {
    validate(ts);
    if (!(target_rate_hz > 0.0)) throw DomainError("target rate must be positive");
    const double ratio = ts.sample_rate_hz / target_rate_hz;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
        throw DomainError("sample rate / target rate must be a positive integer");
    const auto factor = static_cast<std::size_t>(rounded);

    const auto filtered = filter.apply(ts.samples);
    TimeSeries out;
    out.sample_rate_hz = target_rate_hz;
    out.start_time_s = ts.start_time_s;
    const std::size_t n = filtered.size() / factor;
    out.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.samples.push_back(filtered[i * factor]);
    return out;
}

} // namespace chatter
