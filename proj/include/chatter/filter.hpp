#pragma once

#include <complex>
#include <span>
#include <vector>

#include "chatter/ingest.hpp"

namespace chatter {

// Normalized second-order section:
// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    std::complex<double> response(double freq_hz, double sample_rate_hz) const;
};

class FilterCascade {
public:
    FilterCascade() = default; // identity
    explicit FilterCascade(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

    const std::vector<Biquad>& sections() const { return sections_; }
    std::size_t order() const { return 2 * sections_.size(); }

    std::complex<double> response(double freq_hz, double sample_rate_hz) const;
    double magnitude(double freq_hz, double sample_rate_hz) const;

    // Causal forward filtering from rest (transposed direct form II per section).
    std::vector<double> apply(std::span<const double> x) const;

private:
    std::vector<Biquad> sections_;
};

// Digital Butterworth low-pass by bilinear transform with prewarping, as
// order/2 cascaded sections each normalized to unit DC gain. Order 0 is the
// identity cascade.
FilterCascade design_lowpass(int order, double cutoff_hz, double sample_rate_hz);

// Filters then keeps every M-th sample, M = rate / target_rate (must be integral).
TimeSeries filter_and_downsample(const TimeSeries& ts, const FilterCascade& filter, double target_rate_hz);

} // namespace chatter
