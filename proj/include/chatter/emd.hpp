#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace chatter {

struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;

    std::size_t count() const { return maxima.size() + minima.size(); }
};

// Strict three-point local extrema. A flat run bounded by lower (higher)
// neighbours on both sides counts once, at its left-rounded midpoint.
Extrema find_extrema(std::span<const double> x);

// Sign changes, a run of exact zeros between opposite signs counting once.
std::size_t count_zero_crossings(std::span<const double> x);

// |#extrema - #zero crossings| <= 1
bool satisfies_imf_count_condition(std::span<const double> x);

// Natural cubic spline through (knots, values); evaluated at 0..n-1.
std::vector<double> natural_cubic_spline(std::span<const double> knots, std::span<const double> values,
                                         std::size_t n);

// Mean of the upper and lower cubic-spline envelopes. The two outermost
// extrema on each side are mirrored about the end samples before fitting.
// nullopt when there are fewer than 2 maxima or 2 minima.
std::optional<std::vector<double>> envelope_mean(std::span<const double> x);

struct SiftParams {
    double sd_threshold = 0.2;
    int max_sweeps = 100;
    // emd stops once the residue's RMS drops below this fraction of the
    // input's RMS (Huang's "residue of no substantial consequence")
    double residue_rms_fraction = 1e-3;
};

struct SiftResult {
    std::vector<double> imf;
    bool is_monotonic = false;
    int sweeps = 0;
};

SiftResult sift_imf(std::span<const double> residue, const SiftParams& params = {});

struct ImfSet {
    std::vector<std::vector<double>> imfs;
    std::vector<double> residue;

    std::size_t size() const { return imfs.size(); }
    std::size_t length() const { return residue.size(); }
};

// Repeated sifting, r_i = r_{i-1} - c_i, until the residue is monotonic or
// negligible, or max_imfs IMFs have been extracted.
ImfSet emd(std::span<const double> x, int max_imfs = 10, const SiftParams& params = {});

struct EemdParams {
    int ensemble_size = 200;
    double noise_std_fraction = 0.2;
    int max_imfs = 10;
    SiftParams sift;
    std::uint64_t master_seed = 0;
    int workers = 1;
};

void validate(const EemdParams& params);

// Ensemble mean of EMDs of x + noise_std_fraction * std(x) * g_e. Member e draws
// g_e from a stream seeded by (master_seed, e) only, so the result does not
// depend on `workers`.
ImfSet eemd(std::span<const double> x, const EemdParams& params = {});

// One column per IMF then the residue.
void write_imf_csv(const std::filesystem::path& path, const ImfSet& imfs);

} // namespace chatter
