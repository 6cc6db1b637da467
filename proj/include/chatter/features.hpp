#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chatter/emd.hpp"
#include "chatter/types.hpp"

namespace chatter {

// One-sided magnitude spectrum, M = floor(n/2) + 1 bins at f_k = k*Fs/n.
// Forward DFT is unnormalized: X_k = sum_m x_m exp(-2 pi i k m / n).
struct Spectrum {
    std::vector<double> frequencies_hz;
    std::vector<double> magnitudes;
};

Spectrum magnitude_spectrum(std::span<const double> x, double sample_rate_hz);

// Fraction of sum |X_k|^2 over bins inside [band.low, band.high].
double band_energy_fraction(std::span<const double> x, double sample_rate_hz, const FrequencyBand& band);

inline constexpr std::size_t kWptFeatureCount = 14;
inline constexpr std::size_t kEemdFeatureCount = 7;

inline constexpr std::array<std::string_view, kWptFeatureCount> kWptFeatureNames = {
    "a1_mean",          "a2_std",           "a3_rms",          "a4_peak",
    "a5_skewness",      "a6_kurtosis",      "a7_crest",        "a8_clearance",
    "a9_shape",         "a10_impulse",      "a11_mean_sq_freq", "a12_autocorr",
    "a13_freq_center",  "a14_std_freq",
};

inline constexpr std::array<std::string_view, kEemdFeatureCount> kEemdFeatureNames = {
    "f1_energy_ratio", "f2_peak_to_peak", "f3_std", "f4_rms", "f5_crest", "f6_skewness", "f7_kurtosis",
};

// a1..a14, index 0 holds a1.
struct WptFeatureVector {
    std::array<double, kWptFeatureCount> values{};

    double operator[](std::size_t feature) const { return values[feature - 1]; }
};

// f1..f7, index 0 holds f1.
struct EemdFeatureVector {
    std::array<double, kEemdFeatureCount> values{};

    double operator[](std::size_t feature) const { return values[feature - 1]; }
};

// Time and frequency features of a (reconstructed) packet signal. Skewness and
// kurtosis use the (N-1)*rms^k denominators; std is the population value.
// Throws DomainError for zero-RMS input.
WptFeatureVector wpt_features(std::span<const double> x, double sample_rate_hz);

// Features of IMF `informative_index` (1-based). The energy ratio is taken
// against the total energy of all IMFs, residue excluded.
EemdFeatureVector eemd_features(const ImfSet& imfs, int informative_index);

struct FeatureMatrix {
    std::vector<std::string> feature_names;
    std::vector<std::string> sample_ids;
    Matrix values;
    std::vector<int> labels;

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }
};

struct LabeledSignal {
    std::string id;
    std::vector<double> signal;
    int label = 0;
};

struct FeatureExtractor {
    std::vector<std::string> names;
    std::function<std::vector<double>(const LabeledSignal&)> extract;
};

FeatureExtractor wpt_feature_extractor(double sample_rate_hz);

// Rows follow input order. Extractor DomainErrors are collected and rethrown
// as one FeatureExtractionError naming every failing sample.
FeatureMatrix build_feature_matrix(std::span<const LabeledSignal> samples, const FeatureExtractor& extractor);

class FeatureExtractionError : public std::runtime_error {
public:
    FeatureExtractionError(const std::string& what, std::vector<std::string> sample_ids)
        : std::runtime_error(what), sample_ids_(std::move(sample_ids)) {}
    const std::vector<std::string>& sample_ids() const { return sample_ids_; }

private:
    std::vector<std::string> sample_ids_;
};

// Header of feature names plus trailing `label` column.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

} // namespace chatter
