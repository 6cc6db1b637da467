#include "chatter/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fftw3.h>

#include "chatter/error.hpp"

namespace chatter {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Unnormalized one-sided DFT, bins 0..floor(n/2).
std::vector<std::complex<double>> real_dft(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    const std::size_t bins = x.size() / 2 + 1;
    auto* in = fftw_alloc_real(x.size());
    auto* out = fftw_alloc_complex(bins);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    std::copy(x.begin(), x.end(), in);
    fftw_execute(plan);
    std::vector<std::complex<double>> result(bins);
    for (std::size_t k = 0; k < bins; ++k) result[k] = {out[k][0], out[k][1]};
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return result;
}

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double rms_of(std::span<const double> x) {
    return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / static_cast<double>(x.size()));
}

double population_std(std::span<const double> x, double mean) {
    double acc = 0.0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

double central_power_sum(std::span<const double> x, double mean, int power) {
    double acc = 0.0;
    for (double v : x) acc += std::pow(v - mean, power);
    return acc;
}

} // namespace

Spectrum magnitude_spectrum(std::span<const double> x, double sample_rate_hz) {
    if (x.size() < 2) throw DomainError("spectrum needs at least two samples");
    const auto dft = real_dft(x);
    Spectrum s;
    s.frequencies_hz.resize(dft.size());
    s.magnitudes.resize(dft.size());
    const double df = sample_rate_hz / static_cast<double>(x.size());
    for (std::size_t k = 0; k < dft.size(); ++k) {
        s.frequencies_hz[k] = static_cast<double>(k) * df;
        s.magnitudes[k] = std::abs(dft[k]);
    }
    return s;
}

double band_energy_fraction(std::span<const double> x, double sample_rate_hz, const FrequencyBand& band) {
    const auto s = magnitude_spectrum(x, sample_rate_hz);
    double inside = 0.0, total = 0.0;
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        const double p = s.magnitudes[k] * s.magnitudes[k];
        total += p;
        if (band.contains(s.frequencies_hz[k])) inside += p;
    }
    return total > 0.0 ? inside / total : 0.0;
}

WptFeatureVector wpt_features(std::span<const double> x, double sample_rate_hz) {
    if (x.size() < 2) throw DomainError("features need at least two samples");
    const double n = static_cast<double>(x.size());
    WptFeatureVector f;
    auto& a = f.values;
    const double mean = mean_of(x);
    const double rms = rms_of(x);
    if (!(rms > 0.0)) throw DomainError("zero-RMS signal: ratio features undefined");
    double peak = 0.0, abs_mean = 0.0, sqrt_abs_mean = 0.0;
    for (double v : x) {
        peak = std::max(peak, std::abs(v));
        abs_mean += std::abs(v);
        sqrt_abs_mean += std::sqrt(std::abs(v));
    }
    abs_mean /= n;
    sqrt_abs_mean /= n;

    a[0] = mean;
    a[1] = population_std(x, mean);
    a[2] = rms;
    a[3] = peak;
    a[4] = central_power_sum(x, mean, 3) / ((n - 1.0) * rms * rms * rms);
    a[5] = central_power_sum(x, mean, 4) / ((n - 1.0) * rms * rms * rms * rms);
    a[6] = peak / rms;
    a[7] = peak / (sqrt_abs_mean * sqrt_abs_mean);
    a[8] = rms / abs_mean;
    a[9] = peak / abs_mean;

    const auto s = magnitude_spectrum(x, sample_rate_hz);
    const double dt = 1.0 / sample_rate_hz;
    double mag_sum = 0.0, f2 = 0.0, cos_sum = 0.0, f1 = 0.0;
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        const double m = s.magnitudes[k];
        const double fk = s.frequencies_hz[k];
        mag_sum += m;
        f2 += fk * fk * m;
        cos_sum += std::cos(2.0 * std::numbers::pi * fk * dt) * m;
        f1 += fk * m;
    }
    a[10] = f2 / mag_sum;
    a[11] = cos_sum / mag_sum;
    a[12] = f1 / mag_sum;
    double spread = 0.0;
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        const double d = s.frequencies_hz[k] - a[12];
        spread += d * d * s.magnitudes[k];
    }
    a[13] = spread / mag_sum;
    return f;
}

EemdFeatureVector eemd_features(const ImfSet& imfs, int informative_index) {
    if (informative_index < 1 || informative_index > static_cast<int>(imfs.size()))
        throw DomainError("informative IMF index out of range");
    double total = 0.0;
    for (const auto& c : imfs.imfs) total += std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
    if (!(total > 0.0)) throw DomainError("all IMFs have zero energy");

    const auto& c = imfs.imfs[static_cast<std::size_t>(informative_index - 1)];
    if (c.size() < 2) throw DomainError("IMF too short for features");
    const double n = static_cast<double>(c.size());
    const double energy = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
    const double mean = mean_of(c);
    const double rms = std::sqrt(energy / n);
    if (!(rms > 0.0)) throw DomainError("informative IMF is identically zero");
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());

    EemdFeatureVector f;
    auto& v = f.values;
    v[0] = energy / total;
    v[1] = *hi - *lo;
    v[2] = population_std(c, mean);
    v[3] = rms;
    v[4] = *hi / rms;
    v[5] = central_power_sum(c, mean, 3) / ((n - 1.0) * rms * rms * rms);
    v[6] = central_power_sum(c, mean, 4) / ((n - 1.0) * rms * rms * rms * rms);
    return f;
}

FeatureExtractor wpt_feature_extractor(double sample_rate_hz) {
    FeatureExtractor e;
    e.names.assign(kWptFeatureNames.begin(), kWptFeatureNames.end());
    e.extract = [sample_rate_hz](const LabeledSignal& s) {
        const auto f = wpt_features(s.signal, sample_rate_hz);
        return std::vector<double>(f.values.begin(), f.values.end());
    };
    return e;
}

FeatureMatrix build_feature_matrix(std::span<const LabeledSignal> samples, const FeatureExtractor& extractor) {
    if (samples.empty()) throw DomainError("feature matrix needs at least one sample");
    FeatureMatrix fm;
    fm.feature_names = extractor.names;
    fm.values = Matrix(0, extractor.names.size());
    std::vector<std::string> failed;
    std::string first_error;
    for (const auto& s : samples) {
        try {
            const auto row = extractor.extract(s);
            if (row.size() != extractor.names.size())
                throw DomainError("extractor returned " + std::to_string(row.size()) + " values");
            if (failed.empty()) {
                fm.values.append_row(row);
                fm.labels.push_back(s.label);
                fm.sample_ids.push_back(s.id);
            }
        } catch (const DomainError& e) {
            if (failed.empty()) first_error = e.what();
            failed.push_back(s.id);
        }
    }
    if (!failed.empty()) {
        std::ostringstream msg;
        msg << "feature extraction failed for " << failed.size() << " sample(s):";
        for (const auto& id : failed) msg << ' ' << id;
        msg << " (first error: " << first_error << ')';
        throw FeatureExtractionError(msg.str(), std::move(failed));
    }
    return fm;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    for (const auto& name : fm.feature_names) out << name << ',';
    out << "label\n";
    for (std::size_t r = 0; r < fm.rows(); ++r) {
        for (double v : fm.values.row(r)) out << v << ',';
        out << fm.labels[r] << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    FeatureMatrix fm;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("feature CSV is empty", 1);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) fm.feature_names.push_back(cell);
    }
    if (fm.feature_names.empty() || fm.feature_names.back() != "label")
        throw ParseError("feature CSV header must end with 'label'", 1);
    fm.feature_names.pop_back();
    fm.values = Matrix(0, fm.feature_names.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ParseError("malformed feature value '" + cell + "'", line_no);
            }
        }
        if (row.size() != fm.feature_names.size() + 1) throw ParseError("wrong number of columns", line_no);
        fm.labels.push_back(static_cast<int>(row.back()));
        row.pop_back();
        fm.values.append_row(row);
        fm.sample_ids.push_back("row" + std::to_string(fm.rows()));
    }
    return fm;
}

} // namespace chatter
