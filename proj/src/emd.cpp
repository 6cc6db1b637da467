#include "chatter/emd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "chatter/error.hpp"
#include "chatter/random.hpp"

namespace chatter {

Extrema find_extrema(std::span<const double> x) {
    Extrema e;
    const std::size_t n = x.size();
    if (n < 3) return e;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (x[i] == x[i - 1]) continue;
        const bool rising = x[i] > x[i - 1];
        std::size_t j = i;
        while (j + 1 < n && x[j + 1] == x[i]) ++j;
        if (j + 1 < n) {
            if (rising && x[j + 1] < x[i]) e.maxima.push_back((i + j) / 2);
            else if (!rising && x[j + 1] > x[i]) e.minima.push_back((i + j) / 2);
        }
        i = j;
    }
    return e;
}

std::size_t count_zero_crossings(std::span<const double> x) {
    std::size_t crossings = 0;
    int last_sign = 0;
    for (double v : x) {
        const int sign = (v > 0.0) - (v < 0.0);
        if (sign == 0) continue;
        if (last_sign != 0 && sign != last_sign) ++crossings;
        last_sign = sign;
    }
    return crossings;
}

bool satisfies_imf_count_condition(std::span<const double> x) {
    const auto extrema = static_cast<long>(find_extrema(x).count());
    const auto crossings = static_cast<long>(count_zero_crossings(x));
    return std::abs(extrema - crossings) <= 1;
}

std::vector<double> natural_cubic_spline(std::span<const double> knots, std::span<const double> values,
                                         std::size_t n) {
    const std::size_t m = knots.size();
    if (m < 2 || values.size() != m) throw DomainError("spline needs at least two knots");
    // Second derivatives at the knots; natural ends (zero curvature).
    std::vector<double> second(m, 0.0);
    if (m > 2) {
        std::vector<double> diag(m - 2), upper(m - 2), rhs(m - 2);
        for (std::size_t i = 1; i + 1 < m; ++i) {
            const double h0 = knots[i] - knots[i - 1];
            const double h1 = knots[i + 1] - knots[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
        }
        // Thomas algorithm; the lower diagonal at row r is h0 of that row.
        for (std::size_t r = 1; r < diag.size(); ++r) {
            const double lower = knots[r + 1] - knots[r];
            const double w = lower / diag[r - 1];
            diag[r] -= w * upper[r - 1];
            rhs[r] -= w * rhs[r - 1];
        }
        for (std::size_t r = diag.size(); r-- > 0;) {
            double v = rhs[r];
            if (r + 1 < diag.size()) v -= upper[r] * second[r + 2];
            second[r + 1] = v / diag[r];
        }
    }
    std::vector<double> out(n);
    std::size_t seg = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double x = static_cast<double>(t);
        while (seg + 2 < m && x > knots[seg + 1]) ++seg;
        const double h = knots[seg + 1] - knots[seg];
        const double a = (knots[seg + 1] - x) / h;
        const double b = (x - knots[seg]) / h;
        out[t] = a * values[seg] + b * values[seg + 1] +
                 ((a * a * a - a) * second[seg] + (b * b * b - b) * second[seg + 1]) * h * h / 6.0;
    }
    return out;
}

namespace {

std::vector<double> envelope(std::span<const double> x, const std::vector<std::size_t>& idx) {
    const std::size_t n = x.size();
    const double last = static_cast<double>(n - 1);
    std::vector<double> knots, values;
    knots.reserve(idx.size() + 4);
    values.reserve(idx.size() + 4);
    for (std::size_t k = 2; k-- > 0;) {
        knots.push_back(-static_cast<double>(idx[k]));
        values.push_back(x[idx[k]]);
    }
    for (auto i : idx) {
        knots.push_back(static_cast<double>(i));
        values.push_back(x[i]);
    }
    for (std::size_t k = 0; k < 2; ++k) {
        const auto i = idx[idx.size() - 1 - k];
        knots.push_back(2.0 * last - static_cast<double>(i));
        values.push_back(x[i]);
    }
    return natural_cubic_spline(knots, values, n);
}

double sum_squares(std::span<const double> x) { return std::inner_product(x.begin(), x.end(), x.begin(), 0.0); }

} // namespace

std::optional<std::vector<double>> envelope_mean(std::span<const double> x) {
    const auto e = find_extrema(x);
    if (e.maxima.size() < 2 || e.minima.size() < 2) return std::nullopt;
    auto upper = envelope(x, e.maxima);
    const auto lower = envelope(x, e.minima);
    for (std::size_t i = 0; i < upper.size(); ++i) upper[i] = 0.5 * (upper[i] + lower[i]);
    return upper;
}

SiftResult sift_imf(std::span<const double> residue, const SiftParams& params) {
    SiftResult result;
    const auto e = find_extrema(residue);
    if (e.maxima.size() < 2 || e.minima.size() < 2) {
        result.is_monotonic = true;
        return result;
    }
    std::vector<double> h(residue.begin(), residue.end());
    for (int sweep = 1; sweep <= params.max_sweeps; ++sweep) {
        auto mean = envelope_mean(h);
        if (!mean) break;
        const double prev_energy = sum_squares(h);
        double diff_energy = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            diff_energy += (*mean)[i] * (*mean)[i];
            h[i] -= (*mean)[i];
        }
        result.sweeps = sweep;
        const double sd = prev_energy > 0.0 ? diff_energy / prev_energy : 0.0;
        if (sd < params.sd_threshold && satisfies_imf_count_condition(h)) break;
    }
    result.imf = std::move(h);
    return result;
}

ImfSet emd(std::span<const double> x, int max_imfs, const SiftParams& params) {
    if (x.size() < 4) throw DomainError("EMD needs at least 4 samples");
    ImfSet out;
    out.residue.assign(x.begin(), x.end());
    auto energy_of = [](const std::vector<double>& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); };
    const double floor = params.residue_rms_fraction * params.residue_rms_fraction * energy_of(out.residue);
    while (static_cast<int>(out.imfs.size()) < max_imfs) {
        if (!out.imfs.empty() && energy_of(out.residue) < floor) break;
        auto s = sift_imf(out.residue, params);
        if (s.is_monotonic) break;
        for (std::size_t i = 0; i < out.residue.size(); ++i) out.residue[i] -= s.imf[i];
        out.imfs.push_back(std::move(s.imf));
    }
    return out;
}

void validate(const EemdParams& params) {
    if (params.ensemble_size < 1) throw DomainError("ensemble size must be positive");
    if (!(params.noise_std_fraction > 0.0 && params.noise_std_fraction <= 0.2))
        throw DomainError("noise fraction must lie in (0, 0.2]");
    if (params.max_imfs < 1) throw DomainError("max_imfs must be positive");
    if (params.workers < 1) throw DomainError("workers must be positive");
}

ImfSet eemd(std::span<const double> x, const EemdParams& params) {
    validate(params);
    if (x.size() < 4) throw DomainError("EEMD needs at least 4 samples");
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / (n - 1.0)); // sample std
    if (!(sigma > 0.0)) return emd(x, params.max_imfs, params.sift);

    const double noise_scale = params.noise_std_fraction * sigma;
    const auto members = static_cast<std::size_t>(params.ensemble_size);
    std::vector<ImfSet> results(members);

    auto run_member = [&](std::size_t e) {
        auto rng = make_rng(params.master_seed, e);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> noisy(x.begin(), x.end());
        for (double& v : noisy) v += noise_scale * gauss(rng);
        results[e] = emd(noisy, params.max_imfs, params.sift);
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(params.workers), members);
    if (workers <= 1) {
        for (std::size_t e = 0; e < members; ++e) run_member(e);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t e = next++; e < members; e = next++) run_member(e);
            });
    }

    std::size_t count = 0;
    for (const auto& r : results) count = std::max(count, r.imfs.size());
    ImfSet out;
    out.imfs.assign(count, std::vector<double>(x.size(), 0.0));
    out.residue.assign(x.size(), 0.0);
    // Fixed member order keeps the floating-point sums schedule independent.
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.imfs.size(); ++i)
            for (std::size_t t = 0; t < x.size(); ++t) out.imfs[i][t] += r.imfs[i][t];
        for (std::size_t t = 0; t < x.size(); ++t) out.residue[t] += r.residue[t];
    }
    const double inv = 1.0 / static_cast<double>(members);
    for (auto& imf : out.imfs)
        for (double& v : imf) v *= inv;
    for (double& v : out.residue) v *= inv;
    return out;
}

void write_imf_csv(const std::filesystem::path& path, const ImfSet& imfs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < imfs.imfs.size(); ++i) out << "imf" << i + 1 << ',';
    out << "residue\n";
    for (std::size_t t = 0; t < imfs.length(); ++t) {
        for (const auto& imf : imfs.imfs) out << imf[t] << ',';
        out << imfs.residue[t] << '\n';
    }
}

} // namespace chatter
