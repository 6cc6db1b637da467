#include "chatter/wavelet.hpp"

#include <fstream>
#include <numeric>

#include "chatter/error.hpp"

namespace chatter {
namespace {

// Daubechies db10 scaling filter (sum = sqrt(2)). Cross-checked against a
// 50-digit spectral factorization of the Daubechies polynomial (scripts/db10_taps.py).
constexpr double kDb10[20] = {
    0.026670057900555553587,  0.18817680007769148902,   0.52720118893172558648,  0.68845903945360356574,
    0.28117234366057746075,   -0.24984642432731537942,  -0.1959462743773770435,  0.12736934033579326008,
    0.09305736460357235116,   -0.071394147166397087145, -0.029457536821875812858, 0.03321267405934100174,
    0.0036065535669561696554, -0.010733175483330575044, 0.0013953517470529011658, 0.0019924052951850561172,
    -0.00068585669495971162656, -0.00011646685512928545095, 0.000093588670320069591334,
    -0.000013264202894521244812,
};

void check_level(const PacketTree& tree, int level) {
    if (level < 1 || level > tree.level())
        throw DomainError("level " + std::to_string(level) + " not in tree (1.." + std::to_string(tree.level()) + ")");
}

void check_packet(int level, int packet_index) {
    if (packet_index < 1 || packet_index > (1 << level))
        throw DomainError("packet index " + std::to_string(packet_index) + " out of range for level " +
                          std::to_string(level));
}

// out[o] = sum_j f[j] * in[(2o + j) mod n]
std::vector<double> analyze(std::span<const double> in, std::span<const double> f) {
    const std::size_t n = in.size();
    std::vector<double> out(n / 2, 0.0);
    for (std::size_t o = 0; o < out.size(); ++o) {
        double acc = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) acc += f[j] * in[(2 * o + j) % n];
        out[o] = acc;
    }
    return out;
}

// Adjoint of analyze(), accumulated into `parent`.
void synthesize(std::span<const double> child, std::span<const double> f, std::span<double> parent) {
    const std::size_t n = parent.size();
    for (std::size_t o = 0; o < child.size(); ++o) {
        const double c = child[o];
        if (c == 0.0) continue;
        for (std::size_t j = 0; j < f.size(); ++j) parent[(2 * o + j) % n] += f[j] * c;
    }
}

TimeSeries trimmed(const PacketTree& tree, std::vector<double> extended) {
    TimeSeries ts;
    ts.sample_rate_hz = tree.sample_rate_hz();
    extended.resize(tree.original_length());
    ts.samples = std::move(extended);
    return ts;
}

} // namespace

std::vector<double> quadrature_mirror(std::span<const double> lowpass) {
    const std::size_t n = lowpass.size();
    std::vector<double> high(n);
    for (std::size_t k = 0; k < n; ++k) high[k] = ((k % 2 == 0) ? 1.0 : -1.0) * lowpass[n - 1 - k];
    return high;
}

const WaveletFilters& db10_filters() {
    static const WaveletFilters filters = [] {
        WaveletFilters f;
        f.name = "db10";
        f.lowpass.assign(std::begin(kDb10), std::end(kDb10));
        f.highpass = quadrature_mirror(f.lowpass);
        return f;
    }();
    return filters;
}

std::size_t natural_index_of(std::size_t frequency_slot) { return frequency_slot ^ (frequency_slot >> 1); }

std::size_t frequency_slot_of(std::size_t natural_index) {
    std::size_t slot = natural_index;
    for (std::size_t shift = natural_index >> 1; shift != 0; shift >>= 1) slot ^= shift;
    return slot;
}

PacketTree::PacketTree(std::vector<std::vector<std::vector<double>>> nodes, WaveletFilters filters,
                       double sample_rate_hz, std::size_t original_length, std::size_t extended_length)
    : nodes_(std::move(nodes)), filters_(std::move(filters)), sample_rate_hz_(sample_rate_hz),
      original_length_(original_length), extended_length_(extended_length) {}

std::span<const double> PacketTree::node(int level, std::size_t natural_index) const {
    check_level(*this, level);
    if (natural_index >= packet_count(level)) throw DomainError("node index out of range");
    return nodes_[static_cast<std::size_t>(level - 1)][natural_index];
}

std::span<const double> PacketTree::packet(int level, int packet_index) const {
    check_level(*this, level);
    check_packet(level, packet_index);
    return node(level, natural_index_of(static_cast<std::size_t>(packet_index - 1)));
}

double PacketTree::packet_energy(int level, int packet_index) const {
    auto c = packet(level, packet_index);
    // Coefficients cover the mirrored signal, which has twice the energy.
    return 0.5 * std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
}

PacketTree wpt_decompose(const TimeSeries& ts, int level, int max_level, const WaveletFilters& filters) {
    validate(ts);
    if (level < 1 || level > max_level)
        throw DomainError("WPT level must lie in 1.." + std::to_string(max_level));
    const std::size_t n = ts.samples.size();
    const std::size_t block = std::size_t{1} << level;
    if (n < block) throw DomainError("series too short for the requested WPT level");

    const std::size_t extended_length = (2 * n + block - 1) / block * block;
    std::vector<double> root(extended_length, 0.0);
    std::copy(ts.samples.begin(), ts.samples.end(), root.begin());
    std::copy(ts.samples.rbegin(), ts.samples.rend(), root.begin() + static_cast<std::ptrdiff_t>(n));

    std::vector<std::vector<std::vector<double>>> nodes;
    const std::vector<std::vector<double>>* parents = nullptr;
    std::vector<std::vector<double>> top{std::move(root)};
    parents = &top;
    for (int k = 1; k <= level; ++k) {
        std::vector<std::vector<double>> children;
        children.reserve(parents->size() * 2);
        for (const auto& p : *parents) {
            children.push_back(analyze(p, filters.lowpass));
            children.push_back(analyze(p, filters.highpass));
        }
        nodes.push_back(std::move(children));
        parents = &nodes.back();
    }
    return PacketTree(std::move(nodes), filters, ts.sample_rate_hz, n, extended_length);
}

TimeSeries reconstruct_packet(const PacketTree& tree, int level, int packet_index) {
    check_level(tree, level);
    check_packet(level, packet_index);
    const auto& f = tree.filters();
    std::size_t natural = natural_index_of(static_cast<std::size_t>(packet_index - 1));
    auto c = tree.node(level, natural);
    std::vector<double> current(c.begin(), c.end());
    for (int k = level; k >= 1; --k) {
        std::vector<double> parent(current.size() * 2, 0.0);
        synthesize(current, (natural % 2 == 0) ? f.lowpass : f.highpass, parent);
        current = std::move(parent);
        natural /= 2;
    }
    return trimmed(tree, std::move(current));
}

TimeSeries reconstruct_level(const PacketTree& tree, int level) {
    check_level(tree, level);
    const auto& f = tree.filters();
    std::vector<std::vector<double>> current;
    for (std::size_t i = 0; i < tree.packet_count(level); ++i) {
        auto c = tree.node(level, i);
        current.emplace_back(c.begin(), c.end());
    }
    while (current.size() > 1) {
        std::vector<std::vector<double>> parents;
        for (std::size_t i = 0; i < current.size(); i += 2) {
            std::vector<double> p(current[i].size() * 2, 0.0);
            synthesize(current[i], f.lowpass, p);
            synthesize(current[i + 1], f.highpass, p);
            parents.push_back(std::move(p));
        }
        current = std::move(parents);
    }
    return trimmed(tree, std::move(current.front()));
}

std::vector<double> energy_ratios(const PacketTree& tree, int level) {
    check_level(tree, level);
    const int count = 1 << level;
    std::vector<double> e(static_cast<std::size_t>(count));
    for (int j = 1; j <= count; ++j) e[static_cast<std::size_t>(j - 1)] = tree.packet_energy(level, j);
    const double total = std::accumulate(e.begin(), e.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("energy ratios undefined for an all-zero signal");
    for (double& v : e) v /= total;
    return e;
}

FrequencyBand packet_band(int level, int packet_index, double sample_rate_hz) {
    if (level < 1) throw DomainError("level must be positive");
    check_packet(level, packet_index);
    const double width = sample_rate_hz / static_cast<double>(std::size_t{1} << (level + 1));
    return {(packet_index - 1) * width, packet_index * width};
}

std::vector<int> predict_informative_packets(const FrequencyBand& band, int level, double sample_rate_hz) {
    if (level < 1) throw DomainError("level must be positive");
    if (!(band.low_hz >= 0.0 && band.low_hz < band.high_hz && band.high_hz <= sample_rate_hz / 2.0))
        throw DomainError("band must lie inside [0, Nyquist]");
    std::vector<int> out;
    for (int j = 1; j <= (1 << level); ++j)
        if (packet_band(level, j, sample_rate_hz).overlaps(band)) out.push_back(j);
    return out;
}

void write_packet_csv(const std::filesystem::path& path, const PacketTree& tree) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    for (int k = 1; k <= tree.level(); ++k) {
        for (int j = 1; j <= (1 << k); ++j) {
            out << k << ',' << j;
            for (double c : tree.packet(k, j)) out << ',' << c;
            out << '\n';
        }
    }
}

} // namespace chatter
