#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chatter/ingest.hpp"
#include "chatter/types.hpp"

namespace chatter {

// Orthogonal two-channel filter pair. highpass[k] = (-1)^k lowpass[L-1-k].
struct WaveletFilters {
    std::string name;
    std::vector<double> lowpass;
    std::vector<double> highpass;

    std::size_t taps() const { return lowpass.size(); }
};

// Quadrature-mirror partner of an orthogonal scaling filter.
std::vector<double> quadrature_mirror(std::span<const double> lowpass);

// Daubechies, 10 vanishing moments, 20 taps.
const WaveletFilters& db10_filters();

inline constexpr int kDefaultMaxLevel = 4;

// Full wavelet packet tree. Every level 1..level() is kept. Public indexing is
// 1-based and frequency ordered: packet 1 of level k covers [0, Fs/2^(k+1)].
//
// The signal is extended half-point symmetrically by periodizing [x, reverse(x)]
// (zero-padded to a multiple of 2^level). The periodized transform of that
// sequence is orthonormal, so reconstruction is exact and coefficient energy is
// exactly twice the input energy; packet_energy() reports the halved value.
class PacketTree {
public:
    PacketTree(std::vector<std::vector<std::vector<double>>> nodes, WaveletFilters filters,
               double sample_rate_hz, std::size_t original_length, std::size_t extended_length);

    int level() const { return static_cast<int>(nodes_.size()); }
    double sample_rate_hz() const { return sample_rate_hz_; }
    std::size_t original_length() const { return original_length_; }
    std::size_t extended_length() const { return extended_length_; }
    const WaveletFilters& filters() const { return filters_; }

    std::size_t packet_count(int level) const { return std::size_t{1} << level; }

    // Coefficients of packet `packet_index` (1-based, frequency order).
    std::span<const double> packet(int level, int packet_index) const;
    // Same, by natural filter-bank position (0-based; bit i from the top = high-pass at level i+1).
    std::span<const double> node(int level, std::size_t natural_index) const;

    double packet_energy(int level, int packet_index) const;

private:
    std::vector<std::vector<std::vector<double>>> nodes_; // [level-1][natural]
    WaveletFilters filters_;
    double sample_rate_hz_;
    std::size_t original_length_;
    std::size_t extended_length_;
};

// Natural filter-bank position of the packet holding frequency slot `frequency_slot`
// (0-based). Gray code: the high-pass branch reverses the spectrum of its subtree.
std::size_t natural_index_of(std::size_t frequency_slot);
std::size_t frequency_slot_of(std::size_t natural_index);

PacketTree wpt_decompose(const TimeSeries& ts, int level, int max_level = kDefaultMaxLevel,
                         const WaveletFilters& filters = db10_filters());

// Time-domain signal (original length) carrying only the given packet's content.
TimeSeries reconstruct_packet(const PacketTree& tree, int level, int packet_index);

// Inverse of the whole level (all packets kept).
TimeSeries reconstruct_level(const PacketTree& tree, int level);

// E_j / sum_i E_i for the 2^level packets in frequency order.
std::vector<double> energy_ratios(const PacketTree& tree, int level);

FrequencyBand packet_band(int level, int packet_index, double sample_rate_hz);

// Packets whose nominal band overlaps `band` with nonzero measure (1-based).
std::vector<int> predict_informative_packets(const FrequencyBand& band, int level, double sample_rate_hz);

// Debug dump: one row per packet, `level,packet_index,coefficients...`.
void write_packet_csv(const std::filesystem::path& path, const PacketTree& tree);

} // namespace chatter
