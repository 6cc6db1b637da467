#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chatter/emd.hpp"
#include "chatter/ingest.hpp"
#include "chatter/wavelet.hpp"

namespace chatter {

struct PacketChoice {
    int level = 0;
    int packet_index = 0;
    double mean_energy_ratio = 0.0;
    FrequencyBand band;
    std::vector<double> mean_energy_ratios; // all packets of the level, frequency order
};

struct ImfChoice {
    int imf_index = 0;
    double band_overlap_score = 0.0;
    std::vector<double> scores; // per IMF index, 1-based position i at scores[i-1]
};

// Among packets overlapping the chatter band, the one with the highest energy
// ratio averaged over chatter-labeled (label 1) trees; ties go to the lower
// index. Falls back to all trees when none is labeled chatter.
PacketChoice select_informative_packet(std::span<const PacketTree> trees, std::span<const int> labels,
                                       int level, const CuttingConfig& config);

// IMF index maximizing the mean in-band share of its spectral energy over
// chatter-labeled sets (same fallback and tie rule as above).
ImfChoice select_informative_imf(std::span<const ImfSet> sets, std::span<const int> labels,
                                 const CuttingConfig& config, double sample_rate_hz);

struct SelectionReport {
    std::string stickout_id;
    int level = 0;
    int packet_index = 0;
    int imf_index = 0;
    std::vector<double> mean_energy_ratios;
    FrequencyBand band;
};

void write_selection_report(const std::filesystem::path& path, const SelectionReport& report);

} // namespace chatter
