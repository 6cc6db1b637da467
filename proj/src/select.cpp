#include "chatter/select.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "chatter/error.hpp"
#include "chatter/features.hpp"

namespace chatter {
namespace {

// Indices whose label is chatter, or every index when none is.
std::vector<std::size_t> chatter_members(std::size_t n, std::span<const int> labels) {
    if (labels.size() != n) throw DomainError("labels must align with the training decompositions");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (labels[i] == 1) out.push_back(i);
    if (out.empty())
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
}

} // namespace

PacketChoice select_informative_packet(std::span<const PacketTree> trees, std::span<const int> labels, int level,
                                       const CuttingConfig& config) {
    if (trees.empty()) throw DomainError("packet selection needs training trees");
    const double fs = trees.front().sample_rate_hz();
    const auto band = config.chatter_band_hz;
    if (!(band.low_hz < fs / 2.0)) throw DomainError("chatter band lies above Nyquist");
    const FrequencyBand clipped{band.low_hz, std::min(band.high_hz, fs / 2.0)};
    const auto candidates = predict_informative_packets(clipped, level, fs);
    if (candidates.empty()) throw DomainError("no packet overlaps the chatter band");

    const auto members = chatter_members(trees.size(), labels);
    std::vector<double> mean(std::size_t{1} << level, 0.0);
    for (auto i : members) {
        const auto r = energy_ratios(trees[i], level);
        for (std::size_t j = 0; j < r.size(); ++j) mean[j] += r[j];
    }
    for (double& v : mean) v /= static_cast<double>(members.size());

    PacketChoice choice;
    choice.level = level;
    choice.packet_index = candidates.front();
    for (int j : candidates)
        if (mean[static_cast<std::size_t>(j - 1)] > mean[static_cast<std::size_t>(choice.packet_index - 1)])
            choice.packet_index = j;
    choice.mean_energy_ratio = mean[static_cast<std::size_t>(choice.packet_index - 1)];
    choice.band = packet_band(level, choice.packet_index, fs);
    choice.mean_energy_ratios = std::move(mean);
    return choice;
}

ImfChoice select_informative_imf(std::span<const ImfSet> sets, std::span<const int> labels,
                                 const CuttingConfig& config, double sample_rate_hz) {
    if (sets.empty()) throw DomainError("IMF selection needs training decompositions");
    const auto members = chatter_members(sets.size(), labels);
    std::size_t count = 0;
    for (const auto& s : sets) {
        if (s.size() == 0) throw DomainError("every decomposition needs at least one IMF");
        count = std::max(count, s.size());
    }
    // Sets with fewer IMFs contribute zero for the missing indices.
    std::vector<double> scores(count, 0.0);
    for (auto m : members) {
        const auto& s = sets[m];
        for (std::size_t i = 0; i < s.size(); ++i)
            scores[i] += band_energy_fraction(s.imfs[i], sample_rate_hz, config.chatter_band_hz);
    }
    for (double& v : scores) v /= static_cast<double>(members.size());

    ImfChoice choice;
    std::size_t best = 0;
    for (std::size_t i = 1; i < count; ++i)
        if (scores[i] > scores[best]) best = i;
    choice.imf_index = static_cast<int>(best + 1);
    choice.band_overlap_score = scores[best];
    choice.scores = std::move(scores);
    return choice;
}

void write_selection_report(const std::filesystem::path& path, const SelectionReport& report) {
    nlohmann::json j = {
        {"stickout_id", report.stickout_id},
        {"level", report.level},
        {"packet_index", report.packet_index},
        {"imf_index", report.imf_index},
        {"mean_energy_ratios", report.mean_energy_ratios},
        {"band", {{"low_hz", report.band.low_hz}, {"high_hz", report.band.high_hz}}},
    };
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace chatter
