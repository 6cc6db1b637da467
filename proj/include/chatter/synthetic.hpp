#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chatter/harness.hpp"

namespace chatter {

// Turning-vibration look-alike: stable spans carry spindle harmonics, a 120 Hz
// line and broadband noise; chatter spans add a strong tone inside the
// configuration's chatter band (mild chatter: weaker tone, same amplitude
// envelope as stable); unknown spans carry decaying impacts.
struct SyntheticCorpusParams {
    std::vector<std::string> stickouts = {"2"};
    int recordings_per_config = 4;
    // spans per recording, cycled stable, chatter, unknown, stable, mild...
    int spans_per_recording = 5;
    double span_s = 0.3;
    double sample_rate_hz = 10000.0;
    double noise_std = 0.05;
    double chatter_amplitude = 1.0;
    double mild_amplitude = 0.4;
    std::uint64_t seed = 1;
};

Corpus make_synthetic_corpus(const SyntheticCorpusParams& params);

// Writes <id>.csv / <id>.labels.csv per recording and manifest.json; returns the manifest path.
std::filesystem::path write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

} // namespace chatter
