#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chatter/types.hpp"

namespace chatter {

// Uniformly sampled acceleration record.
struct TimeSeries {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;
    double start_time_s = 0.0;

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
    double end_time_s() const { return start_time_s + duration_s(); }
};

// Throws ValidationError unless rate > 0 and samples nonempty.
void validate(const TimeSeries& ts);

enum class Label { Stable, MildChatter, Chatter, Unknown };

std::string_view to_string(Label label);
// Accepts stable|mild|chatter|unknown, case-insensitive.
std::optional<Label> parse_label(std::string_view text);

struct LabelInterval {
    double start_s = 0.0;
    double end_s = 0.0;
    Label label = Label::Unknown;
};

// One stickout configuration and the band its chatter lives in.
struct CuttingConfig {
    std::string stickout_id;
    FrequencyBand chatter_band_hz;
};

// Bands for the four stickout lengths of the reference turning experiment,
// keyed by stickout in inches ("2", "2.5", "3.5", "4.5").
const std::vector<CuttingConfig>& reference_configs();
std::optional<CuttingConfig> find_reference_config(std::string_view stickout_id);

// Throws ValidationError unless 0 < low < high < Nyquist.
void validate(const CuttingConfig& config, double sample_rate_hz);

struct SegmentSource {
    std::string file_id;
    std::size_t interval_index = 0;
    std::optional<std::size_t> window_index;

    std::string id() const;
};

struct Segment {
    TimeSeries series;
    int label = 0; // 0 = chatter-free, 1 = chatter
    SegmentSource source;
};

// Time-series CSV: optional header, one column (acceleration) or two columns
// (time_s, acceleration). Two-column input must be uniformly spaced at
// 1/sample_rate_hz (1e-6 relative).
TimeSeries parse_timeseries(std::istream& in, double sample_rate_hz);
TimeSeries load_timeseries(const std::filesystem::path& path, double sample_rate_hz);
void write_timeseries(const std::filesystem::path& path, const TimeSeries& ts, bool with_time = true);

// Label CSV: start_s,end_s,label with optional header.
std::vector<LabelInterval> parse_labels(std::istream& in);
std::vector<LabelInterval> load_labels(const std::filesystem::path& path);

struct LabelPolicy {
    // Mild chatter joins the chatter class; when false mild intervals are dropped.
    bool mild_is_chatter = true;
};

std::optional<int> binary_class(Label label, const LabelPolicy& policy = {});

// One segment per non-Unknown interval, in interval order.
std::vector<Segment> cut_segments(const TimeSeries& ts, const std::vector<LabelInterval>& labels,
                                  const std::string& file_id = "", const LabelPolicy& policy = {});

// Non-overlapping windows of exactly window_len samples; remainders are dropped.
std::vector<Segment> window_segments(const std::vector<Segment>& segments, std::size_t window_len);

struct ManifestEntry {
    std::filesystem::path signal_path;
    std::filesystem::path label_path;
    std::string stickout_id;
    double rpm = 0.0;
    double doc = 0.0;
    double sample_rate_hz = 10000.0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    std::vector<CuttingConfig> configs;

    std::optional<CuttingConfig> config(std::string_view stickout_id) const;
};

// Either a JSON list of records or an object {"records": [...], "configs": [...],
// "sample_rate_hz": ...}. Relative paths resolve against the manifest's directory.
// Configs default to reference_configs().
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

} // namespace chatter
