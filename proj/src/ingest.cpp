#include "chatter/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chatter/error.hpp"

namespace chatter {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

std::optional<double> to_double(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) return std::nullopt;
    return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

} // namespace

void validate(const TimeSeries& ts) {
    if (!(ts.sample_rate_hz > 0.0) || !std::isfinite(ts.sample_rate_hz))
        throw ValidationError("sample rate must be positive");
    if (ts.samples.empty()) throw ValidationError("time series is empty");
}

std::string_view to_string(Label label) {
    switch (label) {
    case Label::Stable: return "stable";
    case Label::MildChatter: return "mild";
    case Label::Chatter: return "chatter";
    case Label::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Label> parse_label(std::string_view text) {
    const auto key = lower(trim(text));
    if (key == "stable") return Label::Stable;
    if (key == "mild") return Label::MildChatter;
    if (key == "chatter") return Label::Chatter;
    if (key == "unknown") return Label::Unknown;
    return std::nullopt;
}

const std::vector<CuttingConfig>& reference_configs() {
    static const std::vector<CuttingConfig> configs = {
        {"2", {900.0, 1000.0}},
        {"2.5", {1200.0, 1300.0}},
        {"3.5", {1600.0, 1700.0}},
        {"4.5", {2900.0, 3000.0}},
    };
    return configs;
}

std::optional<CuttingConfig> find_reference_config(std::string_view stickout_id) {
    for (const auto& c : reference_configs())
        if (c.stickout_id == stickout_id) return c;
    return std::nullopt;
}

void validate(const CuttingConfig& config, double sample_rate_hz) {
    const auto& b = config.chatter_band_hz;
    if (!(b.low_hz > 0.0 && b.low_hz < b.high_hz && b.high_hz < sample_rate_hz / 2.0))
        throw ValidationError("chatter band of stickout " + config.stickout_id + " must satisfy 0 < low < high < Nyquist");
}

std::string SegmentSource::id() const {
    std::string id = file_id + "#" + std::to_string(interval_index);
    if (window_index) id += "/w" + std::to_string(*window_index);
    return id;
}

TimeSeries parse_timeseries(std::istream& in, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0)) throw DomainError("sample rate must be positive");
    TimeSeries ts;
    ts.sample_rate_hz = sample_rate_hz;
    std::vector<double> times;
    std::size_t columns = 0;
    std::size_t line_no = 0;
    bool seen_data = false;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty()) continue;
        auto fields = split_commas(text);
        std::vector<double> values;
        bool numeric = true;
        for (auto f : fields) {
            auto v = to_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (!numeric) {
            if (!seen_data && line_no == 1) continue; // header
            throw ParseError("malformed time-series row", line_no);
        }
        if (values.size() > 2) throw ParseError("expected one or two columns", line_no);
        if (!seen_data) columns = values.size();
        else if (values.size() != columns) throw ParseError("inconsistent column count", line_no);
        seen_data = true;
        if (columns == 2) {
            times.push_back(values[0]);
            ts.samples.push_back(values[1]);
        } else {
            ts.samples.push_back(values[0]);
        }
    }
    if (ts.samples.empty()) throw ValidationError("time series file holds no samples");
    if (columns == 2) {
        const double dt = 1.0 / sample_rate_hz;
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double delta = times[i] - times[i - 1];
            if (!(delta > 0.0)) throw ValidationError("time column is not increasing at sample " + std::to_string(i));
            if (std::abs(delta - dt) > 1e-6 * dt)
                throw ValidationError("time step at sample " + std::to_string(i) + " differs from 1/sample_rate");
        }
        ts.start_time_s = times.front();
    }
    return ts;
}

TimeSeries load_timeseries(const std::filesystem::path& path, double sample_rate_hz) {
    auto in = open_or_throw(path);
    return parse_timeseries(in, sample_rate_hz);
}

void write_timeseries(const std::filesystem::path& path, const TimeSeries& ts, bool with_time) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        if (with_time) out << ts.start_time_s + static_cast<double>(i) / ts.sample_rate_hz << ',';
        out << ts.samples[i] << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<LabelInterval> parse_labels(std::istream& in) {
    std::vector<LabelInterval> out;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty()) continue;
        auto fields = split_commas(text);
        if (fields.size() != 3) throw ParseError("label rows need start_s,end_s,label", line_no);
        auto start = to_double(fields[0]);
        auto end = to_double(fields[1]);
        if (!start || !end) {
            if (out.empty() && line_no == 1) continue; // header
            throw ParseError("malformed label times", line_no);
        }
        auto label = parse_label(fields[2]);
        if (!label) throw ParseError("unknown label '" + std::string(fields[2]) + "'", line_no);
        if (!(*start < *end)) throw ValidationError("label interval on line " + std::to_string(line_no) + " has start >= end");
        out.push_back({*start, *end, *label});
    }
    return out;
}

std::vector<LabelInterval> load_labels(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_labels(in);
}

std::optional<int> binary_class(Label label, const LabelPolicy& policy) {
    switch (label) {
    case Label::Stable: return 0;
    case Label::Chatter: return 1;
    case Label::MildChatter: return policy.mild_is_chatter ? std::optional<int>(1) : std::nullopt;
    case Label::Unknown: return std::nullopt;
    }
    return std::nullopt;
}

std::vector<Segment> cut_segments(const TimeSeries& ts, const std::vector<LabelInterval>& labels,
                                  const std::string& file_id, const LabelPolicy& policy) {
    validate(ts);
    const double tol = 0.5 / ts.sample_rate_hz;
    for (const auto& iv : labels) {
        if (!(iv.start_s < iv.end_s)) throw ValidationError("label interval has start >= end");
        if (iv.start_s < ts.start_time_s - tol || iv.end_s > ts.end_time_s() + tol)
            throw ValidationError("label interval lies outside the series' time span");
    }
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return labels[a].start_s < labels[b].start_s; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (labels[order[i]].start_s < labels[order[i - 1]].end_s)
            throw ValidationError("label intervals " + std::to_string(order[i - 1]) + " and " +
                                  std::to_string(order[i]) + " overlap");
    }

    const auto n = static_cast<long>(ts.samples.size());
    auto to_index = [&](double t) {
        return std::clamp(std::lround((t - ts.start_time_s) * ts.sample_rate_hz), 0L, n);
    };

    std::vector<Segment> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto cls = binary_class(labels[i].label, policy);
        if (!cls) continue;
        const long first = to_index(labels[i].start_s);
        const long last = to_index(labels[i].end_s);
        if (last <= first) continue;
        Segment seg;
        seg.series.sample_rate_hz = ts.sample_rate_hz;
        seg.series.start_time_s = ts.start_time_s + static_cast<double>(first) / ts.sample_rate_hz;
        seg.series.samples.assign(ts.samples.begin() + first, ts.samples.begin() + last);
        seg.label = *cls;
        seg.source = {file_id, i, std::nullopt};
        out.push_back(std::move(seg));
    }
    return out;
}

std::vector<Segment> window_segments(const std::vector<Segment>& segments, std::size_t window_len) {
    if (window_len < 2) throw DomainError("window length must be at least 2");
    std::vector<Segment> out;
    for (const auto& seg : segments) {
        const std::size_t count = seg.series.samples.size() / window_len;
        for (std::size_t w = 0; w < count; ++w) {
            Segment win;
            win.label = seg.label;
            win.source = seg.source;
            win.source.window_index = w;
            win.series.sample_rate_hz = seg.series.sample_rate_hz;
            win.series.start_time_s =
                seg.series.start_time_s + static_cast<double>(w * window_len) / seg.series.sample_rate_hz;
            auto first = seg.series.samples.begin() + static_cast<std::ptrdiff_t>(w * window_len);
            win.series.samples.assign(first, first + static_cast<std::ptrdiff_t>(window_len));
            out.push_back(std::move(win));
        }
    }
    return out;
}

std::optional<CuttingConfig> Manifest::config(std::string_view stickout_id) const {
    for (const auto& c : configs)
        if (c.stickout_id == stickout_id) return c;
    return std::nullopt;
}

namespace {

std::string stickout_string(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) {
        std::ostringstream os;
        os << j.get<double>();
        return os.str();
    }
    throw ValidationError("stickout_id must be a string or number");
}

} // namespace

Manifest load_manifest(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what(), 0);
    }
    const auto base = path.parent_path();
    Manifest manifest;
    manifest.configs = reference_configs();
    double default_rate = 10000.0;
    const nlohmann::json* records = &doc;
    if (doc.is_object()) {
        default_rate = doc.value("sample_rate_hz", default_rate);
        if (doc.contains("configs")) {
            for (const auto& c : doc.at("configs")) {
                CuttingConfig cfg;
                cfg.stickout_id = stickout_string(c.at("stickout_id"));
                const auto& band = c.at("chatter_band_hz");
                cfg.chatter_band_hz = {band.at(0).get<double>(), band.at(1).get<double>()};
                auto it = std::find_if(manifest.configs.begin(), manifest.configs.end(),
                                       [&](const auto& x) { return x.stickout_id == cfg.stickout_id; });
                if (it != manifest.configs.end()) *it = cfg;
                else manifest.configs.push_back(cfg);
            }
        }
        if (!doc.contains("records")) throw ValidationError("manifest object needs a 'records' list");
        records = &doc.at("records");
    }
    if (!records->is_array()) throw ValidationError("manifest records must be a list");
    for (const auto& r : *records) {
        ManifestEntry e;
        auto resolve = [&](const std::string& p) {
            std::filesystem::path fp(p);
            return fp.is_absolute() ? fp : base / fp;
        };
        e.signal_path = resolve(r.at("signal_path").get<std::string>());
        e.label_path = resolve(r.at("label_path").get<std::string>());
        e.stickout_id = stickout_string(r.at("stickout_id"));
        e.rpm = r.value("rpm", 0.0);
        e.doc = r.value("doc", 0.0);
        e.sample_rate_hz = r.value("sample_rate_hz", default_rate);
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    nlohmann::json doc;
    doc["configs"] = nlohmann::json::array();
    for (const auto& c : manifest.configs)
        doc["configs"].push_back({{"stickout_id", c.stickout_id},
                                  {"chatter_band_hz", {c.chatter_band_hz.low_hz, c.chatter_band_hz.high_hz}}});
    doc["records"] = nlohmann::json::array();
    const auto base = path.parent_path();
    for (const auto& e : manifest.entries) {
        auto rel = [&](const std::filesystem::path& p) {
            auto r = base.empty() ? p : p.lexically_relative(base);
            return (r.empty() ? p : r).generic_string();
        };
        doc["records"].push_back({{"signal_path", rel(e.signal_path)},
                                  {"label_path", rel(e.label_path)},
                                  {"stickout_id", e.stickout_id},
                                  {"rpm", e.rpm},
                                  {"doc", e.doc},
                                  {"sample_rate_hz", e.sample_rate_hz}});
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

} // namespace chatter
