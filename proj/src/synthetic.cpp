#include "chatter/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "chatter/error.hpp"

namespace chatter {

namespace {

constexpr Label kSpanCycle[] = {Label::Stable, Label::Chatter, Label::Unknown, Label::Stable, Label::MildChatter};

} // namespace

Corpus make_synthetic_corpus(const SyntheticCorpusParams& params) {
    if (params.recordings_per_config < 1 || params.spans_per_recording < 1 || !(params.span_s > 0.0) ||
        !(params.sample_rate_hz > 0.0) || params.noise_std < 0.0)
        throw DomainError("invalid synthetic corpus parameters");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double fs = params.sample_rate_hz;
    const auto span_len = static_cast<std::size_t>(std::llround(params.span_s * fs));

    Corpus corpus;
    for (std::size_t s = 0; s < params.stickouts.size(); ++s) {
        const auto config = find_reference_config(params.stickouts[s]);
        if (!config) throw DomainError("no reference chatter band for stickout " + params.stickouts[s]);
        validate(*config, fs);
        corpus.configs.push_back(*config);
        const auto& band = config->chatter_band_hz;

        for (int r = 0; r < params.recordings_per_config; ++r) {
            auto rng = make_rng(params.seed, s * 1000 + static_cast<std::uint64_t>(r));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::normal_distribution<double> noise(0.0, params.noise_std);

            Recording rec;
            rec.id = "syn_" + config->stickout_id + "_" + std::to_string(r);
            rec.stickout_id = config->stickout_id;
            rec.rpm = 570.0 + 60.0 * unit(rng);
            rec.doc = 0.005 + 0.005 * unit(rng);
            rec.series.sample_rate_hz = fs;
            const double spindle_hz = rec.rpm / 60.0;
            const std::size_t n = span_len * static_cast<std::size_t>(params.spans_per_recording);
            auto& x = rec.series.samples;
            x.resize(n);

            double harmonic_phase[8];
            for (double& p : harmonic_phase) p = two_pi * unit(rng);
            const double line_phase = two_pi * unit(rng);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / fs;
                double v = 0.2 * std::sin(two_pi * 120.0 * t + line_phase);
                for (int k = 1; k <= 8; ++k)
                    v += 0.5 / k * std::sin(two_pi * spindle_hz * k * t + harmonic_phase[k - 1]);
                x[i] = v + noise(rng);
            }

            for (int span = 0; span < params.spans_per_recording; ++span) {
                const Label label = kSpanCycle[span % 5];
                const std::size_t begin = span_len * static_cast<std::size_t>(span);
                const double t0 = static_cast<double>(begin) / fs;
                rec.labels.push_back({t0, t0 + params.span_s, label});
                if (label == Label::Chatter || label == Label::MildChatter) {
                    const double amp = label == Label::Chatter ? params.chatter_amplitude : params.mild_amplitude;
                    const double f = band.low_hz + band.width() * (0.3 + 0.4 * unit(rng));
                    const double phase = two_pi * unit(rng);
                    const double wobble = 2.0 + 3.0 * unit(rng);
                    for (std::size_t i = 0; i < span_len; ++i) {
                        const double t = static_cast<double>(i) / fs;
                        x[begin + i] += amp * (1.0 + 0.1 * std::sin(two_pi * wobble * t)) * std::sin(two_pi * f * t + phase);
                    }
                } else if (label == Label::Unknown) {
                    const auto period = static_cast<std::size_t>(0.05 * fs);
                    for (std::size_t start = 0; start < span_len; start += period) {
                        for (std::size_t i = start; i < std::min(span_len, start + period); ++i) {
                            const double t = static_cast<double>(i - start) / fs;
                            x[begin + i] += 1.5 * std::exp(-t * 200.0) * std::sin(two_pi * 2000.0 * t);
                        }
                    }
                }
            }
            corpus.recordings.push_back(std::move(rec));
        }
    }
    return corpus;
}

std::filesystem::path write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    Manifest manifest;
    manifest.configs = corpus.configs;
    for (const auto& rec : corpus.recordings) {
        ManifestEntry e;
        e.signal_path = dir / (rec.id + ".csv");
        e.label_path = dir / (rec.id + ".labels.csv");
        e.stickout_id = rec.stickout_id;
        e.rpm = rec.rpm;
        e.doc = rec.doc;
        e.sample_rate_hz = rec.series.sample_rate_hz;
        write_timeseries(e.signal_path, rec.series, false);
        std::ofstream labels(e.label_path);
        if (!labels) throw IoError("cannot write " + e.label_path.string());
        labels.precision(17);
        labels << "start_s,end_s,label\n";
        for (const auto& iv : rec.labels) labels << iv.start_s << ',' << iv.end_s << ',' << to_string(iv.label) << '\n';
        if (!labels) throw IoError("write failed for " + e.label_path.string());
        manifest.entries.push_back(std::move(e));
    }
    const auto path = dir / "manifest.json";
    write_manifest(path, manifest);
    return path;
}

} // namespace chatter
