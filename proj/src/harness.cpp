#include "chatter/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "chatter/error.hpp"
#include "chatter/select.hpp"

namespace chatter {

std::string_view to_string(Method method) { return method == Method::Wpt ? "wpt" : "eemd"; }

std::optional<Method> parse_method(std::string_view text) {
    if (text == "wpt") return Method::Wpt;
    if (text == "eemd") return Method::Eemd;
    return std::nullopt;
}

std::string_view to_string(ExperimentMode mode) {
    switch (mode) {
    case ExperimentMode::Within: return "within";
    case ExperimentMode::Transfer: return "transfer";
    case ExperimentMode::TransferCombined: return "transfer-combined";
    }
    return "within";
}

std::optional<ExperimentMode> parse_mode(std::string_view text) {
    if (text == "within") return ExperimentMode::Within;
    if (text == "transfer") return ExperimentMode::Transfer;
    if (text == "transfer-combined") return ExperimentMode::TransferCombined;
    return std::nullopt;
}

const CuttingConfig& Corpus::config(std::string_view stickout_id) const {
    for (const auto& c : configs)
        if (c.stickout_id == stickout_id) return c;
    throw DomainError("no cutting configuration for stickout " + std::string(stickout_id));
}

Corpus load_corpus(const Manifest& manifest) {
    Corpus corpus;
    corpus.configs = manifest.configs;
    std::map<std::string, int> stem_count;
    for (const auto& e : manifest.entries) ++stem_count[e.signal_path.stem().string()];
    std::set<std::string> ids;
    for (const auto& e : manifest.entries) {
        Recording rec;
        const auto stem = e.signal_path.stem().string();
        rec.id = stem_count[stem] > 1 ? e.signal_path.generic_string() : stem;
        if (!ids.insert(rec.id).second) throw ValidationError("recording listed twice: " + rec.id);
        rec.series = load_timeseries(e.signal_path, e.sample_rate_hz);
        rec.labels = load_labels(e.label_path);
        rec.stickout_id = e.stickout_id;
        rec.rpm = e.rpm;
        rec.doc = e.doc;
        validate(corpus.config(rec.stickout_id), e.sample_rate_hz);
        corpus.recordings.push_back(std::move(rec));
    }
    return corpus;
}

ExperimentSpec ExperimentSpec::within(Method method, std::string stickout, ml::ClassifierKind kind, int level) {
    ExperimentSpec spec;
    spec.mode = ExperimentMode::Within;
    spec.method = method;
    spec.level = level;
    spec.classifier.kind = kind;
    spec.train_configs = {stickout};
    spec.test_configs = {std::move(stickout)};
    return spec;
}

ExperimentSpec ExperimentSpec::transfer(Method method, std::vector<std::string> train, std::vector<std::string> test,
                                        ml::ClassifierKind kind, int level) {
    ExperimentSpec spec;
    spec.mode = train.size() == 2 ? ExperimentMode::TransferCombined : ExperimentMode::Transfer;
    spec.method = method;
    spec.level = level;
    spec.classifier.kind = kind;
    spec.train_configs = std::move(train);
    spec.test_configs = std::move(test);
    spec.train_fraction = 0.70;
    spec.test_fraction = 0.70;
    return spec;
}

void validate(const ExperimentSpec& spec) {
    auto in_unit = [](double f) { return f > 0.0 && f <= 1.0; };
    if (!in_unit(spec.train_fraction) || !in_unit(spec.test_fraction))
        throw DomainError("split fractions must lie in (0, 1]");
    if (spec.n_realizations < 1) throw DomainError("at least one realization is required");
    if (spec.method == Method::Wpt && (spec.level < 1 || spec.level > spec.max_level))
        throw DomainError("WPT level must lie in 1.." + std::to_string(spec.max_level));
    if (spec.method == Method::Eemd) {
        validate(spec.eemd);
        if (spec.window_len < 2) throw DomainError("window length must be at least 2");
    }
    const auto& tr = spec.train_configs;
    const auto& te = spec.test_configs;
    switch (spec.mode) {
    case ExperimentMode::Within:
        if (tr.size() != 1 || (!te.empty() && (te.size() != 1 || te[0] != tr[0])))
            throw DomainError("within-configuration mode needs one configuration used for train and test");
        if (spec.train_fraction + spec.test_fraction > 1.0 + 1e-9)
            throw DomainError("within-configuration fractions must not exceed 1 in total");
        break;
    case ExperimentMode::Transfer:
        if (tr.size() != 1 || te.size() != 1) throw DomainError("transfer mode needs one train and one test configuration");
        if (tr[0] == te[0]) throw DomainError("transfer mode needs distinct train and test configurations");
        break;
    case ExperimentMode::TransferCombined: {
        if (tr.size() != 2 || te.size() != 2)
            throw DomainError("combined transfer needs two train and two test configurations");
        std::set<std::string> all(tr.begin(), tr.end());
        all.insert(te.begin(), te.end());
        if (all.size() != 4) throw DomainError("combined transfer needs four distinct configurations");
        break;
    }
    }
}

const ReportRow& ExperimentReport::best_row() const {
    if (rows.empty()) throw DomainError("report has no rows");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].test.mean > rows[best].test.mean) best = i;
    return rows[best];
}

namespace {

AccuracySummary summarize(const std::vector<double>& v) {
    AccuracySummary s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(v.size()));
    return s;
}

} // namespace

std::vector<ReportRow> aggregate(const std::vector<RealizationRecord>& realizations) {
    if (realizations.empty()) return {};
    const std::size_t d = realizations.front().test_accuracy.size();
    std::vector<ReportRow> rows;
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<double> test, train;
        for (const auto& r : realizations) {
            if (r.test_accuracy.size() != d || r.train_accuracy.size() != d)
                throw DomainError("realizations disagree on the feature count");
            test.push_back(r.test_accuracy[k]);
            train.push_back(r.train_accuracy[k]);
        }
        rows.push_back({k + 1, summarize(test), summarize(train)});
    }
    return rows;
}

namespace {

// Units of a split: single samples, or whole groups when grouped.
struct Unit {
    std::string key;
    int label = 0;
    std::vector<std::size_t> members;
};

std::vector<Unit> split_units(const std::vector<Sample>& pool, bool grouped) {
    std::vector<Unit> units;
    if (!grouped) {
        for (std::size_t i = 0; i < pool.size(); ++i) units.push_back({pool[i].id, pool[i].label, {i}});
    } else {
        std::map<std::string, std::size_t> at;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto& g = pool[i].group.empty() ? pool[i].id : pool[i].group;
            auto [it, fresh] = at.emplace(g, units.size());
            if (fresh) units.push_back({g, pool[i].label, {}});
            auto& u = units[it->second];
            if (u.label != pool[i].label) throw ValidationError("group " + g + " mixes labels");
            u.members.push_back(i);
        }
    }
    // Keyed by stable ids so the manifest row order cannot matter.
    std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.key < b.key; });
    return units;
}

std::size_t rounded_count(double fraction, std::size_t n) {
    return std::min(n, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
}

} // namespace

SplitIndices stratified_split(const std::vector<Sample>& pool, double train_fraction, double test_fraction,
                              std::uint64_t seed, bool grouped) {
    const auto units = split_units(pool, grouped);
    SplitIndices split;
    for (int c = 0; c <= 1; ++c) {
        std::vector<std::size_t> of_class;
        for (std::size_t u = 0; u < units.size(); ++u)
            if (units[u].label == c) of_class.push_back(u);
        auto rng = make_rng(seed, static_cast<std::uint64_t>(c));
        std::shuffle(of_class.begin(), of_class.end(), rng);
        const std::size_t n_train = rounded_count(train_fraction, of_class.size());
        const std::size_t n_test = std::min(rounded_count(test_fraction, of_class.size()), of_class.size() - n_train);
        for (std::size_t i = 0; i < n_train + n_test; ++i) {
            auto& side = i < n_train ? split.train : split.test;
            const auto& m = units[of_class[i]].members;
            side.insert(side.end(), m.begin(), m.end());
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<std::size_t> stratified_subsample(const std::vector<Sample>& pool, double fraction, std::uint64_t seed,
                                              bool grouped) {
    return stratified_split(pool, fraction, 0.0, seed, grouped).train;
}

struct ExperimentRunner::Cache {
    std::unordered_map<std::string, PacketTree> trees;
    std::unordered_map<std::string, ImfSet> imfs;
    std::unordered_map<std::string, std::vector<double>> features;
};

ExperimentRunner::ExperimentRunner(Corpus corpus) : corpus_(std::move(corpus)), cache_(std::make_unique<Cache>()) {}
ExperimentRunner::~ExperimentRunner() = default;
ExperimentRunner::ExperimentRunner(ExperimentRunner&&) noexcept = default;
ExperimentRunner& ExperimentRunner::operator=(ExperimentRunner&&) noexcept = default;

std::vector<Sample> ExperimentRunner::samples(const std::string& stickout_id, Method method, std::size_t window_len,
                                              const LabelPolicy& policy) const {
    std::vector<Sample> out;
    bool found = false;
    for (const auto& rec : corpus_.recordings) {
        if (rec.stickout_id != stickout_id) continue;
        found = true;
        auto segments = cut_segments(rec.series, rec.labels, rec.id, policy);
        if (method == Method::Eemd) segments = window_segments(segments, window_len);
        for (auto& seg : segments) {
            SegmentSource parent = seg.source;
            parent.window_index.reset();
            out.push_back({seg.source.id(), parent.id(), stickout_id, seg.label, std::move(seg.series.samples),
                           seg.series.sample_rate_hz});
        }
    }
    if (!found) throw DomainError("no recordings for stickout " + stickout_id);
    std::sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
    return out;
}

const PacketTree& ExperimentRunner::packet_tree(const Sample& sample, int level, int max_level) {
    const auto key = sample.id + "|" + std::to_string(level) + "|" + std::to_string(max_level);
    auto it = cache_->trees.find(key);
    if (it == cache_->trees.end()) {
        TimeSeries ts{sample.signal, sample.sample_rate_hz, 0.0};
        it = cache_->trees.emplace(key, wpt_decompose(ts, level, max_level)).first;
    }
    return it->second;
}

const ImfSet& ExperimentRunner::imf_set(const Sample& sample, const EemdParams& params) {
    const auto key = sample.id + "|" + std::to_string(params.ensemble_size) + "|" +
                     std::to_string(params.noise_std_fraction) + "|" + std::to_string(params.max_imfs) + "|" +
                     std::to_string(params.master_seed);
    auto it = cache_->imfs.find(key);
    if (it == cache_->imfs.end()) {
        EemdParams p = params;
        p.master_seed = params.master_seed ^ fnv1a(sample.id);
        it = cache_->imfs.emplace(key, eemd(sample.signal, p)).first;
    }
    return it->second;
}

ExperimentReport ExperimentRunner::run(const ExperimentSpec& spec) {
    switch (spec.mode) {
    case ExperimentMode::Within: return run_within(spec);
    case ExperimentMode::Transfer: return run_transfer(spec);
    case ExperimentMode::TransferCombined: return run_transfer_combined(spec);
    }
    throw DomainError("unknown experiment mode");
}

ExperimentReport ExperimentRunner::run_within(const ExperimentSpec& spec) {
    if (spec.mode != ExperimentMode::Within) throw DomainError("spec is not in within-configuration mode");
    validate(spec);
    const auto pool = samples(spec.train_configs[0], spec.method, spec.window_len, spec.label_policy);
    return run_realizations(spec, pool, pool, corpus_.config(spec.train_configs[0]));
}

ExperimentReport ExperimentRunner::run_transfer(const ExperimentSpec& spec) {
    if (spec.mode != ExperimentMode::Transfer) throw DomainError("spec is not in transfer mode");
    validate(spec);
    const auto train = samples(spec.train_configs[0], spec.method, spec.window_len, spec.label_policy);
    const auto test = samples(spec.test_configs[0], spec.method, spec.window_len, spec.label_policy);
    return run_realizations(spec, train, test, corpus_.config(spec.train_configs[0]));
}

ExperimentReport ExperimentRunner::run_transfer_combined(const ExperimentSpec& spec) {
    if (spec.mode != ExperimentMode::TransferCombined) throw DomainError("spec is not in combined transfer mode");
    validate(spec);
    auto pool_of = [&](const std::vector<std::string>& ids) {
        std::vector<Sample> pool;
        for (const auto& id : ids) {
            auto part = samples(id, spec.method, spec.window_len, spec.label_policy);
            pool.insert(pool.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
        std::sort(pool.begin(), pool.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
        return pool;
    };
    const auto train = pool_of(spec.train_configs);
    const auto test = pool_of(spec.test_configs);
    // Selection follows the first training configuration's chatter band.
    return run_realizations(spec, train, test, corpus_.config(spec.train_configs[0]));
}

namespace {

bool has_both_classes(const std::vector<Sample>& pool, const std::vector<std::size_t>& idx) {
    bool zero = false, one = false;
    for (auto i : idx) (pool[i].label == 1 ? one : zero) = true;
    return zero && one;
}

constexpr int kMaxSplitAttempts = 100;

} // namespace

ExperimentReport ExperimentRunner::run_realizations(const ExperimentSpec& spec, const std::vector<Sample>& train_pool,
                                                    const std::vector<Sample>& test_pool,
                                                    const CuttingConfig& selection_config) {
    const bool within = spec.mode == ExperimentMode::Within;
    const bool wpt = spec.method == Method::Wpt;

    ExperimentReport report;
    report.mode = to_string(spec.mode);
    report.method = to_string(spec.method);
    report.level = wpt ? spec.level : 0;
    report.classifier = ml::to_string(spec.classifier.kind);
    report.train_configs = spec.train_configs;
    report.test_configs = within ? spec.train_configs : spec.test_configs;
    report.n_realizations = spec.n_realizations;
    report.train_fraction = spec.train_fraction;
    report.test_fraction = spec.test_fraction;
    report.master_seed = spec.master_seed;
    if (wpt) report.feature_names.assign(kWptFeatureNames.begin(), kWptFeatureNames.end());
    else report.feature_names.assign(kEemdFeatureNames.begin(), kEemdFeatureNames.end());

    for (int r = 0; r < spec.n_realizations; ++r) {
        const std::uint64_t base_seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(r));
        std::uint64_t seed = base_seed;
        std::vector<std::size_t> train_idx, test_idx;
        for (int attempt = 0;; ++attempt) {
            if (attempt == kMaxSplitAttempts)
                throw DomainError("could not draw a training split holding both classes in realization " +
                                  std::to_string(r));
            seed = attempt == 0 ? base_seed : derive_seed(base_seed, static_cast<std::uint64_t>(attempt));
            if (within) {
                auto split = stratified_split(train_pool, spec.train_fraction, spec.test_fraction, seed,
                                              spec.grouped_split);
                train_idx = std::move(split.train);
                test_idx = std::move(split.test);
            } else {
                train_idx = stratified_subsample(train_pool, spec.train_fraction, derive_seed(seed, 0),
                                                 spec.grouped_split);
                test_idx = stratified_subsample(test_pool, spec.test_fraction, derive_seed(seed, 1),
                                                spec.grouped_split);
            }
            if (has_both_classes(train_pool, train_idx) && !test_idx.empty()) break;
        }

        std::vector<int> y_train, y_test;
        for (auto i : train_idx) y_train.push_back(train_pool[i].label);
        for (auto i : test_idx) y_test.push_back(test_pool[i].label);

        RealizationRecord rec;
        rec.index = r;
        rec.seed = seed;
        rec.n_train = train_idx.size();
        rec.n_test = test_idx.size();

        // Selection sees training samples only.
        RealizationTrace trace;
        trace.realization = r;
        for (auto i : train_idx) trace.selection_ids.push_back(train_pool[i].id);
        trace.train_ids = trace.selection_ids;
        for (auto i : test_idx) trace.test_ids.push_back(test_pool[i].id);

        std::function<std::vector<double>(const Sample&)> featurize;
        if (wpt) {
            std::vector<PacketTree> trees;
            for (auto i : train_idx) trees.push_back(packet_tree(train_pool[i], spec.level, spec.max_level));
            const auto choice = select_informative_packet(trees, y_train, spec.level, selection_config);
            rec.packet_index = choice.packet_index;
            featurize = [&, packet = choice.packet_index](const Sample& s) {
                const auto key = s.id + "|wpt|" + std::to_string(spec.level) + "|" + std::to_string(packet);
                auto it = cache_->features.find(key);
                if (it != cache_->features.end()) return it->second;
                const auto& tree = packet_tree(s, spec.level, spec.max_level);
                const auto part = reconstruct_packet(tree, spec.level, packet);
                const auto f = wpt_features(part.samples, s.sample_rate_hz);
                std::vector<double> v(f.values.begin(), f.values.end());
                cache_->features.emplace(key, v);
                return v;
            };
        } else {
            std::vector<ImfSet> sets;
            for (auto i : train_idx) sets.push_back(imf_set(train_pool[i], spec.eemd));
            const double fs = train_pool[train_idx.front()].sample_rate_hz;
            const auto choice = select_informative_imf(sets, y_train, selection_config, fs);
            rec.imf_index = choice.imf_index;
            featurize = [&, imf = choice.imf_index](const Sample& s) {
                const auto key = s.id + "|eemd|" + std::to_string(spec.eemd.master_seed) + "|" +
                                 std::to_string(spec.eemd.ensemble_size) + "|" + std::to_string(imf);
                auto it = cache_->features.find(key);
                if (it != cache_->features.end()) return it->second;
                const auto& set = imf_set(s, spec.eemd);
                std::vector<double> v(kEemdFeatureCount, 0.0);
                // A decomposition without this IMF (or with a silent one) contributes a zero row.
                const bool present = imf <= static_cast<int>(set.size()) &&
                                     std::any_of(set.imfs[static_cast<std::size_t>(imf - 1)].begin(),
                                                 set.imfs[static_cast<std::size_t>(imf - 1)].end(),
                                                 [](double c) { return c != 0.0; });
                if (present) {
                    const auto f = eemd_features(set, imf);
                    v.assign(f.values.begin(), f.values.end());
                }
                cache_->features.emplace(key, v);
                return v;
            };
        }

        const std::size_t d = report.feature_names.size();
        Matrix x_train(0, d), x_test(0, d);
        for (auto i : train_idx) x_train.append_row(featurize(train_pool[i]));
        for (auto i : test_idx) x_test.append_row(featurize(test_pool[i]));
        if (trace_hook_) trace_hook_(trace);

        auto config = spec.classifier;
        config.forest.seed = derive_seed(seed, 101);
        config.boosting.seed = derive_seed(seed, 102);
        const auto ranking = ml::rfe_rank(x_train, y_train, config);
        rec.ranking = ranking.order;
        for (const auto& acc : ml::nested_feature_accuracies(x_train, y_train, x_test, y_test, ranking, config)) {
            rec.test_accuracy.push_back(acc.test_accuracy);
            rec.train_accuracy.push_back(acc.train_accuracy);
        }
        report.realizations.push_back(std::move(rec));
    }
    report.rows = aggregate(report.realizations);
    return report;
}

ExperimentReport run_within(const Corpus& corpus, const ExperimentSpec& spec) {
    return ExperimentRunner(corpus).run_within(spec);
}

ExperimentReport run_transfer(const Corpus& corpus, const ExperimentSpec& spec) {
    return ExperimentRunner(corpus).run_transfer(spec);
}

ExperimentReport run_transfer_combined(const Corpus& corpus, const ExperimentSpec& spec) {
    return ExperimentRunner(corpus).run_transfer_combined(spec);
}

} // namespace chatter
