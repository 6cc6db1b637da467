#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chatter/emd.hpp"
#include "chatter/features.hpp"
#include "chatter/ingest.hpp"
#include "chatter/ml/classifier.hpp"
#include "chatter/ml/rfe.hpp"
#include "chatter/random.hpp"
#include "chatter/wavelet.hpp"

namespace chatter {

enum class Method { Wpt, Eemd };
enum class ExperimentMode { Within, Transfer, TransferCombined };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view text);
std::string_view to_string(ExperimentMode mode);
std::optional<ExperimentMode> parse_mode(std::string_view text);

struct Recording {
    std::string id;
    TimeSeries series;
    std::vector<LabelInterval> labels;
    std::string stickout_id;
    double rpm = 0.0;
    double doc = 0.0;
};

struct Corpus {
    std::vector<Recording> recordings;
    std::vector<CuttingConfig> configs;

    const CuttingConfig& config(std::string_view stickout_id) const;
};

Corpus load_corpus(const Manifest& manifest);

struct ExperimentSpec {
    ExperimentMode mode = ExperimentMode::Within;
    Method method = Method::Wpt;
    int level = 1;
    int max_level = kDefaultMaxLevel;
    ml::ClassifierConfig classifier;
    std::vector<std::string> train_configs;
    std::vector<std::string> test_configs;
    int n_realizations = 10;
    double train_fraction = 0.67;
    double test_fraction = 0.33;
    std::uint64_t master_seed = 0;
    std::size_t window_len = 1000;
    EemdParams eemd;
    LabelPolicy label_policy;
    // keep all windows of one labeled segment on the same side of a split
    bool grouped_split = false;

    static ExperimentSpec within(Method method, std::string stickout, ml::ClassifierKind kind, int level = 1);
    static ExperimentSpec transfer(Method method, std::vector<std::string> train, std::vector<std::string> test,
                                   ml::ClassifierKind kind, int level = 1);
};

// Throws DomainError on mode misuse (see run_* preconditions).
void validate(const ExperimentSpec& spec);

// One classification sample: a labeled segment (WPT) or window (EEMD).
struct Sample {
    std::string id;
    std::string group; // parent segment id
    std::string stickout_id;
    int label = 0;
    std::vector<double> signal;
    double sample_rate_hz = 0.0;
};

struct AccuracySummary {
    double mean = 0.0;
    double std_dev = 0.0; // population
    bool operator==(const AccuracySummary&) const = default;
};

struct ReportRow {
    std::size_t k = 0;
    AccuracySummary test;
    AccuracySummary train;
    bool operator==(const ReportRow&) const = default;
};

struct RealizationRecord {
    int index = 0;
    std::uint64_t seed = 0;
    int packet_index = 0; // WPT
    int imf_index = 0;    // EEMD
    std::vector<std::size_t> ranking;
    std::vector<double> test_accuracy;  // by k-1
    std::vector<double> train_accuracy; // by k-1
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    bool operator==(const RealizationRecord&) const = default;
};

struct ExperimentReport {
    std::string mode;
    std::string method;
    int level = 0;
    std::string classifier;
    std::vector<std::string> train_configs;
    std::vector<std::string> test_configs;
    int n_realizations = 0;
    double train_fraction = 0.0;
    double test_fraction = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<std::string> feature_names;
    std::vector<ReportRow> rows;
    std::vector<RealizationRecord> realizations;

    // Row with the highest mean test accuracy (first on ties).
    const ReportRow& best_row() const;
    bool operator==(const ExperimentReport&) const = default;
};

// Mean and population std of per-realization accuracies, by k.
std::vector<ReportRow> aggregate(const std::vector<RealizationRecord>& realizations);

// Ids handed to the selection and training steps of one realization.
struct RealizationTrace {
    int realization = 0;
    std::vector<std::string> selection_ids;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

// Runs experiments over one corpus, caching decompositions and features by
// sample id so that repeated runs (other classifiers, levels) reuse them.
class ExperimentRunner {
public:
    explicit ExperimentRunner(Corpus corpus);
    ~ExperimentRunner();
    ExperimentRunner(ExperimentRunner&&) noexcept;
    ExperimentRunner& operator=(ExperimentRunner&&) noexcept;

    const Corpus& corpus() const { return corpus_; }

    // Samples of one configuration sorted by id.
    std::vector<Sample> samples(const std::string& stickout_id, Method method, std::size_t window_len,
                                const LabelPolicy& policy = {}) const;

    ExperimentReport run(const ExperimentSpec& spec);
    ExperimentReport run_within(const ExperimentSpec& spec);
    ExperimentReport run_transfer(const ExperimentSpec& spec);
    ExperimentReport run_transfer_combined(const ExperimentSpec& spec);

    void set_trace_hook(std::function<void(const RealizationTrace&)> hook) { trace_hook_ = std::move(hook); }

    const PacketTree& packet_tree(const Sample& sample, int level, int max_level);
    const ImfSet& imf_set(const Sample& sample, const EemdParams& params);

private:
    struct Cache;

    ExperimentReport run_realizations(const ExperimentSpec& spec, const std::vector<Sample>& train_pool,
                                      const std::vector<Sample>& test_pool, const CuttingConfig& selection_config);

    Corpus corpus_;
    std::unique_ptr<Cache> cache_;
    std::function<void(const RealizationTrace&)> trace_hook_;
};

ExperimentReport run_within(const Corpus& corpus, const ExperimentSpec& spec);
ExperimentReport run_transfer(const Corpus& corpus, const ExperimentSpec& spec);
ExperimentReport run_transfer_combined(const Corpus& corpus, const ExperimentSpec& spec);

// Stratified split: per class, shuffle, the first round(train_fraction * n_c)
// go to train and the next round(test_fraction * n_c) (capped at what is left)
// to test. With `grouped`, whole groups are assigned instead of samples.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

SplitIndices stratified_split(const std::vector<Sample>& pool, double train_fraction, double test_fraction,
                              std::uint64_t seed, bool grouped);

// Stratified subsample of round(fraction*n_c) per class.
std::vector<std::size_t> stratified_subsample(const std::vector<Sample>& pool, double fraction, std::uint64_t seed,
                                              bool grouped);

} // namespace chatter
