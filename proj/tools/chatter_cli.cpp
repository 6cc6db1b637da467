// Command-line front end: preprocessing, decomposition, selection, features,
// training and the experiment protocols over a dataset manifest.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chatter/error.hpp"
#include "chatter/filter.hpp"
#include "chatter/harness.hpp"
#include "chatter/report.hpp"
#include "chatter/select.hpp"
#include "chatter/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chatter;

namespace {

struct Options {
    std::string config_file;
    std::string manifest;
    std::string out = "out";
    std::string method = "wpt";
    int level = 1;
    int max_level = kDefaultMaxLevel;
    std::string classifier = "svm";
    std::uint64_t seed = 0;
    std::vector<std::string> stickouts;
    int realizations = 10;
    std::size_t window = 1000;
    int ensemble = 200;
    double noise = 0.2;
    int workers = 1;
    bool grouped_split = false;
    bool drop_mild = false;
    std::optional<double> train_fraction;
    std::optional<double> test_fraction;
    // preprocess
    double cutoff_hz = 10000.0;
    double target_rate_hz = 10000.0;
    int filter_order = 100;
    // train / report
    std::string features_path;
    std::vector<std::string> inputs;
    std::string format = "text";
    // evaluate-transfer
    std::vector<std::string> train_configs;
    std::vector<std::string> test_configs;
    // generate-synthetic
    int recordings = 4;
};

// Exit codes of the error record.
enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kIo = 4, kDomain = 5 };

int fail(std::string_view kind, const std::string& message, int code) {
    json record = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    std::cerr << record.dump() << '\n';
    return code;
}

std::string safe_name(std::string s) {
    for (char& c : s)
        if (c == '#' || c == '/' || c == '\\' || c == ' ' || c == ':') c = '_';
    return s;
}

Method method_of(const Options& o) {
    auto m = parse_method(o.method);
    if (!m) throw DomainError("unknown method '" + o.method + "' (expected wpt or eemd)");
    return *m;
}

ml::ClassifierKind classifier_of(const Options& o) {
    auto k = ml::parse_classifier(o.classifier);
    if (!k) throw DomainError("unknown classifier '" + o.classifier + "' (expected svm, logreg, forest or boost)");
    return *k;
}

Corpus corpus_of(const Options& o) {
    if (o.manifest.empty()) throw DomainError("--manifest is required");
    return load_corpus(load_manifest(o.manifest));
}

// Requested stickouts, or every configuration that has recordings.
std::vector<std::string> stickouts_of(const Options& o, const Corpus& corpus) {
    if (!o.stickouts.empty()) return o.stickouts;
    std::vector<std::string> ids;
    for (const auto& r : corpus.recordings)
        if (std::find(ids.begin(), ids.end(), r.stickout_id) == ids.end()) ids.push_back(r.stickout_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

EemdParams eemd_of(const Options& o) {
    EemdParams p;
    p.ensemble_size = o.ensemble;
    p.noise_std_fraction = o.noise;
    p.master_seed = o.seed;
    p.workers = o.workers;
    validate(p);
    return p;
}

void fill_spec(ExperimentSpec& spec, const Options& o) {
    spec.max_level = o.max_level;
    spec.n_realizations = o.realizations;
    spec.master_seed = o.seed;
    spec.window_len = o.window;
    spec.eemd = eemd_of(o);
    spec.grouped_split = o.grouped_split;
    spec.label_policy.mild_is_chatter = !o.drop_mild;
    if (o.train_fraction) spec.train_fraction = *o.train_fraction;
    if (o.test_fraction) spec.test_fraction = *o.test_fraction;
}

fs::path prepare_out(const Options& o) {
    fs::path out(o.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    return out;
}

std::vector<Sample> samples_of(ExperimentRunner& runner, const Options& o, const std::string& stickout) {
    LabelPolicy policy;
    policy.mild_is_chatter = !o.drop_mild;
    return runner.samples(stickout, method_of(o), o.window, policy);
}

struct Selection {
    int packet_index = 0;
    int imf_index = 0;
    SelectionReport report;
};

// Selection over all samples of one configuration.
Selection select_for(ExperimentRunner& runner, const Options& o, const std::string& stickout,
                     const std::vector<Sample>& samples) {
    if (samples.empty()) throw DomainError("no labeled samples for stickout " + stickout);
    const auto& config = runner.corpus().config(stickout);
    std::vector<int> labels;
    for (const auto& s : samples) labels.push_back(s.label);
    Selection sel;
    sel.report.stickout_id = stickout;
    sel.report.band = config.chatter_band_hz;
    if (method_of(o) == Method::Wpt) {
        std::vector<PacketTree> trees;
        for (const auto& s : samples) trees.push_back(runner.packet_tree(s, o.level, o.max_level));
        const auto choice = select_informative_packet(trees, labels, o.level, config);
        sel.packet_index = choice.packet_index;
        sel.report.level = o.level;
        sel.report.packet_index = choice.packet_index;
        sel.report.mean_energy_ratios = choice.mean_energy_ratios;
    } else {
        const auto params = eemd_of(o);
        std::vector<ImfSet> sets;
        for (const auto& s : samples) sets.push_back(runner.imf_set(s, params));
        const auto choice = select_informative_imf(sets, labels, config, samples.front().sample_rate_hz);
        sel.imf_index = choice.imf_index;
        sel.report.imf_index = choice.imf_index;
        sel.report.mean_energy_ratios = choice.scores;
    }
    return sel;
}

FeatureMatrix features_for(ExperimentRunner& runner, const Options& o, const std::vector<Sample>& samples,
                           const Selection& sel) {
    FeatureMatrix fm;
    const bool wpt = method_of(o) == Method::Wpt;
    if (wpt) fm.feature_names.assign(kWptFeatureNames.begin(), kWptFeatureNames.end());
    else fm.feature_names.assign(kEemdFeatureNames.begin(), kEemdFeatureNames.end());
    fm.values = Matrix(0, fm.feature_names.size());
    const auto params = eemd_of(o);
    for (const auto& s : samples) {
        std::vector<double> row;
        if (wpt) {
            const auto part = reconstruct_packet(runner.packet_tree(s, o.level, o.max_level), o.level, sel.packet_index);
            const auto f = wpt_features(part.samples, s.sample_rate_hz);
            row.assign(f.values.begin(), f.values.end());
        } else {
            const auto& set = runner.imf_set(s, params);
            if (sel.imf_index > static_cast<int>(set.size())) {
                row.assign(kEemdFeatureCount, 0.0);
            } else {
                const auto f = eemd_features(set, sel.imf_index);
                row.assign(f.values.begin(), f.values.end());
            }
        }
        fm.sample_ids.push_back(s.id);
        fm.labels.push_back(s.label);
        fm.values.append_row(row);
    }
    return fm;
}

std::string run_tag(const Options& o) {
    std::string tag = o.method;
    if (o.method == "wpt") tag += "_L" + std::to_string(o.level);
    return tag + "_" + o.classifier;
}

int cmd_preprocess(const Options& o) {
    if (o.manifest.empty()) throw DomainError("--manifest is required");
    auto manifest = load_manifest(o.manifest);
    const auto out = prepare_out(o);
    Manifest result = manifest;
    for (auto& e : result.entries) {
        const auto ts = load_timeseries(e.signal_path, e.sample_rate_hz);
        // Recordings already at the target rate pass through untouched.
        const bool at_target = ts.sample_rate_hz == o.target_rate_hz;
        const auto filter = at_target ? FilterCascade{} : design_lowpass(o.filter_order, o.cutoff_hz, ts.sample_rate_hz);
        const auto down = filter_and_downsample(ts, filter, o.target_rate_hz);
        const auto target = out / (e.signal_path.stem().string() + ".csv");
        write_timeseries(target, down, false);
        e.signal_path = fs::absolute(target);
        e.label_path = fs::absolute(e.label_path);
        e.sample_rate_hz = o.target_rate_hz;
        std::cout << target.string() << ": " << ts.size() << " -> " << down.size() << " samples\n";
    }
    write_manifest(out / "manifest.json", result);
    std::cout << "manifest: " << (out / "manifest.json").string() << '\n';
    return kOk;
}

int cmd_decompose(const Options& o) {
    ExperimentRunner runner(corpus_of(o));
    const auto out = prepare_out(o);
    const auto params = eemd_of(o);
    std::size_t written = 0;
    for (const auto& stickout : stickouts_of(o, runner.corpus())) {
        for (const auto& s : samples_of(runner, o, stickout)) {
            if (method_of(o) == Method::Wpt) {
                write_packet_csv(out / (safe_name(s.id) + ".packets.csv"), runner.packet_tree(s, o.level, o.max_level));
            } else {
                write_imf_csv(out / (safe_name(s.id) + ".imfs.csv"), runner.imf_set(s, params));
            }
            ++written;
        }
    }
    std::cout << written << " decompositions written to " << out.string() << '\n';
    return kOk;
}

int cmd_select(const Options& o) {
    ExperimentRunner runner(corpus_of(o));
    const auto out = prepare_out(o);
    for (const auto& stickout : stickouts_of(o, runner.corpus())) {
        const auto samples = samples_of(runner, o, stickout);
        const auto sel = select_for(runner, o, stickout, samples);
        const auto path = out / ("selection_" + safe_name(stickout) + "_" + o.method + ".json");
        write_selection_report(path, sel.report);
        if (method_of(o) == Method::Wpt)
            std::cout << "stickout " << stickout << ": level " << o.level << " packet " << sel.packet_index << '\n';
        else
            std::cout << "stickout " << stickout << ": IMF " << sel.imf_index << '\n';
    }
    return kOk;
}

int cmd_features(const Options& o) {
    ExperimentRunner runner(corpus_of(o));
    const auto out = prepare_out(o);
    for (const auto& stickout : stickouts_of(o, runner.corpus())) {
        const auto samples = samples_of(runner, o, stickout);
        const auto sel = select_for(runner, o, stickout, samples);
        const auto fm = features_for(runner, o, samples, sel);
        const auto path = out / ("features_" + safe_name(stickout) + "_" + o.method + ".csv");
        write_feature_csv(path, fm);
        std::cout << path.string() << ": " << fm.rows() << " samples x " << fm.cols() << " features\n";
    }
    return kOk;
}

int cmd_train(const Options& o) {
    FeatureMatrix fm;
    if (!o.features_path.empty()) {
        fm = read_feature_csv(o.features_path);
    } else {
        ExperimentRunner runner(corpus_of(o));
        const auto ids = stickouts_of(o, runner.corpus());
        if (ids.size() != 1) throw DomainError("train needs --features or exactly one --stickout");
        const auto samples = samples_of(runner, o, ids[0]);
        fm = features_for(runner, o, samples, select_for(runner, o, ids[0], samples));
    }
    ml::ClassifierConfig config;
    config.kind = classifier_of(o);
    config.forest.seed = o.seed;
    config.boosting.seed = o.seed;
    const auto model = ml::fit_classifier(config, fm.values, fm.labels);
    const auto ranking = ml::rfe_rank(fm.values, fm.labels, config);
    const auto out = prepare_out(o);
    auto j = model.to_json();
    j["feature_names"] = fm.feature_names;
    std::vector<std::string> ranked;
    for (auto c : ranking.order) ranked.push_back(fm.feature_names[c]);
    j["rfe_ranking"] = ranked;
    const auto path = out / ("model_" + o.classifier + ".json");
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << j.dump(2) << '\n';
    std::cout << path.string() << ": training accuracy " << model.accuracy(fm.values, fm.labels) << '\n';
    return kOk;
}

void print_best(const ExperimentReport& r, const fs::path& dir) {
    const auto& best = r.best_row();
    std::cout << dir.string() << ": best k=" << best.k << " test " << best.test.mean << " +/- " << best.test.std_dev
              << '\n';
}

int cmd_within(const Options& o) {
    ExperimentRunner runner(corpus_of(o));
    const auto out = prepare_out(o);
    for (const auto& stickout : stickouts_of(o, runner.corpus())) {
        auto spec = ExperimentSpec::within(method_of(o), stickout, classifier_of(o), o.level);
        fill_spec(spec, o);
        const auto report = runner.run_within(spec);
        const auto dir = out / ("within_" + safe_name(stickout) + "_" + run_tag(o));
        emit_report_bundle(report, dir);
        print_best(report, dir);
    }
    return kOk;
}

int cmd_transfer(const Options& o) {
    if (o.train_configs.empty() || o.test_configs.empty()) throw DomainError("--train and --test are required");
    ExperimentRunner runner(corpus_of(o));
    const auto out = prepare_out(o);
    auto spec = ExperimentSpec::transfer(method_of(o), o.train_configs, o.test_configs, classifier_of(o), o.level);
    fill_spec(spec, o);
    const auto report = runner.run(spec);
    std::string name = "transfer";
    for (const auto& id : o.train_configs) name += "_" + safe_name(id);
    name += "_to";
    for (const auto& id : o.test_configs) name += "_" + safe_name(id);
    const auto dir = out / (name + "_" + run_tag(o));
    emit_report_bundle(report, dir);
    print_best(report, dir);
    return kOk;
}

int cmd_report(const Options& o) {
    if (o.inputs.empty()) throw DomainError("--input is required");
    std::string bars = "method,classifier,level,k,mean,std\n";
    for (const auto& in : o.inputs) {
        fs::path path(in);
        if (fs::is_directory(path)) path /= "report.json";
        const auto report = load_report(path);
        if (o.format == "text") std::cout << format_text_table(report) << '\n';
        else if (o.format == "csv") std::cout << format_csv(report);
        else if (o.format == "json") std::cout << to_json(report).dump(2) << '\n';
        else if (o.format == "bars") {
            const auto b = format_bar_data(report);
            bars += b.substr(b.find('\n') + 1);
        } else throw DomainError("unknown format '" + o.format + "' (text, csv, json or bars)");
    }
    if (o.format == "bars") std::cout << bars;
    return kOk;
}

int cmd_synthetic(const Options& o) {
    SyntheticCorpusParams p;
    if (!o.stickouts.empty()) p.stickouts = o.stickouts;
    p.recordings_per_config = o.recordings;
    p.seed = o.seed;
    const auto path = write_corpus(make_synthetic_corpus(p), prepare_out(o));
    std::cout << "manifest: " << path.string() << '\n';
    return kOk;
}

// Flags supplied by a JSON config file: top-level keys apply to every
// subcommand, an object under the subcommand's name overrides them. Anything
// given on the command line wins.
std::vector<std::string> config_file_args(const fs::path& path, const std::string& subcommand,
                                          const std::vector<std::string>& given) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config file is not valid JSON: ") + e.what(), 0);
    }
    if (!doc.is_object()) throw ValidationError("config file must hold a JSON object");
    std::map<std::string, json> merged;
    for (auto& [k, v] : doc.items())
        if (!v.is_object()) merged[k] = v;
    if (doc.contains(subcommand) && doc[subcommand].is_object())
        for (auto& [k, v] : doc[subcommand].items()) merged[k] = v;

    auto on_command_line = [&](const std::string& flag) {
        return std::any_of(given.begin(), given.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    auto scalar = [](const json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    std::vector<std::string> args;
    for (const auto& [key, value] : merged) {
        const std::string flag = "--" + key;
        if (key == "config" || on_command_line(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& item : value) {
                args.push_back(flag);
                args.push_back(scalar(item));
            }
        } else {
            args.push_back(flag);
            args.push_back(scalar(value));
        }
    }
    return args;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Chatter detection in turning vibration signals"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", o.config_file, "JSON file supplying any flag; command-line flags take precedence");
    app.add_option("--manifest", o.manifest, "dataset manifest (JSON)");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--method", o.method, "wpt or eemd")->check(CLI::IsMember({"wpt", "eemd"}));
    app.add_option("--level", o.level, "WPT level")->check(CLI::Range(1, 10));
    app.add_option("--max-level", o.max_level, "deepest WPT level the packet lengths are padded for");
    app.add_option("--classifier", o.classifier, "svm, logreg, forest or boost")
        ->check(CLI::IsMember({"svm", "logreg", "forest", "boost"}));
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--stickout", o.stickouts, "stickout id(s); default: all in the manifest");
    app.add_option("--realizations", o.realizations, "split-train-test repetitions")->check(CLI::PositiveNumber);
    app.add_option("--window", o.window, "EEMD window length in samples");
    app.add_option("--ensemble", o.ensemble, "EEMD ensemble size");
    app.add_option("--noise", o.noise, "EEMD noise std as a fraction of the signal std");
    app.add_option("--workers", o.workers, "EEMD worker threads");
    app.add_flag("--grouped-split", o.grouped_split, "keep windows of one segment on one side of a split");
    app.add_flag("--drop-mild", o.drop_mild, "exclude mild chatter instead of counting it as chatter");
    app.add_option("--train-fraction", o.train_fraction, "training fraction (mode default otherwise)");
    app.add_option("--test-fraction", o.test_fraction, "test fraction (mode default otherwise)");

    auto* pre = app.add_subcommand("preprocess", "low-pass filter and downsample every recording");
    pre->add_option("--cutoff", o.cutoff_hz, "Butterworth cutoff in Hz");
    pre->add_option("--target-rate", o.target_rate_hz, "output sample rate in Hz");
    pre->add_option("--order", o.filter_order, "Butterworth order (even)");
    auto* dec = app.add_subcommand("decompose", "write packet or IMF decompositions of every sample");
    auto* sel = app.add_subcommand("select", "choose the informative packet or IMF per configuration");
    auto* feat = app.add_subcommand("features", "write feature matrices per configuration");
    auto* train = app.add_subcommand("train", "fit a classifier on a feature matrix");
    train->add_option("--features", o.features_path, "feature CSV (otherwise computed from the manifest)");
    auto* within = app.add_subcommand("evaluate-within", "within-configuration experiment");
    auto* transfer = app.add_subcommand("evaluate-transfer", "transfer experiment between configurations");
    transfer->add_option("--train", o.train_configs, "training stickout id(s)");
    transfer->add_option("--test", o.test_configs, "test stickout id(s)");
    auto* report = app.add_subcommand("report", "print saved experiment reports");
    report->add_option("--input", o.inputs, "report.json or its directory")->required();
    report->add_option("--format", o.format, "text, csv, json or bars");
    auto* synth = app.add_subcommand("generate-synthetic", "write a synthetic labeled corpus");
    synth->add_option("--recordings", o.recordings, "recordings per configuration");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // Locate the config file and subcommand before the real parse.
        std::string config_path, subcommand;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
            else if (subcommand.empty() && app.get_subcommand_no_throw(args[i]) != nullptr) subcommand = args[i];
        }
        if (!config_path.empty()) {
            auto extra = config_file_args(config_path, subcommand, args);
            args.insert(args.end(), extra.begin(), extra.end());
        }
    } catch (const std::exception& e) {
        return fail("ConfigError", e.what(), kUsage);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("UsageError", e.what(), kUsage);
    }

    try {
        if (*pre) return cmd_preprocess(o);
        if (*dec) return cmd_decompose(o);
        if (*sel) return cmd_select(o);
        if (*feat) return cmd_features(o);
        if (*train) return cmd_train(o);
        if (*within) return cmd_within(o);
        if (*transfer) return cmd_transfer(o);
        if (*report) return cmd_report(o);
        if (*synth) return cmd_synthetic(o);
    } catch (const ParseError& e) {
        return fail("ParseError", e.what(), kData);
    } catch (const ValidationError& e) {
        return fail("ValidationError", e.what(), kData);
    } catch (const FeatureExtractionError& e) {
        return fail("FeatureExtractionError", e.what(), kData);
    } catch (const IoError& e) {
        return fail("IoError", e.what(), kIo);
    } catch (const DomainError& e) {
        return fail("DomainError", e.what(), kDomain);
    } catch (const std::exception& e) {
        return fail("Error", e.what(), kFailure);
    }
    return fail("UsageError", "no subcommand given", kUsage);
}
