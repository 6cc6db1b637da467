#include "chatter/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "chatter/error.hpp"

namespace chatter {

using nlohmann::json;

namespace {

json summary_json(const AccuracySummary& s) { return {{"mean", s.mean}, {"std", s.std_dev}}; }

AccuracySummary summary_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

std::string row_label(std::size_t k) { return k == 1 ? "r1" : "r1-r" + std::to_string(k); }

std::string percent(const AccuracySummary& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%5.1f +/- %4.1f", 100.0 * s.mean, 100.0 * s.std_dev);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

} // namespace

json to_json(const ExperimentReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"k", r.k}, {"label", row_label(r.k)}, {"test", summary_json(r.test)},
                        {"train", summary_json(r.train)}});
    json reals = json::array();
    for (const auto& r : report.realizations)
        reals.push_back({{"index", r.index},
                         {"seed", r.seed},
                         {"packet_index", r.packet_index},
                         {"imf_index", r.imf_index},
                         {"ranking", r.ranking},
                         {"test_accuracy", r.test_accuracy},
                         {"train_accuracy", r.train_accuracy},
                         {"n_train", r.n_train},
                         {"n_test", r.n_test}});
    return {{"mode", report.mode},
            {"method", report.method},
            {"level", report.level},
            {"classifier", report.classifier},
            {"train_configs", report.train_configs},
            {"test_configs", report.test_configs},
            {"n_realizations", report.n_realizations},
            {"train_fraction", report.train_fraction},
            {"test_fraction", report.test_fraction},
            {"master_seed", report.master_seed},
            {"feature_names", report.feature_names},
            {"rows", rows},
            {"realizations", reals}};
}

ExperimentReport report_from_json(const json& j) {
    try {
        ExperimentReport report;
        report.mode = j.at("mode").get<std::string>();
        report.method = j.at("method").get<std::string>();
        report.level = j.at("level").get<int>();
        report.classifier = j.at("classifier").get<std::string>();
        report.train_configs = j.at("train_configs").get<std::vector<std::string>>();
        report.test_configs = j.at("test_configs").get<std::vector<std::string>>();
        report.n_realizations = j.at("n_realizations").get<int>();
        report.train_fraction = j.at("train_fraction").get<double>();
        report.test_fraction = j.at("test_fraction").get<double>();
        report.master_seed = j.at("master_seed").get<std::uint64_t>();
        report.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        for (const auto& r : j.at("rows"))
            report.rows.push_back({r.at("k").get<std::size_t>(), summary_from(r.at("test")), summary_from(r.at("train"))});
        for (const auto& r : j.at("realizations")) {
            RealizationRecord rec;
            rec.index = r.at("index").get<int>();
            rec.seed = r.at("seed").get<std::uint64_t>();
            rec.packet_index = r.at("packet_index").get<int>();
            rec.imf_index = r.at("imf_index").get<int>();
            rec.ranking = r.at("ranking").get<std::vector<std::size_t>>();
            rec.test_accuracy = r.at("test_accuracy").get<std::vector<double>>();
            rec.train_accuracy = r.at("train_accuracy").get<std::vector<double>>();
            rec.n_train = r.at("n_train").get<std::size_t>();
            rec.n_test = r.at("n_test").get<std::size_t>();
            report.realizations.push_back(std::move(rec));
        }
        return report;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
}

std::string format_text_table(const ExperimentReport& report) {
    std::ostringstream os;
    os << report.method;
    if (report.method == "wpt") os << " level " << report.level;
    os << ", " << report.classifier << ", " << report.mode << ", train " << join(report.train_configs, '+')
       << " / test " << join(report.test_configs, '+') << ", " << report.n_realizations << " realizations\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-10s  %-16s  %-16s\n", "features", "test acc (%)", "train acc (%)");
    os << line;
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof line, "%-10s  %-16s  %-16s\n", row_label(r.k).c_str(), percent(r.test).c_str(),
                      percent(r.train).c_str());
        os << line;
    }
    return os.str();
}

std::string format_csv(const ExperimentReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "features,k,test_mean,test_std,train_mean,train_std\n";
    for (const auto& r : report.rows)
        os << row_label(r.k) << ',' << r.k << ',' << r.test.mean << ',' << r.test.std_dev << ',' << r.train.mean << ','
           << r.train.std_dev << '\n';
    return os.str();
}

std::string format_bar_data(const ExperimentReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "method,classifier,level,k,mean,std\n";
    if (!report.rows.empty()) {
        const auto& best = report.best_row();
        os << report.method << ',' << report.classifier << ',' << report.level << ',' << best.k << ','
           << best.test.mean << ',' << best.test.std_dev << '\n';
    }
    return os.str();
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format) {
    switch (format) {
    case ReportFormat::Json: write_text(path, to_json(report).dump(2) + "\n"); break;
    case ReportFormat::Text: write_text(path, format_text_table(report)); break;
    case ReportFormat::Csv: write_text(path, format_csv(report)); break;
    case ReportFormat::BarData: write_text(path, format_bar_data(report)); break;
    }
}

void emit_report_bundle(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    emit_report(report, dir / "report.json", ReportFormat::Json);
    emit_report(report, dir / "report.txt", ReportFormat::Text);
    emit_report(report, dir / "report.csv", ReportFormat::Csv);
    emit_report(report, dir / "bars.csv", ReportFormat::BarData);
}

ExperimentReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("report is not valid JSON: ") + e.what(), 0);
    }
    return report_from_json(j);
}

} // namespace chatter
