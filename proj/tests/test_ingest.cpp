#include <doctest.h>

#include <fstream>
#include <sstream>

#include "chatter/error.hpp"
#include "chatter/ingest.hpp"
#include "oracle.hpp"

using namespace chatter;

namespace {

TimeSeries parse(const std::string& text, double rate = 10000.0) {
    std::istringstream in(text);
    return parse_timeseries(in, rate);
}

TimeSeries ramp(std::size_t n, double rate) {
    TimeSeries ts;
    ts.sample_rate_hz = rate;
    for (std::size_t i = 0; i < n; ++i) ts.samples.push_back(static_cast<double>(i));
    return ts;
}

} // namespace

TEST_CASE("two-column series reads the acceleration column") {
    const auto ts = parse("0.0,0.5\n0.0001,0.7");
    CHECK(ts.samples == std::vector<double>{0.5, 0.7});
    CHECK(ts.sample_rate_hz == 10000.0);
    CHECK(ts.start_time_s == 0.0);
}

TEST_CASE("single-column series and optional header") {
    CHECK(parse("1.0\n2.0\n3.0").size() == 3);
    CHECK(parse("acc\n1.0\n2.0\n").size() == 2);
    CHECK(parse("time,acc\n0.5,1\n0.5001,2\n").start_time_s == doctest::Approx(0.5));
}

TEST_CASE("time deltas must match the sample rate") {
    CHECK_THROWS_AS(parse("0.0,0.5\n0.0003,0.7"), ValidationError);
    CHECK_THROWS_AS(parse("0.0,0.5\n-0.0001,0.7"), ValidationError);
}

TEST_CASE("malformed rows report their line") {
    try {
        parse("1.0\n2.0\nabc\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("1,2,3\n"), ParseError);
    CHECK_THROWS_AS(parse("1,2\n3\n"), ParseError);
}

TEST_CASE("empty file is rejected") {
    CHECK_THROWS_AS(parse(""), ValidationError);
    CHECK_THROWS_AS(parse("header\n"), ValidationError);
    CHECK_THROWS_AS(load_timeseries("/nonexistent/file.csv", 10000.0), IoError);
}

TEST_CASE("label files parse case-insensitively") {
    std::istringstream in("start_s,end_s,label\n0,1,Stable\n1,2,MILD\n2,3,chatter\n3,4,unknown\n");
    const auto labels = parse_labels(in);
    REQUIRE(labels.size() == 4);
    CHECK(labels[0].label == Label::Stable);
    CHECK(labels[1].label == Label::MildChatter);
    CHECK(labels[2].label == Label::Chatter);
    CHECK(labels[3].label == Label::Unknown);
    std::istringstream bad("0,1,wobbly\n");
    CHECK_THROWS_AS(parse_labels(bad), ParseError);
    std::istringstream reversed("1,0,stable\n");
    CHECK_THROWS_AS(parse_labels(reversed), ValidationError);
}

TEST_CASE("cut_segments maps labels to two classes and skips unknown") {
    const auto ts = ramp(3000, 1000.0);
    const std::vector<LabelInterval> labels = {
        {0.0, 1.0, Label::Stable}, {1.0, 2.0, Label::Chatter}, {2.0, 3.0, Label::Unknown}};
    const auto segs = cut_segments(ts, labels, "rec");
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].label == 0);
    CHECK(segs[1].label == 1);
    CHECK(segs[0].series.size() == 1000);
    CHECK(segs[1].series.samples.front() == 1000.0);
    CHECK(segs[1].series.samples.back() == 1999.0);
    CHECK(segs[1].source.id() == "rec#1");
}

TEST_CASE("mild chatter counts as chatter unless the policy drops it") {
    const auto ts = ramp(1000, 1000.0);
    const std::vector<LabelInterval> labels = {{0.0, 1.0, Label::MildChatter}};
    const auto segs = cut_segments(ts, labels);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].label == 1);
    LabelPolicy drop;
    drop.mild_is_chatter = false;
    CHECK(cut_segments(ts, labels, "", drop).empty());
}

TEST_CASE("overlapping or out-of-span intervals are rejected") {
    const auto ts = ramp(2000, 1000.0);
    CHECK_THROWS_AS(cut_segments(ts, {{0.0, 1.0, Label::Stable}, {0.5, 1.5, Label::Stable}}), ValidationError);
    CHECK_THROWS_AS(cut_segments(ts, {{1.5, 2.5, Label::Stable}}), ValidationError);
}

TEST_CASE("every segment sample traces to exactly one interval") {
    const auto ts = ramp(5000, 1000.0);
    const std::vector<LabelInterval> labels = {
        {0.0, 1.2, Label::Stable}, {1.2, 2.05, Label::Chatter}, {2.05, 3.5, Label::MildChatter}, {3.5, 5.0, Label::Stable}};
    const auto segs = cut_segments(ts, labels);
    std::vector<int> hits(ts.size(), 0);
    for (const auto& s : segs)
        for (double v : s.series.samples) ++hits[static_cast<std::size_t>(v)];
    for (int h : hits) CHECK(h == 1);
}

TEST_CASE("window_segments keeps whole windows and inherits labels") {
    Segment seg;
    seg.series = ramp(3500, 10000.0);
    seg.label = 1;
    auto windows = window_segments({seg}, 1000);
    REQUIRE(windows.size() == 3);
    for (std::size_t w = 0; w < 3; ++w) {
        CHECK(windows[w].series.size() == 1000);
        CHECK(windows[w].label == 1);
        CHECK(windows[w].series.samples.front() == static_cast<double>(1000 * w));
        CHECK(windows[w].source.window_index == w);
    }
    seg.series = ramp(999, 10000.0);
    CHECK(window_segments({seg}, 1000).empty());
    seg.series = ramp(2000, 10000.0);
    CHECK(window_segments({seg}, 1000).size() == 2);
}

TEST_CASE("window count is the sum of floors") {
    std::vector<Segment> segs;
    std::size_t expected = 0;
    for (std::size_t len : {10u, 1999u, 2000u, 5123u, 7u}) {
        Segment s;
        s.series = ramp(len, 10000.0);
        segs.push_back(s);
        expected += len / 1000;
    }
    CHECK(window_segments(segs, 1000).size() == expected);
}

TEST_CASE("reference chatter bands") {
    const auto c = find_reference_config("2");
    REQUIRE(c);
    CHECK(c->chatter_band_hz == FrequencyBand{900.0, 1000.0});
    CHECK(find_reference_config("4.5")->chatter_band_hz == FrequencyBand{2900.0, 3000.0});
    CHECK_FALSE(find_reference_config("7"));
    CHECK_THROWS_AS(validate(CuttingConfig{"x", {900.0, 6000.0}}, 10000.0), ValidationError);
}

TEST_CASE("manifest round trip with relative paths") {
    const auto dir = oracle::scratch_dir("manifest");
    Manifest m;
    m.configs = reference_configs();
    m.entries.push_back({dir / "a.csv", dir / "a.labels.csv", "2", 570.0, 0.005, 10000.0});
    m.entries.push_back({dir / "b.csv", dir / "b.labels.csv", "4.5", 770.0, 0.0127, 10000.0});
    write_manifest(dir / "manifest.json", m);
    const auto back = load_manifest(dir / "manifest.json");
    REQUIRE(back.entries.size() == 2);
    CHECK(std::filesystem::equivalent(back.entries[1].signal_path.parent_path(), dir));
    CHECK(back.entries[1].signal_path.filename() == "b.csv");
    CHECK(back.entries[0].stickout_id == "2");
    CHECK(back.entries[1].rpm == 770.0);
    CHECK(back.config("2.5")->chatter_band_hz == FrequencyBand{1200.0, 1300.0});
}

TEST_CASE("manifest as a bare list uses the reference bands") {
    const auto dir = oracle::scratch_dir("manifest_list");
    std::ofstream(dir / "m.json") << R"([{"signal_path": "x.csv", "label_path": "x.lab", "stickout_id": 3.5, "rpm": 1, "doc": 2}])";
    const auto m = load_manifest(dir / "m.json");
    REQUIRE(m.entries.size() == 1);
    CHECK(m.entries[0].stickout_id == "3.5");
    CHECK(m.entries[0].signal_path == dir / "x.csv");
    CHECK(m.config("3.5").has_value());
}
