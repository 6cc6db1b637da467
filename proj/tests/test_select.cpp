#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "chatter/error.hpp"
#include "chatter/select.hpp"
#include "oracle.hpp"

using namespace chatter;

namespace {

constexpr double kFs = 10000.0;

std::vector<double> mix(std::size_t n, std::initializer_list<std::pair<double, double>> tones, std::uint64_t seed) {
    auto x = oracle::gaussian(n, seed, 0.01);
    for (auto [f, a] : tones) {
        const auto s = oracle::sine(n, f, kFs, a, 0.1 * static_cast<double>(seed));
        for (std::size_t i = 0; i < n; ++i) x[i] += s[i];
    }
    return x;
}

PacketTree tree_of(std::vector<double> x) { return wpt_decompose(TimeSeries{std::move(x), kFs, 0.0}, 4); }

const CuttingConfig k2in{"2", {900.0, 1000.0}};

} // namespace

TEST_CASE("planted chatter energy in packet 4 wins over packet 3") {
    std::vector<PacketTree> trees;
    std::vector<int> labels;
    for (std::uint64_t s = 1; s <= 6; ++s) {
        // Spindle energy dominates packet 1, which is outside the band.
        trees.push_back(tree_of(mix(2048, {{120.0, 5.0}, {1090.0, 1.0}}, s)));
        labels.push_back(1);
    }
    const auto choice = select_informative_packet(trees, labels, 4, k2in);
    CHECK(choice.packet_index == 4);
    CHECK(choice.level == 4);
    CHECK(choice.band.low_hz == doctest::Approx(937.5));
    CHECK(choice.band.high_hz == doctest::Approx(1250.0));
    CHECK(choice.mean_energy_ratios.size() == 16);
    // The overall energy maximum sits in packet 1, yet it is never a candidate.
    const auto top = std::max_element(choice.mean_energy_ratios.begin(), choice.mean_energy_ratios.end());
    CHECK(top - choice.mean_energy_ratios.begin() == 0);
    CHECK(choice.mean_energy_ratio == doctest::Approx(choice.mean_energy_ratios[3]));
}

TEST_CASE("packet 3 chosen when it carries more in-band energy") {
    std::vector<PacketTree> trees;
    for (std::uint64_t s = 1; s <= 4; ++s) trees.push_back(tree_of(mix(2048, {{780.0, 1.0}, {1100.0, 0.4}}, s)));
    const std::vector<int> labels(trees.size(), 1);
    CHECK(select_informative_packet(trees, labels, 4, k2in).packet_index == 3);
}

TEST_CASE("singleton candidate set") {
    std::vector<PacketTree> trees{tree_of(mix(1024, {{500.0, 1.0}}, 1))};
    const std::vector<int> labels{1};
    const auto choice = select_informative_packet(trees, labels, 4, {"4.5", {2900.0, 3000.0}});
    CHECK(choice.packet_index == 10);
}

TEST_CASE("only chatter-labelled trees are averaged") {
    std::vector<PacketTree> trees;
    std::vector<int> labels;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        trees.push_back(tree_of(mix(2048, {{1090.0, 1.0}}, s)));
        labels.push_back(1);
        for (int k = 0; k < 3; ++k) {
            trees.push_back(tree_of(mix(2048, {{780.0, 3.0}}, s * 10 + static_cast<std::uint64_t>(k))));
            labels.push_back(0);
        }
    }
    CHECK(select_informative_packet(trees, labels, 4, k2in).packet_index == 4);

    // With no chatter labels at all every tree counts, and the stable majority wins.
    const std::vector<int> none(trees.size(), 0);
    CHECK(select_informative_packet(trees, none, 4, k2in).packet_index == 3);
}

TEST_CASE("packet selection errors") {
    std::vector<PacketTree> trees{tree_of(mix(1024, {{500.0, 1.0}}, 1))};
    const std::vector<int> labels{1};
    CHECK_THROWS_AS(select_informative_packet(trees, labels, 4, {"x", {6000.0, 7000.0}}), DomainError);
    CHECK_THROWS_AS(select_informative_packet(std::span<const PacketTree>{}, std::span<const int>{}, 4, k2in),
                    DomainError);
    const std::vector<int> misaligned{1, 0};
    CHECK_THROWS_AS(select_informative_packet(trees, misaligned, 4, k2in), DomainError);
}

TEST_CASE("selection is deterministic and scale invariant") {
    std::vector<PacketTree> trees, scaled;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        auto x = mix(2048, {{800.0, 0.7}, {1000.0, 0.7}, {300.0, 1.0}}, s);
        trees.push_back(tree_of(x));
        for (double& v : x) v *= 123.0;
        scaled.push_back(tree_of(x));
    }
    const std::vector<int> labels(trees.size(), 1);
    const auto a = select_informative_packet(trees, labels, 4, k2in);
    const auto b = select_informative_packet(trees, labels, 4, k2in);
    const auto c = select_informative_packet(scaled, labels, 4, k2in);
    CHECK(a.packet_index == b.packet_index);
    CHECK(a.mean_energy_ratios == b.mean_energy_ratios);
    CHECK(a.packet_index == c.packet_index);
    for (std::size_t j = 0; j < 16; ++j) CHECK(c.mean_energy_ratios[j] == doctest::Approx(a.mean_energy_ratios[j]));
    const auto pred = predict_informative_packets(k2in.chatter_band_hz, 4, kFs);
    CHECK(std::find(pred.begin(), pred.end(), a.packet_index) != pred.end());
}

TEST_CASE("planted IMF 3 carries the in-band energy") {
    std::vector<ImfSet> sets;
    for (std::uint64_t s = 1; s <= 4; ++s) {
        ImfSet set;
        set.imfs = {mix(1000, {{3000.0, 2.0}}, s), mix(1000, {{2000.0, 1.0}}, s + 10), mix(1000, {{950.0, 0.3}}, s + 20),
                    mix(1000, {{100.0, 1.0}}, s + 30)};
        set.residue.assign(1000, 0.0);
        sets.push_back(std::move(set));
    }
    const std::vector<int> labels(sets.size(), 1);
    const auto choice = select_informative_imf(sets, labels, k2in, kFs);
    CHECK(choice.imf_index == 3);
    CHECK(choice.scores.size() == 4);
    CHECK(choice.band_overlap_score > 0.9);

    auto scaled = sets;
    for (auto& set : scaled)
        for (auto& c : set.imfs)
            for (double& v : c) v *= 1e-3;
    CHECK(select_informative_imf(scaled, labels, k2in, kFs).imf_index == 3);
}

TEST_CASE("IMF ties go to the lower index and short sets contribute zero") {
    ImfSet a, b;
    a.imfs = {oracle::sine(1000, 950.0, kFs), oracle::sine(1000, 950.0, kFs, 2.0)};
    a.residue.assign(1000, 0.0);
    b.imfs = {oracle::sine(1000, 950.0, kFs)};
    b.residue.assign(1000, 0.0);
    const std::vector<ImfSet> both{a, b};
    const std::vector<int> labels{1, 1};
    const auto choice = select_informative_imf(both, labels, k2in, kFs);
    CHECK(choice.imf_index == 1);
    CHECK(choice.scores[1] == doctest::Approx(0.5 * choice.scores[0]));

    ImfSet empty;
    empty.residue.assign(10, 0.0);
    const std::vector<ImfSet> bad{empty};
    const std::vector<int> one{1};
    CHECK_THROWS_AS(select_informative_imf(bad, one, k2in, kFs), DomainError);
}

TEST_CASE("selection report JSON") {
    const auto dir = oracle::scratch_dir("select");
    write_selection_report(dir / "sel.json", {"2", 4, 3, 2, {0.5, 0.5}, {625.0, 937.5}});
    std::ifstream in(dir / "sel.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("stickout_id") == "2");
    CHECK(j.at("packet_index") == 3);
    CHECK(j.at("imf_index") == 2);
    CHECK(j.at("band").at("low_hz") == 625.0);
    CHECK(j.at("mean_energy_ratios").size() == 2);
}
