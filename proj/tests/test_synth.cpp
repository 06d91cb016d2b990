#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "garden/synth.hpp"

using namespace garden;
using Catch::Matchers::WithinAbs;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

synth::SynthConfig demo_config() {
    return synth::parse_synth_config(read_file(std::string(GARDEN_DATA_DIR) +
                                               "/demo_config.json"));
}

// Minimal valid config: two categories, one region, no seasonality.
synth::SynthConfig tiny_config() {
    synth::SynthConfig cfg;
    cfg.start_month = "2022-03";
    cfg.n_months = 2;
    cfg.base_rate = 30.0;
    cfg.filler_fraction = 0.0;
    synth::SynthCategory a;
    a.name = "pests";
    a.keywords = {"aphid", "mite",  "beetle", "grub",   "slug",
                  "thrip", "scale", "weevil", "borer",  "maggot"};
    synth::SynthCategory b;
    b.name = "soil";
    b.keywords = {"loam",    "clay",  "compost", "mulch", "peat",
                  "nitrogen", "acid", "drainage", "sand",  "silt"};
    cfg.categories = {a, b};
    synth::SynthRegion r;
    r.zip = "30301";
    r.lat = 33.7;
    r.lon = -84.4;
    r.region = "Southeast";
    r.mix = {{"pests", 0.75}, {"soil", 0.25}};
    cfg.regions = {r};
    return cfg;
}

} // namespace

TEST_CASE("demo config parses with the documented shape") {
    const auto cfg = demo_config();
    CHECK(cfg.start_month == "2021-01");
    CHECK(cfg.n_months == 36);
    CHECK_THAT(cfg.base_rate, WithinAbs(35.0, 1e-12));
    CHECK_THAT(cfg.filler_fraction, WithinAbs(0.2, 1e-12));
    REQUIRE(cfg.categories.size() == 4);
    for (const auto& cat : cfg.categories) {
        CHECK(cat.keywords.size() >= 10);
    }
    CHECK(cfg.regions.size() == 8);
    for (const auto& region : cfg.regions) {
        double sum = 0.0;
        for (const auto& [cat, wgt] : region.mix) {
            sum += wgt;
        }
        CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("config validation rejects each broken field") {
    CHECK_NOTHROW(synth::validate_config(tiny_config()));

    auto check_throws = [](auto mutate) {
        auto cfg = tiny_config();
        mutate(cfg);
        CHECK_THROWS_AS(synth::validate_config(cfg), Error);
    };

    check_throws([](auto& c) { c.start_month = "2022-13"; });
    check_throws([](auto& c) { c.start_month = "202203"; });
    check_throws([](auto& c) { c.start_month = "22-03"; });
    check_throws([](auto& c) { c.n_months = 0; });
    check_throws([](auto& c) { c.base_rate = 0.0; });
    check_throws([](auto& c) { c.base_rate = -5.0; });
    check_throws([](auto& c) { c.filler_fraction = 0.6; });
    check_throws([](auto& c) { c.filler_fraction = -0.1; });
    check_throws([](auto& c) { c.filler_fraction = 0.3; }); // no filler words
    check_throws([](auto& c) { c.categories[0].keywords.resize(9); });
    check_throws([](auto& c) { c.categories[0].amplitude = 1.0; });
    check_throws([](auto& c) { c.categories[0].amplitude = -0.2; });
    check_throws([](auto& c) { c.categories.resize(1); });
    check_throws([](auto& c) { c.categories[1].name = "pests"; });
    check_throws([](auto& c) { c.categories[0].name.clear(); });
    check_throws([](auto& c) { c.regions.clear(); });
    check_throws([](auto& c) { c.regions[0].zip = "1234"; });
    check_throws([](auto& c) { c.regions[0].lat = 91.0; });
    check_throws([](auto& c) { c.regions[0].lon = -181.0; });
    check_throws([](auto& c) { c.regions[0].region.clear(); });
    check_throws([](auto& c) { c.regions[0].mix["pests"] = 0.5; }); // sum 0.75+0.5+0.25
    check_throws([](auto& c) { c.regions[0].mix["ghost"] = 0.0; });
    check_throws([](auto& c) {
        c.regions[0].mix = {{"pests", 1.25}, {"soil", -0.25}};
    });
    check_throws([](auto& c) {
        c.regions.push_back(c.regions[0]); // duplicate zip
    });

    // Filler fraction above zero is fine once words exist.
    auto cfg = tiny_config();
    cfg.filler_fraction = 0.3;
    cfg.filler_words = {"please", "help", "my"};
    CHECK_NOTHROW(synth::validate_config(cfg));
}

TEST_CASE("config JSON parsing reports missing fields") {
    CHECK_THROWS_AS(synth::parse_synth_config("not json"), Error);
    CHECK_THROWS_AS(synth::parse_synth_config("{}"), Error);
    CHECK_THROWS_AS(
        synth::parse_synth_config(R"({"start_month":"2022-01","n_months":2})"), Error);
}

TEST_CASE("expected_rate matches the closed form") {
    auto cfg = tiny_config();
    cfg.base_rate = 40.0;
    cfg.categories[0].amplitude = 0.3;
    cfg.categories[0].phase_month = 2.0;
    cfg.regions[0].mix = {{"pests", 0.5}, {"soil", 0.5}};

    // t = 5: sin(2 pi (5-2)/12) = sin(pi/2) = 1 -> 40 * 0.5 * 1.3 = 26.
    CHECK_THAT(synth::expected_rate(cfg, 5, cfg.categories[0], cfg.regions[0]),
               WithinAbs(26.0, 1e-9));
    // t = 11: sin(2 pi (9/12)) = -1 -> 40 * 0.5 * 0.7 = 14.
    CHECK_THAT(synth::expected_rate(cfg, 11, cfg.categories[0], cfg.regions[0]),
               WithinAbs(14.0, 1e-9));
    // Zero-amplitude category is flat across months.
    CHECK_THAT(synth::expected_rate(cfg, 0, cfg.categories[1], cfg.regions[0]),
               WithinAbs(20.0, 1e-9));
    CHECK_THAT(synth::expected_rate(cfg, 7, cfg.categories[1], cfg.regions[0]),
               WithinAbs(20.0, 1e-9));

    // A category missing from the mix contributes nothing.
    cfg.regions[0].mix = {{"pests", 1.0}};
    CHECK(synth::expected_rate(cfg, 3, cfg.categories[1], cfg.regions[0]) == 0.0);
}

TEST_CASE("generation is deterministic in the seed") {
    const auto cfg = tiny_config();
    const auto a = synth::generate_corpus(cfg, 42);
    const auto b = synth::generate_corpus(cfg, 42);
    CHECK(corpus::serialize_records(a, corpus::Format::Jsonl) ==
          corpus::serialize_records(b, corpus::Format::Jsonl));

    const auto c = synth::generate_corpus(cfg, 43);
    CHECK(corpus::serialize_records(a, corpus::Format::Jsonl) !=
          corpus::serialize_records(c, corpus::Format::Jsonl));
}

TEST_CASE("records are ordered, labeled, and drawn from config pools") {
    auto cfg = tiny_config();
    cfg.filler_fraction = 0.25;
    cfg.filler_words = {"please", "why", "again"};
    cfg.n_months = 3;
    const auto corpus = synth::generate_corpus(cfg, 7);
    REQUIRE(corpus.size() > 50);

    std::set<std::string> zips, cats;
    for (const auto& r : cfg.regions) {
        zips.insert(r.zip);
    }
    std::map<std::string, std::set<std::string>> pools;
    for (const auto& cat : cfg.categories) {
        cats.insert(cat.name);
        pools[cat.name] = {cat.keywords.begin(), cat.keywords.end()};
        pools[cat.name].insert(cfg.filler_words.begin(), cfg.filler_words.end());
    }

    const std::int64_t start_sec =
        dates::days_from_civil(2022, 3, 1) * 86400;
    const std::int64_t end_sec = dates::days_from_civil(2022, 6, 1) * 86400;

    std::int64_t last_month = -1;
    bool saw_filler = false;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& rec = corpus.records()[i];

        // Sequential ids.
        char want[32];
        std::snprintf(want, sizeof want, "q-%06zu", i + 1);
        REQUIRE(rec.id == want);

        REQUIRE(zips.count(rec.zip) == 1);
        REQUIRE(rec.category.has_value());
        REQUIRE(cats.count(*rec.category) == 1);
        REQUIRE(rec.timestamp >= start_sec);
        REQUIRE(rec.timestamp < end_sec);

        // Month-major ordering.
        const std::int64_t month = rec.timestamp / 86400 / 28; // coarse but monotone proxy
        (void)month;
        const auto ym = dates::format_date(rec.timestamp / 86400).substr(0, 7);
        const std::int64_t month_idx = (ym[5] - '0') * 10 + (ym[6] - '0');
        REQUIRE(month_idx >= last_month);
        last_month = month_idx;

        // Tokens come from the category's keywords or the filler pool.
        std::istringstream words(rec.text);
        std::string tok;
        int n_tok = 0;
        while (words >> tok) {
            ++n_tok;
            REQUIRE(pools[*rec.category].count(tok) == 1);
            if (std::find(cfg.filler_words.begin(), cfg.filler_words.end(), tok) !=
                cfg.filler_words.end()) {
                saw_filler = true;
            }
        }
        REQUIRE(n_tok >= 3);
        REQUIRE(n_tok <= 8);
    }
    CHECK(saw_filler);

    // With filler disabled no filler word ever appears.
    auto clean_cfg = tiny_config();
    const auto clean = synth::generate_corpus(clean_cfg, 7);
    for (const auto& rec : clean.records()) {
        std::istringstream words(rec.text);
        std::string tok;
        while (words >> tok) {
            REQUIRE(tok != "please");
            REQUIRE(tok != "why");
            REQUIRE(tok != "again");
        }
    }
}

TEST_CASE("monthly draw counts have the configured Poisson mean") {
    auto cfg = tiny_config();
    cfg.n_months = 1;
    cfg.base_rate = 30.0;
    cfg.regions[0].mix = {{"pests", 1.0}, {"soil", 0.0}};

    const int n_seeds = 200;
    double total = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        total += static_cast<double>(
            synth::generate_corpus(cfg, 1000 + static_cast<std::uint64_t>(s)).size());
    }
    const double mean = total / n_seeds;
    // Mean of n_seeds Poisson(30) draws: sd = sqrt(30/200) ~ 0.39.
    CHECK_THAT(mean, WithinAbs(30.0, 5.0 * std::sqrt(30.0 / n_seeds)));
}

TEST_CASE("an effectively zero rate yields a helpful error") {
    auto cfg = tiny_config();
    cfg.base_rate = 1e-12;
    CHECK_THROWS_AS(synth::generate_corpus(cfg, 1), Error);
}

TEST_CASE("rates_csv lists every cell with 6-decimal lambdas") {
    auto cfg = tiny_config();
    cfg.categories[0].amplitude = 0.4;
    cfg.categories[0].phase_month = 1.0;
    const auto csv = synth::rates_csv(cfg);

    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "month,zip,category,lambda");

    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        rows.push_back(line);
    }
    REQUIRE(rows.size() == static_cast<std::size_t>(cfg.n_months) *
                               cfg.regions.size() * cfg.categories.size());

    // Row 0: month 2022-03, t = 0.
    char want[128];
    std::snprintf(want, sizeof want, "2022-03,30301,pests,%.6f",
                  synth::expected_rate(cfg, 0, cfg.categories[0], cfg.regions[0]));
    CHECK(rows[0] == want);
    // Final row: t = 1, second category, month label advanced.
    std::snprintf(want, sizeof want, "2022-04,30301,soil,%.6f",
                  synth::expected_rate(cfg, 1, cfg.categories[1], cfg.regions[0]));
    CHECK(rows.back() == want);
}

TEST_CASE("region table and CSV reflect the config rows in order") {
    const auto cfg = demo_config();
    const auto table = synth::region_table(cfg);
    REQUIRE(table.size() == cfg.regions.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(table.rows()[i].zip == cfg.regions[i].zip);
        CHECK(table.rows()[i].region == cfg.regions[i].region);
    }

    const auto csv = synth::region_table_csv(cfg);
    CHECK(csv.rfind("zip,lat,lon,region\n", 0) == 0);
    // Parseable by the spatial loader and identical in content.
    const auto parsed = spatial::parse_region_table(csv);
    REQUIRE(parsed.size() == cfg.regions.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed.rows()[i].zip == cfg.regions[i].zip);
        CHECK_THAT(parsed.rows()[i].lat, WithinAbs(cfg.regions[i].lat, 1e-6));
        CHECK_THAT(parsed.rows()[i].lon, WithinAbs(cfg.regions[i].lon, 1e-6));
    }
}

TEST_CASE("demo corpus regenerates the documented record count") {
    const auto corpus = synth::generate_corpus(demo_config(), 42);
    CHECK(corpus.size() == 9975);
}
