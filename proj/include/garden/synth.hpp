#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "garden/corpus.hpp"
#include "garden/dates.hpp"
#include "garden/error.hpp"
#include "garden/rng.hpp"
#include "garden/spatial.hpp"

namespace garden::synth {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct SynthCategory {
    std::string name;
    std::vector<std::string> keywords;
    double amplitude = 0.0;   // seasonal swing in [0, 1)
    double phase_month = 0.0; // month offset of the sine peak reference
};

struct SynthRegion {
    std::string zip;
    double lat = 0.0;
    double lon = 0.0;
    std::string region;
    std::map<std::string, double> mix; // per-category weights summing to 1; absent = 0
};

/// Generator settings: every (month, category, region) cell draws a
/// Poisson count with rate
///   base_rate * mix_{c,r} * (1 + amplitude_c * sin(2 pi (t - phase_c) / 12)).
struct SynthConfig {
    std::string start_month; // "YYYY-MM"
    int n_months = 0;
    double base_rate = 0.0;
    double filler_fraction = 0.0;
    std::vector<std::string> filler_words;
    std::vector<SynthCategory> categories;
    std::vector<SynthRegion> regions;
};

namespace detail {

inline std::int64_t parse_month(const std::string& ym) {
    require(ym.size() == 7 && ym[4] == '-', "start_month must be \"YYYY-MM\", got \"", ym,
            "\"");
    for (std::size_t i = 0; i < ym.size(); ++i) {
        if (i == 4) {
            continue;
        }
        require(ym[i] >= '0' && ym[i] <= '9', "start_month must be \"YYYY-MM\", got \"", ym,
                "\"");
    }
    const int year = std::stoi(ym.substr(0, 4));
    const int month = std::stoi(ym.substr(5, 2));
    require(month >= 1 && month <= 12, "start_month has invalid month: ", ym);
    return dates::days_from_civil(year, static_cast<unsigned>(month), 1);
}

inline std::string month_label(std::int64_t month_start_day) {
    return dates::format_date(month_start_day).substr(0, 7);
}

} // namespace detail

inline void validate_config(const SynthConfig& cfg) {
    detail::parse_month(cfg.start_month);
    require(cfg.n_months >= 1, "n_months must be >= 1");
    require(cfg.base_rate > 0.0, "base_rate must be positive");
    require(cfg.filler_fraction >= 0.0 && cfg.filler_fraction <= 0.5,
            "filler_fraction must be in [0, 0.5]");
    require(cfg.filler_fraction == 0.0 || !cfg.filler_words.empty(),
            "filler_words required when filler_fraction > 0");
    for (const auto& word : cfg.filler_words) {
        require(!word.empty(), "empty filler word");
    }

    require(cfg.categories.size() >= 2, "need at least 2 categories, got ",
            cfg.categories.size());
    std::map<std::string, bool> seen_cat;
    for (const auto& cat : cfg.categories) {
        require(!cat.name.empty(), "empty category name");
        require(!seen_cat.count(cat.name), "duplicate category \"", cat.name, "\"");
        seen_cat[cat.name] = true;
        require(cat.keywords.size() >= 10, "category \"", cat.name,
                "\" needs at least 10 keywords, got ", cat.keywords.size());
        for (const auto& word : cat.keywords) {
            require(!word.empty(), "empty keyword in category \"", cat.name, "\"");
        }
        require(cat.amplitude >= 0.0 && cat.amplitude < 1.0, "category \"", cat.name,
                "\" amplitude must be in [0, 1)");
    }

    require(!cfg.regions.empty(), "need at least 1 region");
    std::map<std::string, bool> seen_zip;
    for (const auto& region : cfg.regions) {
        require(corpus::valid_zip(region.zip), "invalid zip \"", region.zip, "\"");
        require(!seen_zip.count(region.zip), "duplicate zip ", region.zip);
        seen_zip[region.zip] = true;
        require(region.lat >= -90.0 && region.lat <= 90.0, "latitude out of range for zip ",
                region.zip);
        require(region.lon >= -180.0 && region.lon <= 180.0, "longitude out of range for zip ",
                region.zip);
        require(!region.region.empty(), "empty region name for zip ", region.zip);
        double mix_sum = 0.0;
        for (const auto& [cat, weight] : region.mix) {
            require(seen_cat.count(cat), "mix for zip ", region.zip,
                    " references unknown category \"", cat, "\"");
            require(weight >= 0.0, "negative mix weight for zip ", region.zip);
            mix_sum += weight;
        }
        require(std::abs(mix_sum - 1.0) <= 1e-9, "mix weights for zip ", region.zip,
                " must sum to 1, got ", mix_sum);
    }
}

namespace detail {

inline SynthConfig config_from_json(const nlohmann::json& j) {
    SynthConfig cfg;
    try {
        cfg.start_month = j.at("start_month").get<std::string>();
        cfg.n_months = j.at("n_months").get<int>();
        cfg.base_rate = j.at("base_rate").get<double>();
        cfg.filler_fraction = j.value("filler_fraction", 0.0);
        cfg.filler_words = j.value("filler_words", std::vector<std::string>{});
        for (const auto& c : j.at("categories")) {
            SynthCategory cat;
            cat.name = c.at("name").get<std::string>();
            cat.keywords = c.at("keywords").get<std::vector<std::string>>();
            cat.amplitude = c.value("amplitude", 0.0);
            cat.phase_month = c.value("phase_month", 0.0);
            cfg.categories.push_back(std::move(cat));
        }
        for (const auto& r : j.at("regions")) {
            SynthRegion region;
            region.zip = r.at("zip").get<std::string>();
            region.lat = r.at("lat").get<double>();
            region.lon = r.at("lon").get<double>();
            region.region = r.at("region").get<std::string>();
            if (r.contains("mix")) {
                region.mix = r.at("mix").get<std::map<std::string, double>>();
            }
            cfg.regions.push_back(std::move(region));
        }
    } catch (const nlohmann::json::exception& e) {
        fail("bad synth config: ", e.what());
    }
    validate_config(cfg);
    return cfg;
}

} // namespace detail

inline SynthConfig parse_synth_config(std::string_view bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        fail("bad synth config: ", e.what());
    }
    return detail::config_from_json(j);
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Expected Poisson rate for month index t, category c, region r. A
/// category absent from a region's mix contributes no queries there.
inline double expected_rate(const SynthConfig& cfg, int t, const SynthCategory& cat,
                            const SynthRegion& region) {
    constexpr double kTwoPi = 2.0 * 3.141592653589793238462643383279502884;
    const auto it = region.mix.find(cat.name);
    const double weight = it == region.mix.end() ? 0.0 : it->second;
    const double seasonal =
        1.0 + cat.amplitude * std::sin(kTwoPi * (static_cast<double>(t) - cat.phase_month) / 12.0);
    return cfg.base_rate * weight * seasonal;
}

/// Generates the labeled corpus. Each month owns an independent stream
/// keyed by derive_seed(seed, "synth:YYYY-MM") and consumed in a fixed
/// region-major, category-minor order, so output is byte-identical for a
/// given (config, seed) on every platform and months could generate in
/// parallel. Records appear in (month, region, category, draw index)
/// order with ids q-000001, q-000002, ...
inline corpus::Corpus generate_corpus(const SynthConfig& cfg, std::uint64_t seed) {
    validate_config(cfg);
    std::vector<corpus::QueryRecord> records;

    std::int64_t month_day = detail::parse_month(cfg.start_month);
    for (int t = 0; t < cfg.n_months; ++t) {
        const std::int64_t next_day = dates::next_month(month_day);
        const std::int64_t days_in_month = next_day - month_day;
        Rng rng(derive_seed(seed, "synth:" + detail::month_label(month_day)));
        for (const auto& region : cfg.regions) {
            for (const auto& cat : cfg.categories) {
                const double lambda = expected_rate(cfg, t, cat, region);
                const std::int64_t count = lambda > 0.0 ? rng.poisson(lambda) : 0;
                for (std::int64_t k = 0; k < count; ++k) {
                    corpus::QueryRecord rec;
                    const std::int64_t day =
                        month_day + static_cast<std::int64_t>(
                                        rng.uniform_below(static_cast<std::uint64_t>(days_in_month)));
                    const std::int64_t sec = static_cast<std::int64_t>(rng.uniform_below(86400));
                    rec.timestamp = day * 86400 + sec;
                    const std::int64_t n_tokens = rng.uniform_int(3, 8);
                    for (std::int64_t w = 0; w < n_tokens; ++w) {
                        const bool filler = cfg.filler_fraction > 0.0 &&
                                            rng.uniform01() < cfg.filler_fraction;
                        const auto& pool = filler ? cfg.filler_words : cat.keywords;
                        if (w) {
                            rec.text += ' ';
                        }
                        rec.text += pool[rng.uniform_below(pool.size())];
                    }
                    rec.zip = region.zip;
                    rec.category = cat.name;
                    char id[32];
                    std::snprintf(id, sizeof id, "q-%06zu", records.size() + 1);
                    rec.id = id;
                    records.push_back(std::move(rec));
                }
            }
        }
        month_day = next_day;
    }
    require(!records.empty(), "generator produced no records; raise base_rate or n_months");
    return corpus::Corpus(std::move(records));
}

/// The true monthly rate table behind a config, as
/// `month,zip,category,lambda` CSV with 6-decimal rates.
inline std::string rates_csv(const SynthConfig& cfg) {
    validate_config(cfg);
    std::string out = "month,zip,category,lambda\n";
    std::int64_t month_day = detail::parse_month(cfg.start_month);
    for (int t = 0; t < cfg.n_months; ++t) {
        const std::string label = detail::month_label(month_day);
        for (const auto& region : cfg.regions) {
            for (const auto& cat : cfg.categories) {
                char rate[32];
                std::snprintf(rate, sizeof rate, "%.6f", expected_rate(cfg, t, cat, region));
                out += label;
                out += ',';
                out += region.zip;
                out += ',';
                out += cat.name;
                out += ',';
                out += rate;
                out += '\n';
            }
        }
        month_day = dates::next_month(month_day);
    }
    return out;
}

/// Region rows of a config as a spatial::RegionTable (config order).
inline spatial::RegionTable region_table(const SynthConfig& cfg) {
    std::vector<spatial::SiteRow> rows;
    rows.reserve(cfg.regions.size());
    for (const auto& r : cfg.regions) {
        rows.push_back({r.zip, r.lat, r.lon, r.region});
    }
    return spatial::RegionTable(std::move(rows));
}

/// Region rows serialized as `zip,lat,lon,region` CSV (6-decimal coords).
inline std::string region_table_csv(const SynthConfig& cfg) {
    std::string out = "zip,lat,lon,region\n";
    for (const auto& r : cfg.regions) {
        char coords[64];
        std::snprintf(coords, sizeof coords, "%.6f,%.6f", r.lat, r.lon);
        out += r.zip;
        out += ',';
        out += coords;
        out += ',';
        out += corpus::detail::csv_quote(r.region);
        out += '\n';
    }
    return out;
}

} // namespace garden::synth
