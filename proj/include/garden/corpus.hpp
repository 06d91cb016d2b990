#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "garden/dates.hpp"
#include "garden/error.hpp"
#include "garden/rng.hpp"

namespace garden::corpus {

/// One help-desk query. `text` is already cleaned, `timestamp` is UTC epoch
/// seconds, `zip` is exactly five ASCII digits, `category` is empty for
/// unlabeled records.
struct QueryRecord {
    std::string id;
    std::string text;
    std::int64_t timestamp = 0;
    std::string zip;
    std::optional<std::string> category;

    friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

inline bool valid_zip(std::string_view zip) {
    if (zip.size() != 5) {
        return false;
    }
    for (char c : zip) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

/// Strips control characters, collapses whitespace runs to single spaces and
/// trims the ends. Casing is preserved; lowercasing is the tokenizer's job.
inline std::string clean_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        const bool is_space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                              c == '\f' || c == '\v';
        const bool is_control = c < 0x20 || c == 0x7f;
        if (is_space || is_control) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(c));
    }
    require(!out.empty(), "empty text after cleaning");
    return out;
}

/// Validated, analysis-ready collection of records. Labels and regions are
/// the sorted distinct categories and zips actually present.
class Corpus {
public:
    Corpus() = default;

    explicit Corpus(std::vector<QueryRecord> records) : records_(std::move(records)) {
        std::set<std::string> ids;
        std::set<std::string> labels;
        std::set<std::string> regions;
        for (const auto& r : records_) {
            require(!r.id.empty(), "record id must be non-empty");
            require(ids.insert(r.id).second, "duplicate id \"", r.id, "\"");
            require(valid_zip(r.zip), "invalid zip \"", r.zip, "\"");
            require(!r.text.empty(), "empty text in record \"", r.id, "\"");
            if (r.category) {
                labels.insert(*r.category);
            }
            regions.insert(r.zip);
        }
        labels_.assign(labels.begin(), labels.end());
        regions_.assign(regions.begin(), regions.end());
    }

    const std::vector<QueryRecord>& records() const { return records_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::string>& regions() const { return regions_; }
    std::size_t size() const { return records_.size(); }

    friend bool operator==(const Corpus&, const Corpus&) = default;

private:
    std::vector<QueryRecord> records_;
    std::vector<std::string> labels_;
    std::vector<std::string> regions_;
};

enum class Format { Jsonl, Csv };

inline Format format_from_name(std::string_view name) {
    if (name == "jsonl") {
        return Format::Jsonl;
    }
    if (name == "csv") {
        return Format::Csv;
    }
    fail("unknown format \"", std::string(name), "\" (expected jsonl or csv)");
}

namespace detail {

inline constexpr const char* kCsvHeader = "id,text,timestamp,zip,category";

inline QueryRecord record_from_fields(std::string&& id, std::string&& text,
                                      const std::string& timestamp, std::string&& zip,
                                      std::optional<std::string>&& category,
                                      std::size_t line) {
    QueryRecord rec;
    rec.id = std::move(id);
    require(!rec.id.empty(), "empty id at line ", line);
    try {
        rec.text = clean_text(text);
    } catch (const Error& e) {
        fail(e.what(), " at line ", line);
    }
    try {
        rec.timestamp = dates::parse_timestamp(timestamp);
    } catch (const Error& e) {
        fail("invalid timestamp at line ", line, ": ", e.what());
    }
    require(valid_zip(zip), "invalid zip at line ", line, ": \"", zip, "\"");
    rec.zip = std::move(zip);
    rec.category = std::move(category);
    return rec;
}

inline std::vector<QueryRecord> parse_jsonl(std::string_view bytes) {
    std::vector<QueryRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= bytes.size()) {
        const std::size_t eol = bytes.find('\n', pos);
        std::string_view line = bytes.substr(pos, eol == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : eol - pos);
        pos = eol == std::string_view::npos ? bytes.size() + 1 : eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail("malformed json at line ", line_no, ": ", e.what());
        }
        require(j.is_object(), "malformed json at line ", line_no, ": not an object");
        for (const char* key : {"id", "text", "timestamp", "zip"}) {
            require(j.contains(key) && j[key].is_string(), "missing or non-string field \"",
                    key, "\" at line ", line_no);
        }
        std::optional<std::string> category;
        if (j.contains("category") && !j["category"].is_null()) {
            require(j["category"].is_string(), "non-string category at line ", line_no);
            category = j["category"].get<std::string>();
        }
        records.push_back(record_from_fields(
            j["id"].get<std::string>(), j["text"].get<std::string>(),
            j["timestamp"].get<std::string>(), j["zip"].get<std::string>(),
            std::move(category), line_no));
    }
    return records;
}

// RFC-4180 reader: quoted fields may contain commas, doubled quotes and
// line breaks. Returns rows of raw fields plus the physical line each row
// started on.
inline std::vector<std::pair<std::vector<std::string>, std::size_t>>
read_csv(std::string_view bytes) {
    std::vector<std::pair<std::vector<std::string>, std::size_t>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    std::size_t line_no = 1;
    std::size_t row_start_line = 1;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    const auto end_row = [&] {
        end_field();
        const bool blank = row.size() == 1 && row[0].empty();
        if (!blank) {
            rows.emplace_back(std::move(row), row_start_line);
        }
        row.clear();
        row_start_line = line_no;
    };

    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const char c = bytes[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line_no;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            require(field.empty() && !field_was_quoted, "stray quote at line ", line_no);
            in_quotes = true;
            field_was_quoted = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            ++line_no;
            end_row();
            break;
        default:
            field.push_back(c);
            break;
        }
    }
    require(!in_quotes, "unterminated quote at line ", line_no);
    if (!field.empty() || field_was_quoted || !row.empty()) {
        end_row();
    }
    return rows;
}

inline std::vector<QueryRecord> parse_csv(std::string_view bytes) {
    const auto rows = read_csv(bytes);
    require(!rows.empty(), "csv input has no header row");
    const auto& header = rows.front().first;
    std::string joined;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) {
            joined.push_back(',');
        }
        joined += header[i];
    }
    require(joined == kCsvHeader, "csv header must be \"", kCsvHeader, "\", got \"", joined,
            "\"");
    std::vector<QueryRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        auto fields = rows[r].first;
        const std::size_t line = rows[r].second;
        require(fields.size() == 5, "expected 5 fields at line ", line, ", got ",
                fields.size());
        std::optional<std::string> category;
        if (!fields[4].empty()) {
            category = std::move(fields[4]);
        }
        records.push_back(record_from_fields(std::move(fields[0]), std::move(fields[1]),
                                             fields[2], std::move(fields[3]),
                                             std::move(category), line));
    }
    return records;
}

inline std::string csv_quote(std::string_view field) {
    const bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs) {
        return std::string(field);
    }
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace detail

/// Parses raw JSONL or CSV bytes into a validated corpus. Errors carry the
/// offending line number.
inline Corpus parse_records(std::string_view bytes, Format format) {
    auto records = format == Format::Jsonl ? detail::parse_jsonl(bytes)
                                           : detail::parse_csv(bytes);
    return Corpus(std::move(records));
}

/// Emits the canonical on-disk form; parse_records(serialize_records(c)) == c.
inline std::string serialize_records(const Corpus& corpus, Format format) {
    std::string out;
    if (format == Format::Jsonl) {
        for (const auto& r : corpus.records()) {
            nlohmann::json j;
            j["id"] = r.id;
            j["text"] = r.text;
            j["timestamp"] = dates::format_timestamp(r.timestamp);
            j["zip"] = r.zip;
            if (r.category) {
                j["category"] = *r.category;
            }
            out += j.dump();
            out.push_back('\n');
        }
    } else {
        out = detail::kCsvHeader;
        out.push_back('\n');
        for (const auto& r : corpus.records()) {
            out += detail::csv_quote(r.id);
            out.push_back(',');
            out += detail::csv_quote(r.text);
            out.push_back(',');
            out += dates::format_timestamp(r.timestamp);
            out.push_back(',');
            out += r.zip;
            out.push_back(',');
            if (r.category) {
                out += detail::csv_quote(*r.category);
            }
            out.push_back('\n');
        }
    }
    return out;
}

struct SplitRatios {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

struct SplitIndex {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
    SplitRatios ratios;
};

namespace detail {

inline std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

// Category -> record indices, iterated in sorted category order so the
// result never depends on record order beyond the per-category sequences.
inline std::map<std::string, std::vector<std::size_t>>
indices_by_category(const std::vector<std::string>& labels) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        groups[labels[i]].push_back(i);
    }
    return groups;
}

} // namespace detail

/// Deterministic stratified train/val/test split. Per category the indices
/// are shuffled by a category-derived seed and cut at round-half-up of the
/// cumulative ratios, so each part matches the global ratio within one
/// record per category.
inline SplitIndex stratified_split(const Corpus& corpus, SplitRatios ratios,
                                   std::uint64_t seed) {
    require(ratios.train > 0 && ratios.val > 0 && ratios.test > 0,
            "split ratios must be positive");
    const double sum = ratios.train + ratios.val + ratios.test;
    require(std::abs(sum - 1.0) <= 1e-9, "split ratios must sum to 1, got ", sum);

    std::vector<std::string> labels;
    labels.reserve(corpus.size());
    for (const auto& r : corpus.records()) {
        require(r.category.has_value(), "record \"", r.id,
                "\" has no category; stratified_split requires labeled records");
        labels.push_back(*r.category);
    }

    SplitIndex split;
    split.seed = seed;
    split.ratios = ratios;
    for (auto& [category, indices] : detail::indices_by_category(labels)) {
        require(indices.size() >= 3, "category \"", category, "\" has ", indices.size(),
                " records; need at least 3 to split");
        Rng rng(derive_seed(seed, "split:" + category));
        rng.shuffle(indices);
        const double n = static_cast<double>(indices.size());
        std::size_t cut1 = detail::round_half_up(n * ratios.train);
        std::size_t cut2 = detail::round_half_up(n * (ratios.train + ratios.val));
        cut1 = std::min(cut1, indices.size());
        cut2 = std::min(std::max(cut2, cut1), indices.size());
        split.train.insert(split.train.end(), indices.begin(), indices.begin() + cut1);
        split.val.insert(split.val.end(), indices.begin() + cut1, indices.begin() + cut2);
        split.test.insert(split.test.end(), indices.begin() + cut2, indices.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

/// Stratified fold assignment for cross-validation; fold boundaries use the
/// same rounding rule as stratified_split. Fold count k must not exceed any
/// category size.
inline std::vector<std::vector<std::size_t>>
stratified_folds(const std::vector<std::string>& labels, std::size_t k, std::uint64_t seed) {
    require(k >= 2, "need at least 2 folds");
    std::vector<std::vector<std::size_t>> folds(k);
    for (auto& [category, indices] : detail::indices_by_category(labels)) {
        require(indices.size() >= k, "category \"", category, "\" has ", indices.size(),
                " records; need at least k=", k);
        Rng rng(derive_seed(seed, "fold:" + category));
        rng.shuffle(indices);
        const double n = static_cast<double>(indices.size());
        std::size_t prev = 0;
        for (std::size_t f = 0; f < k; ++f) {
            std::size_t cut = detail::round_half_up(n * static_cast<double>(f + 1) /
                                                    static_cast<double>(k));
            cut = std::min(std::max(cut, prev), indices.size());
            folds[f].insert(folds[f].end(), indices.begin() + prev, indices.begin() + cut);
            prev = cut;
        }
    }
    for (auto& fold : folds) {
        std::sort(fold.begin(), fold.end());
    }
    return folds;
}

} // namespace garden::corpus
