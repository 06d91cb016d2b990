#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "garden/error.hpp"
#include "garden/version.hpp"

namespace garden::textfeat {

/// Built-in stopword list, 30 common English function words. Shipped
/// verbatim as data/stopwords.txt so the asset and the code cannot drift.
inline constexpr std::array<std::string_view, 30> kStopwords = {
    "a",   "an",  "and",  "are",  "as",   "at",   "be",   "but", "by",   "for",
    "from", "has", "have", "how",  "in",   "is",   "it",   "my",  "of",   "on",
    "or",  "that", "the",  "this", "to",   "was",  "what", "when", "will", "with",
};

inline bool is_stopword(std::string_view token) {
    return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

struct TokenizeOptions {
    bool remove_stopwords = true;
};

/// Lowercases and splits on maximal non-alphanumeric runs, then drops
/// tokens shorter than 2 characters, pure-digit tokens, and (unless
/// disabled) stopwords.
inline std::vector<std::string> tokenize(std::string_view text, TokenizeOptions options = {}) {
    std::vector<std::string> tokens;
    std::string current;
    bool all_digits = true;
    const auto flush = [&] {
        if (current.size() >= 2 && !all_digits &&
            (!options.remove_stopwords || !is_stopword(current))) {
            tokens.push_back(current);
        }
        current.clear();
        all_digits = true;
    };
    for (unsigned char c : text) {
        if (c >= '0' && c <= '9') {
            current.push_back(static_cast<char>(c));
        } else if (c >= 'a' && c <= 'z') {
            current.push_back(static_cast<char>(c));
            all_digits = false;
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
            all_digits = false;
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

/// Frozen term list with document frequencies. Terms are sorted, so term
/// indices are stable across runs and platforms.
class Vocabulary {
public:
    Vocabulary() = default;

    Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq,
               std::uint32_t n_docs)
        : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs) {
        require(terms_.size() == doc_freq_.size(), "vocabulary: terms/doc_freq size mismatch");
        require(std::is_sorted(terms_.begin(), terms_.end()), "vocabulary: terms not sorted");
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            require(i == 0 || terms_[i] != terms_[i - 1], "vocabulary: duplicate term \"",
                    terms_[i], "\"");
            require(doc_freq_[i] >= 1 && doc_freq_[i] <= n_docs_,
                    "vocabulary: doc_freq out of range for \"", terms_[i], "\"");
            index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
        }
    }

    const std::vector<std::string>& terms() const { return terms_; }
    const std::vector<std::uint32_t>& doc_freq() const { return doc_freq_; }
    std::uint32_t n_docs() const { return n_docs_; }
    std::size_t size() const { return terms_.size(); }

    std::optional<std::uint32_t> lookup(std::string_view term) const {
        auto it = index_.find(std::string(term));
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

private:
    std::vector<std::string> terms_;
    std::vector<std::uint32_t> doc_freq_;
    std::uint32_t n_docs_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Keeps terms whose document frequency is at least min_df.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                                   std::uint32_t min_df = 1) {
    require(!docs.empty(), "build_vocabulary: no documents");
    require(min_df >= 1, "build_vocabulary: min_df must be >= 1");
    std::map<std::string, std::uint32_t> df;
    for (const auto& doc : docs) {
        std::map<std::string, bool> seen;
        for (const auto& token : doc) {
            if (!seen.emplace(token, true).second) {
                continue;
            }
            ++df[token];
        }
    }
    std::vector<std::string> terms;
    std::vector<std::uint32_t> freqs;
    for (const auto& [term, freq] : df) {
        if (freq >= min_df) {
            terms.push_back(term);
            freqs.push_back(freq);
        }
    }
    require(!terms.empty(), "build_vocabulary: vocabulary empty at min_df=", min_df);
    return Vocabulary(std::move(terms), std::move(freqs),
                      static_cast<std::uint32_t>(docs.size()));
}

/// Vocabulary plus smoothed IDF weights: idf[t] = ln((1+N)/(1+df_t)) + 1.
struct TfIdfModel {
    Vocabulary vocab;
    std::vector<double> idf;
};

inline TfIdfModel fit_tfidf(Vocabulary vocab) {
    TfIdfModel model;
    model.idf.reserve(vocab.size());
    const double n = static_cast<double>(vocab.n_docs());
    for (std::uint32_t df : vocab.doc_freq()) {
        model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
    }
    model.vocab = std::move(vocab);
    return model;
}

/// Sparse feature vector; entries are (term index, weight) with strictly
/// increasing indices and non-zero weights. `all_oov` marks documents with
/// no in-vocabulary token.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;
    bool all_oov = false;

    double norm() const {
        double s = 0.0;
        for (const auto& [idx, w] : entries) {
            s += w * w;
        }
        return std::sqrt(s);
    }

    double value_at(std::uint32_t index) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                   [](const auto& e, std::uint32_t i) { return e.first < i; });
        return it != entries.end() && it->first == index ? it->second : 0.0;
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

namespace detail {

inline std::vector<std::pair<std::uint32_t, double>>
term_counts(const Vocabulary& vocab, const std::vector<std::string>& doc) {
    std::map<std::uint32_t, double> counts;
    for (const auto& token : doc) {
        if (auto idx = vocab.lookup(token)) {
            counts[*idx] += 1.0;
        }
    }
    return {counts.begin(), counts.end()};
}

} // namespace detail

/// Raw in-vocabulary term counts (the multinomial NB feature path).
inline SparseVector count_transform(const Vocabulary& vocab,
                                    const std::vector<std::string>& doc) {
    SparseVector v;
    v.entries = detail::term_counts(vocab, doc);
    v.all_oov = v.entries.empty();
    return v;
}

/// count * idf per in-vocabulary term, then L2-normalized. All-OOV
/// documents come back as the flagged zero vector.
inline SparseVector tfidf_transform(const TfIdfModel& model,
                                    const std::vector<std::string>& doc) {
    SparseVector v;
    v.entries = detail::term_counts(model.vocab, doc);
    if (v.entries.empty()) {
        v.all_oov = true;
        return v;
    }
    for (auto& [idx, w] : v.entries) {
        w *= model.idf[idx];
    }
    const double norm = v.norm();
    for (auto& [idx, w] : v.entries) {
        w /= norm;
    }
    return v;
}

inline nlohmann::json to_json(const TfIdfModel& model) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "tfidf_model";
    j["n_docs"] = model.vocab.n_docs();
    j["terms"] = model.vocab.terms();
    j["doc_freq"] = model.vocab.doc_freq();
    j["idf"] = model.idf;
    return j;
}

inline TfIdfModel tfidf_from_json(const nlohmann::json& j) {
    require(j.value("kind", "") == "tfidf_model", "not a tfidf_model document");
    Vocabulary vocab(j.at("terms").get<std::vector<std::string>>(),
                     j.at("doc_freq").get<std::vector<std::uint32_t>>(),
                     j.at("n_docs").get<std::uint32_t>());
    TfIdfModel model = fit_tfidf(std::move(vocab));
    const auto stored = j.at("idf").get<std::vector<double>>();
    require(stored.size() == model.idf.size(), "tfidf_model: idf length mismatch");
    model.idf = stored;
    return model;
}

} // namespace garden::textfeat
