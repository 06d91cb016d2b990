#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "garden/rng.hpp"
#include "garden/textfeat.hpp"

using namespace garden;
using Catch::Matchers::WithinAbs;

TEST_CASE("tokenize lowercases, strips punctuation and stopwords") {
    CHECK(textfeat::tokenize("Aphids on my roses!") ==
          std::vector<std::string>{"aphids", "roses"});
    CHECK(textfeat::tokenize("WHAT is THE best ph for tomatoes?") ==
          std::vector<std::string>{"best", "ph", "tomatoes"});
    // Single characters and pure digits are dropped; alphanumerics survive.
    CHECK(textfeat::tokenize("a b2 42 ok") == std::vector<std::string>{"b2", "ok"});
    CHECK(textfeat::tokenize("...!!!") == std::vector<std::string>{});
    CHECK(textfeat::tokenize("") == std::vector<std::string>{});
}

TEST_CASE("tokenize can retain stopwords") {
    const textfeat::TokenizeOptions keep{.remove_stopwords = false};
    CHECK(textfeat::tokenize("aphids on my roses", keep) ==
          std::vector<std::string>{"aphids", "on", "my", "roses"});
    CHECK(textfeat::is_stopword("the"));
    CHECK_FALSE(textfeat::is_stopword("rose"));
}

TEST_CASE("vocabulary counts document frequency and applies min_df") {
    const std::vector<std::vector<std::string>> docs{{"rose", "aphid"}, {"rose", "frost"}};

    SECTION("min_df = 1 keeps every term, sorted") {
        const auto vocab = textfeat::build_vocabulary(docs, 1);
        REQUIRE(vocab.terms() == std::vector<std::string>{"aphid", "frost", "rose"});
        CHECK(vocab.doc_freq() == std::vector<std::uint32_t>{1, 1, 2});
        CHECK(vocab.n_docs() == 2);
        CHECK(vocab.lookup("rose") == 2u);
        CHECK_FALSE(vocab.lookup("tulip").has_value());
    }
    SECTION("min_df = 2 keeps only shared terms") {
        const auto vocab = textfeat::build_vocabulary(docs, 2);
        REQUIRE(vocab.terms() == std::vector<std::string>{"rose"});
    }
    SECTION("repeats within one document count once") {
        const auto vocab =
            textfeat::build_vocabulary({{"rose", "rose", "rose"}, {"frost"}}, 1);
        CHECK(vocab.doc_freq()[1] == 1); // rose
    }
    CHECK_THROWS_AS(textfeat::build_vocabulary({}, 1), Error);
    CHECK_THROWS_AS(textfeat::build_vocabulary(docs, 3), Error); // empties the vocabulary
}

TEST_CASE("smoothed idf and normalized tf-idf match hand evaluation") {
    const std::vector<std::vector<std::string>> docs{{"rose", "aphid"}, {"rose", "frost"}};
    const auto model = textfeat::fit_tfidf(textfeat::build_vocabulary(docs, 1));

    // idf_t = ln((1+N)/(1+df_t)) + 1 with N = 2.
    const double idf_rare = std::log(3.0 / 2.0) + 1.0; // df = 1
    REQUIRE(model.idf.size() == 3);
    CHECK_THAT(model.idf[0], WithinAbs(idf_rare, 1e-12)); // aphid
    CHECK_THAT(model.idf[1], WithinAbs(idf_rare, 1e-12)); // frost
    CHECK_THAT(model.idf[2], WithinAbs(1.0, 1e-12));      // rose: ln(3/3)+1

    // Transforming d1: weights (1*idf) L2-normalized.
    const auto v = textfeat::tfidf_transform(model, docs[0]);
    const double norm = std::sqrt(1.0 + idf_rare * idf_rare);
    REQUIRE(v.entries.size() == 2);
    CHECK(v.entries[0].first == 0); // aphid
    CHECK_THAT(v.entries[0].second, WithinAbs(idf_rare / norm, 1e-9));
    CHECK(v.entries[1].first == 2); // rose
    CHECK_THAT(v.entries[1].second, WithinAbs(1.0 / norm, 1e-9));
    // Spot values from working the formula by hand.
    CHECK_THAT(v.entries[1].second, WithinAbs(0.5797, 5e-5));
    CHECK_THAT(v.entries[0].second, WithinAbs(0.8148, 5e-5));

    // Unit L2 norm.
    double sq = 0.0;
    for (const auto& [idx, w] : v.entries) {
        sq += w * w;
    }
    CHECK_THAT(sq, WithinAbs(1.0, 1e-12));
}

TEST_CASE("count transform keeps raw term frequencies") {
    const auto vocab =
        textfeat::build_vocabulary({{"rose", "aphid"}, {"rose", "frost"}}, 1);
    const auto v = textfeat::count_transform(vocab, {"rose", "rose", "aphid"});
    REQUIRE(v.entries.size() == 2);
    CHECK(v.entries[0] == std::pair<std::uint32_t, double>{0, 1.0}); // aphid
    CHECK(v.entries[1] == std::pair<std::uint32_t, double>{2, 2.0}); // rose
    CHECK_FALSE(v.all_oov);
}

TEST_CASE("fully out-of-vocabulary documents are flagged") {
    const auto vocab = textfeat::build_vocabulary({{"rose"}}, 1);
    const auto model = textfeat::fit_tfidf(vocab);
    for (const auto& v :
         {textfeat::count_transform(vocab, {"tulip", "daisy"}),
          textfeat::tfidf_transform(model, {"tulip"}), textfeat::count_transform(vocab, {})}) {
        CHECK(v.all_oov);
        CHECK(v.entries.empty());
    }
}

TEST_CASE("sparse entries use strictly increasing indices on random docs") {
    Rng gen(7);
    std::vector<std::vector<std::string>> docs;
    for (int d = 0; d < 50; ++d) {
        std::vector<std::string> doc;
        const auto len = gen.uniform_int(1, 12);
        for (int w = 0; w < len; ++w) {
            doc.push_back("w" + std::to_string(gen.uniform_int(0, 19)));
        }
        docs.push_back(std::move(doc));
    }
    const auto model = textfeat::fit_tfidf(textfeat::build_vocabulary(docs, 1));
    for (const auto& doc : docs) {
        for (const auto& v :
             {textfeat::count_transform(model.vocab, doc), textfeat::tfidf_transform(model, doc)}) {
            for (std::size_t i = 1; i < v.entries.size(); ++i) {
                REQUIRE(v.entries[i - 1].first < v.entries[i].first);
            }
            for (const auto& [idx, w] : v.entries) {
                REQUIRE(w > 0.0);
                REQUIRE(idx < model.vocab.size());
            }
        }
    }
}

TEST_CASE("tf-idf model serializes losslessly") {
    const std::vector<std::vector<std::string>> docs{
        {"rose", "aphid", "mildew"}, {"rose", "frost"}, {"frost", "mildew", "slug"}};
    const auto model = textfeat::fit_tfidf(textfeat::build_vocabulary(docs, 1));
    const auto restored = textfeat::tfidf_from_json(textfeat::to_json(model));
    CHECK(restored.vocab.terms() == model.vocab.terms());
    CHECK(restored.vocab.doc_freq() == model.vocab.doc_freq());
    CHECK(restored.vocab.n_docs() == model.vocab.n_docs());
    REQUIRE(restored.idf.size() == model.idf.size());
    for (std::size_t i = 0; i < model.idf.size(); ++i) {
        CHECK(restored.idf[i] == model.idf[i]); // bit-exact via full-precision dump
    }
    const auto a = textfeat::tfidf_transform(model, docs[0]);
    const auto b = textfeat::tfidf_transform(restored, docs[0]);
    CHECK(a.entries == b.entries);
}

TEST_CASE("vocabulary constructor validates invariants") {
    CHECK_THROWS_AS(textfeat::Vocabulary({"b", "a"}, {1, 1}, 2), Error); // unsorted
    CHECK_THROWS_AS(textfeat::Vocabulary({"a", "a"}, {1, 1}, 2), Error); // duplicate
    CHECK_THROWS_AS(textfeat::Vocabulary({"a"}, {3}, 2), Error);         // df > n_docs
    CHECK_THROWS_AS(textfeat::Vocabulary({"a"}, {1, 2}, 2), Error);      // size mismatch
}
