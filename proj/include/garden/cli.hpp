#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "garden/classify.hpp"
#include "garden/corpus.hpp"
#include "garden/error.hpp"
#include "garden/forecast.hpp"
#include "garden/io.hpp"
#include "garden/report.hpp"
#include "garden/spatial.hpp"
#include "garden/stats.hpp"
#include "garden/synth.hpp"
#include "garden/textfeat.hpp"
#include "garden/version.hpp"

namespace garden::cli {

struct GlobalOpts {
    std::uint64_t seed = 42;
    unsigned threads = 1;
};

namespace detail {

// ---------------------------------------------------------------------------
// Small parsing helpers
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::vector<double> parse_double_list(const std::string& s, const char* flag) {
    std::vector<double> out;
    for (const auto& p : split_commas(s)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(p, &pos));
            require(pos == p.size(), "trailing characters");
        } catch (const std::exception&) {
            fail("invalid number \"", p, "\" in ", flag);
        }
    }
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s, const char* flag) {
    std::vector<int> out;
    for (const auto& p : split_commas(s)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(p, &pos));
            require(pos == p.size(), "trailing characters");
        } catch (const std::exception&) {
            fail("invalid integer \"", p, "\" in ", flag);
        }
    }
    return out;
}

inline std::pair<double, double> parse_double_pair(const std::string& s, const char* flag) {
    const auto v = parse_double_list(s, flag);
    require(v.size() == 2, flag, " expects \"lo,hi\"");
    return {v[0], v[1]};
}

inline std::pair<int, int> parse_int_pair(const std::string& s, const char* flag) {
    const auto v = parse_int_list(s, flag);
    require(v.size() == 2, flag, " expects \"lo,hi\"");
    return {v[0], v[1]};
}

inline corpus::SplitRatios parse_ratios(const std::string& s) {
    const auto v = parse_double_list(s, "--ratios");
    require(v.size() == 3, "--ratios expects \"train,val,test\"");
    return {v[0], v[1], v[2]};
}

inline corpus::Format detect_format(const std::string& path, const std::string& flag) {
    if (flag != "auto") {
        return corpus::format_from_name(flag);
    }
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        return corpus::Format::Csv;
    }
    return corpus::Format::Jsonl;
}

inline corpus::Corpus load_corpus(const std::string& path, const std::string& format_flag) {
    return corpus::parse_records(io::read_file(path), detect_format(path, format_flag));
}

/// A parsed corpus together with the provenance entry (path, content hash,
/// size) that every JSON report embeds.
struct CorpusInput {
    corpus::Corpus corpus;
    nlohmann::ordered_json provenance;
};

inline CorpusInput load_corpus_input(const std::string& path, const std::string& format_flag) {
    const std::string bytes = io::read_file(path);
    return {corpus::parse_records(bytes, detect_format(path, format_flag)),
            report::provenance_entry(path, bytes)};
}

// ---------------------------------------------------------------------------
// Pipeline helpers
// ---------------------------------------------------------------------------

inline std::vector<std::string> record_labels(const corpus::Corpus& c) {
    std::vector<std::string> labels;
    labels.reserve(c.size());
    for (const auto& r : c.records()) {
        require(r.category.has_value(), "record \"", r.id,
                "\" has no category label; this command needs labeled data");
        labels.push_back(*r.category);
    }
    return labels;
}

inline std::vector<std::vector<std::string>> tokenize_all(const corpus::Corpus& c) {
    std::vector<std::vector<std::string>> docs;
    docs.reserve(c.size());
    for (const auto& r : c.records()) {
        docs.push_back(textfeat::tokenize(r.text));
    }
    return docs;
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = i;
    }
    return rows;
}

inline corpus::Corpus corpus_subset(const corpus::Corpus& c,
                                    const std::vector<std::size_t>& rows) {
    std::vector<corpus::QueryRecord> records;
    records.reserve(rows.size());
    for (std::size_t r : rows) {
        records.push_back(c.records()[r]);
    }
    return corpus::Corpus(std::move(records));
}

inline corpus::Corpus filter_category(const corpus::Corpus& c, const std::string& category) {
    std::vector<corpus::QueryRecord> records;
    for (const auto& r : c.records()) {
        if (r.category && *r.category == category) {
            records.push_back(r);
        }
    }
    require(!records.empty(), "no records with category \"", category, "\"");
    return corpus::Corpus(std::move(records));
}

/// Replicates a corpus to round(factor * n) records by cycling through the
/// base records; replicas get fresh ids so the result stays a valid corpus.
inline corpus::Corpus replicate_corpus(const corpus::Corpus& base, double factor) {
    const std::size_t n = base.size();
    const auto m =
        static_cast<std::size_t>(std::llround(factor * static_cast<double>(n)));
    require(m >= 1, "growth factor ", factor, " yields an empty corpus");
    std::vector<corpus::QueryRecord> records;
    records.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        corpus::QueryRecord rec = base.records()[i % n];
        char id[32];
        std::snprintf(id, sizeof id, "r-%07zu", i + 1);
        rec.id = id;
        records.push_back(std::move(rec));
    }
    return corpus::Corpus(std::move(records));
}

/// Feature space fit on `fit_rows` only, then applied to every record.
struct Features {
    std::vector<std::vector<std::string>> docs;
    textfeat::TfIdfModel tfidf;
    classify::Dataset dataset;
};

inline Features build_features(const corpus::Corpus& c,
                               const std::vector<std::string>& labels,
                               const std::vector<std::size_t>& fit_rows,
                               std::uint32_t min_df) {
    Features f;
    f.docs = tokenize_all(c);
    std::vector<std::vector<std::string>> fit_docs;
    fit_docs.reserve(fit_rows.size());
    for (std::size_t r : fit_rows) {
        fit_docs.push_back(f.docs[r]);
    }
    f.tfidf = textfeat::fit_tfidf(textfeat::build_vocabulary(fit_docs, min_df));
    f.dataset = classify::make_dataset(f.docs, labels, f.tfidf);
    return f;
}

// ---------------------------------------------------------------------------
// Classifier bundle persistence
// ---------------------------------------------------------------------------

inline void save_bundle(const std::string& path, const classify::Classifier& model,
                        const textfeat::TfIdfModel& tfidf) {
    nlohmann::ordered_json j = report::report_header("classifier_bundle");
    j["family"] = classify::family_name(model.family());
    j["tfidf"] = textfeat::to_json(tfidf);
    switch (model.family()) {
    case classify::Family::Nb:
        j["model"] = classify::to_json(model.as<classify::NbModel>());
        break;
    case classify::Family::Lr:
        j["model"] = classify::to_json(model.as<classify::LrModel>());
        break;
    case classify::Family::Dt:
        j["model"] = classify::to_json(model.as<classify::DtModel>());
        break;
    }
    io::write_file(path, j.dump(2) + "\n");
}

struct LoadedBundle {
    classify::Classifier model;
    textfeat::TfIdfModel tfidf;
};

inline LoadedBundle load_bundle(const std::string& path, const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        fail("malformed model file ", path, ": ", e.what());
    }
    require(j.value("kind", "") == "classifier_bundle", path, " is not a classifier bundle");
    const int schema = j.value("schema_version", -1);
    require(schema >= 1 && schema <= kSchemaVersion, "unsupported schema_version ", schema,
            " in ", path);
    auto tfidf = textfeat::tfidf_from_json(j.at("tfidf"));
    const auto family = classify::family_from_name(j.at("family").get<std::string>());
    try {
        switch (family) {
        case classify::Family::Nb:
            return {classify::Classifier(classify::nb_from_json(j.at("model"))),
                    std::move(tfidf)};
        case classify::Family::Lr:
            return {classify::Classifier(classify::lr_from_json(j.at("model"))),
                    std::move(tfidf)};
        case classify::Family::Dt:
            return {classify::Classifier(classify::dt_from_json(j.at("model"))),
                    std::move(tfidf)};
        }
    } catch (const nlohmann::json::exception& e) {
        fail("malformed model file ", path, ": ", e.what());
    }
    fail("malformed model file ", path);
}

// ---------------------------------------------------------------------------
// Shared model-spec flags
// ---------------------------------------------------------------------------

struct HyperOpts {
    std::string family;
    double nb_alpha = 1.0;
    double lr_rate = 0.5;
    double lr_l2 = 1e-3;
    int lr_max_iter = 500;
    double lr_tol = 1e-7;
    int dt_max_depth = 20;
    int dt_min_split = 2;
    std::uint32_t min_df = 1;
};

inline void add_hyper_flags(CLI::App* cmd, HyperOpts& h, bool with_family = true) {
    if (with_family) {
        cmd->add_option("-m,--model", h.family, "Classifier family: nb, lr, or dt")
            ->required()
            ->check(CLI::IsMember({"nb", "lr", "dt"}));
    }
    cmd->add_option("--min-df", h.min_df, "Minimum document frequency for vocabulary terms")
        ->capture_default_str();
    cmd->add_option("--nb-alpha", h.nb_alpha, "NB Laplace smoothing")->capture_default_str();
    cmd->add_option("--lr-rate", h.lr_rate, "LR learning rate")->capture_default_str();
    cmd->add_option("--lr-l2", h.lr_l2, "LR L2 penalty")->capture_default_str();
    cmd->add_option("--lr-max-iter", h.lr_max_iter, "LR iteration cap")->capture_default_str();
    cmd->add_option("--lr-tol", h.lr_tol, "LR loss-improvement stop")->capture_default_str();
    cmd->add_option("--dt-max-depth", h.dt_max_depth, "DT depth cap")->capture_default_str();
    cmd->add_option("--dt-min-split", h.dt_min_split, "DT minimum samples to split")
        ->capture_default_str();
}

inline classify::ModelSpec to_spec(const HyperOpts& h) {
    classify::ModelSpec spec;
    spec.family = classify::family_from_name(h.family);
    spec.nb_alpha = h.nb_alpha;
    spec.lr = {h.lr_rate, h.lr_l2, h.lr_max_iter, h.lr_tol};
    spec.dt = {h.dt_max_depth, h.dt_min_split};
    return spec;
}

inline nlohmann::ordered_json spec_json(const classify::ModelSpec& spec) {
    nlohmann::ordered_json j;
    j["family"] = classify::family_name(spec.family);
    switch (spec.family) {
    case classify::Family::Nb:
        j["nb_alpha"] = spec.nb_alpha;
        break;
    case classify::Family::Lr:
        j["lr_rate"] = spec.lr.learning_rate;
        j["lr_l2"] = spec.lr.l2;
        j["lr_max_iter"] = spec.lr.max_iter;
        j["lr_tol"] = spec.lr.tol;
        break;
    case classify::Family::Dt:
        j["dt_max_depth"] = spec.dt.max_depth;
        j["dt_min_split"] = spec.dt.min_samples_split;
        break;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Shared forecast flags
// ---------------------------------------------------------------------------

struct ForecastOpts {
    std::string model = "auto-arima";
    std::string freq = "monthly";
    int p = 1, d = 0, q = 1;
    int max_p = 2, max_d = 1, max_q = 2;
    int period = 0; // 0 = pick by granularity: 12 monthly, 52 weekly
};

inline void add_forecast_flags(CLI::App* cmd, ForecastOpts& f) {
    cmd->add_option("-m,--model", f.model,
                    "Forecast model: arima, auto-arima, hw, snaive")
        ->capture_default_str()
        ->check(CLI::IsMember(
            {"arima", "auto-arima", "hw", "holt-winters", "snaive", "seasonal-naive"}));
    cmd->add_option("--granularity", f.freq, "Aggregation period: monthly or weekly")
        ->capture_default_str()
        ->check(CLI::IsMember({"monthly", "weekly"}));
    cmd->add_option("-p", f.p, "AR order (arima)")->capture_default_str();
    cmd->add_option("-d", f.d, "Differencing order (arima)")->capture_default_str();
    cmd->add_option("-q", f.q, "MA order (arima)")->capture_default_str();
    cmd->add_option("--max-p", f.max_p, "AR search bound (auto-arima)")->capture_default_str();
    cmd->add_option("--max-d", f.max_d, "Differencing search bound (auto-arima)")
        ->capture_default_str();
    cmd->add_option("--max-q", f.max_q, "MA search bound (auto-arima)")->capture_default_str();
    cmd->add_option("--period", f.period,
                    "Season length for hw/snaive (0 = 12 monthly, 52 weekly)")
        ->capture_default_str();
}

inline forecast::ForecastSpec to_forecast_spec(const ForecastOpts& f) {
    forecast::ForecastSpec spec;
    spec.kind = forecast::forecast_kind_from_name(f.model);
    spec.p = f.p;
    spec.d = f.d;
    spec.q = f.q;
    spec.max_p = f.max_p;
    spec.max_d = f.max_d;
    spec.max_q = f.max_q;
    spec.period = f.period > 0 ? f.period : (f.freq == "weekly" ? 52 : 12);
    return spec;
}

/// Fits the requested model and returns the path plus a JSON description
/// of the fitted model.
inline std::pair<forecast::ForecastPath, nlohmann::ordered_json>
fit_and_forecast(const std::vector<double>& y, const forecast::ForecastSpec& spec,
                 int horizon) {
    nlohmann::ordered_json desc;
    switch (spec.kind) {
    case forecast::ForecastSpec::Kind::Arima:
    case forecast::ForecastSpec::Kind::AutoArima: {
        const forecast::ArimaModel m =
            spec.kind == forecast::ForecastSpec::Kind::Arima
                ? forecast::fit_arima(y, spec.p, spec.d, spec.q)
                : forecast::select_arima(y, spec.max_p, spec.max_d, spec.max_q);
        desc["family"] = "arima";
        desc["p"] = m.p;
        desc["d"] = m.d;
        desc["q"] = m.q;
        desc["intercept"] = m.intercept;
        desc["phi"] = m.phi;
        desc["theta"] = m.theta;
        desc["sigma2"] = m.sigma2;
        desc["aic"] = m.aic;
        return {forecast::arima_forecast(m, y, horizon), std::move(desc)};
    }
    case forecast::ForecastSpec::Kind::HoltWinters: {
        const forecast::HoltWintersModel m = forecast::fit_holt_winters(y, spec.period);
        desc["family"] = "holt_winters";
        desc["period"] = m.period;
        desc["alpha"] = m.alpha;
        desc["beta"] = m.beta;
        desc["gamma"] = m.gamma;
        desc["sse"] = m.sse;
        desc["resid_std"] = m.resid_std;
        return {forecast::hw_forecast(m, horizon), std::move(desc)};
    }
    case forecast::ForecastSpec::Kind::SeasonalNaive: {
        desc["family"] = "seasonal_naive";
        desc["period"] = spec.period;
        return {forecast::seasonal_naive(y, spec.period, horizon), std::move(desc)};
    }
    }
    fail("bad forecast kind");
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
    std::string config;
    std::string out;
    std::string format = "auto";
    std::string rates;
    std::string regions_out;
};

inline void cmd_synth(const SynthOpts& o, const GlobalOpts& g) {
    const std::string cfg_bytes = io::read_file(o.config);
    const auto cfg = synth::parse_synth_config(cfg_bytes);
    const auto corpus = synth::generate_corpus(cfg, g.seed);
    io::write_file(o.out, corpus::serialize_records(corpus, detect_format(o.out, o.format)));
    if (!o.rates.empty()) {
        io::write_file(o.rates, synth::rates_csv(cfg));
    }
    if (!o.regions_out.empty()) {
        io::write_file(o.regions_out, synth::region_table_csv(cfg));
    }
    std::cerr << "wrote " << corpus.size() << " records to " << o.out << "\n";
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

struct SplitOpts {
    std::string input;
    std::string format = "auto";
    std::string ratios = "0.7,0.15,0.15";
    std::string train_out;
    std::string val_out;
    std::string test_out;
};

inline void cmd_split(const SplitOpts& o, const GlobalOpts& g) {
    const auto corpus = load_corpus(o.input, o.format);
    const auto idx = corpus::stratified_split(corpus, parse_ratios(o.ratios), g.seed);
    const auto write_part = [&](const std::string& path, const std::vector<std::size_t>& rows) {
        io::write_file(path, corpus::serialize_records(corpus_subset(corpus, rows),
                                                       detect_format(path, o.format)));
    };
    write_part(o.train_out, idx.train);
    write_part(o.val_out, idx.val);
    write_part(o.test_out, idx.test);
    std::cerr << "split " << corpus.size() << " records: train=" << idx.train.size()
              << " val=" << idx.val.size() << " test=" << idx.test.size() << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    std::string input;
    std::string format = "auto";
    std::string out;
    HyperOpts hyper;
};

inline void cmd_train(const TrainOpts& o, const GlobalOpts&) {
    const auto corpus = load_corpus(o.input, o.format);
    const auto labels = record_labels(corpus);
    const auto rows = all_rows(corpus.size());
    const auto features = build_features(corpus, labels, rows, o.hyper.min_df);
    const auto model = classify::train_model(to_spec(o.hyper), features.dataset, rows);
    save_bundle(o.out, model, features.tfidf);
    std::cerr << "trained " << o.hyper.family << " on " << corpus.size() << " records ("
              << features.tfidf.vocab.size() << " vocabulary terms) -> " << o.out << "\n";
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
    std::string input;
    std::string format = "auto";
    std::string model_file;
    std::string out;
};

inline void cmd_evaluate(const EvaluateOpts& o, const GlobalOpts& g) {
    const std::string model_bytes = io::read_file(o.model_file);
    const auto bundle = load_bundle(o.model_file, model_bytes);
    auto [corpus, provenance] = load_corpus_input(o.input, o.format);
    const auto labels = record_labels(corpus);

    std::vector<std::string> predictions;
    predictions.reserve(corpus.size());
    for (const auto& rec : corpus.records()) {
        const auto doc = textfeat::tokenize(rec.text);
        predictions.push_back(
            bundle.model.predict(textfeat::count_transform(bundle.tfidf.vocab, doc),
                                 textfeat::tfidf_transform(bundle.tfidf, doc)));
    }
    const auto rep = classify::evaluate(predictions, labels);

    std::cout << "model: " << classify::family_name(bundle.model.family()) << "  (n="
              << corpus.size() << ")\n"
              << classify::to_text_table(rep);
    if (!o.out.empty()) {
        nlohmann::ordered_json j = report::report_header("evaluation");
        j["seed"] = g.seed;
        j["inputs"] = nlohmann::ordered_json::array(
            {std::move(provenance), report::provenance_entry(o.model_file, model_bytes)});
        j["family"] = classify::family_name(bundle.model.family());
        j["n_records"] = corpus.size();
        j["metrics"] = classify::report_to_json(rep);
        io::write_file(o.out, report::fixed_json_dump(j));
    }
}

// ---------------------------------------------------------------------------
// cv
// ---------------------------------------------------------------------------

struct CvOpts {
    std::string input;
    std::string format = "auto";
    std::size_t folds = 5;
    std::string out;
    HyperOpts hyper;
};

inline void cmd_cv(const CvOpts& o, const GlobalOpts& g) {
    auto [corpus, provenance] = load_corpus_input(o.input, o.format);
    const auto labels = record_labels(corpus);
    const auto features =
        build_features(corpus, labels, all_rows(corpus.size()), o.hyper.min_df);
    const auto result =
        classify::k_fold_cv(features.dataset, o.folds, g.seed, to_spec(o.hyper), g.threads);

    for (std::size_t f = 0; f < result.fold_reports.size(); ++f) {
        std::cout << "fold " << f + 1 << ": macro_f1=" << std::fixed << std::setprecision(4)
                  << result.fold_reports[f].macro_f1
                  << " accuracy=" << result.fold_reports[f].accuracy << "\n";
    }
    std::cout << "macro_f1 = " << result.mean_macro_f1 << " +/- " << result.std_macro_f1
              << " over " << o.folds << " folds\n";
    std::cout.unsetf(std::ios::fixed);

    if (!o.out.empty()) {
        nlohmann::ordered_json j = report::report_header("cv");
        j["seed"] = g.seed;
        j["inputs"] = nlohmann::ordered_json::array({std::move(provenance)});
        j["spec"] = spec_json(to_spec(o.hyper));
        j["folds"] = o.folds;
        nlohmann::ordered_json per_fold = nlohmann::ordered_json::array();
        for (const auto& r : result.fold_reports) {
            per_fold.push_back({{"macro_f1", r.macro_f1}, {"accuracy", r.accuracy}});
        }
        j["per_fold"] = std::move(per_fold);
        j["mean_macro_f1"] = result.mean_macro_f1;
        j["std_macro_f1"] = result.std_macro_f1;
        io::write_file(o.out, report::fixed_json_dump(j));
    }
}

// ---------------------------------------------------------------------------
// tune
// ---------------------------------------------------------------------------

struct TuneOpts {
    std::string input;
    std::string format = "auto";
    std::string method = "grid";
    std::size_t folds = 5;
    std::size_t draws = 20;
    std::string out;
    HyperOpts hyper;
    std::string alphas = "0.1,0.5,1.0,2.0";
    std::string rates = "0.1,0.5,1.0";
    std::string l2s = "0.0001,0.001,0.01";
    std::string depths = "5,10,20";
    std::string min_splits = "2,5";
    std::string alpha_range = "0.1,10.0";
    std::string rate_range = "0.01,1.0";
    std::string l2_range = "1e-6,0.1";
    std::string depth_range = "2,20";
    std::string min_split_range = "2,10";
};

inline void cmd_tune(const TuneOpts& o, const GlobalOpts& g) {
    auto [corpus, provenance] = load_corpus_input(o.input, o.format);
    const auto labels = record_labels(corpus);
    const auto features =
        build_features(corpus, labels, all_rows(corpus.size()), o.hyper.min_df);
    const auto family = classify::family_from_name(o.hyper.family);
    const auto base = to_spec(o.hyper);

    classify::SearchResult result;
    if (o.method == "grid") {
        classify::GridSpec grid;
        grid.family = family;
        grid.nb_alphas = parse_double_list(o.alphas, "--alphas");
        grid.lr_rates = parse_double_list(o.rates, "--rates");
        grid.lr_l2s = parse_double_list(o.l2s, "--l2s");
        grid.dt_max_depths = parse_int_list(o.depths, "--depths");
        grid.dt_min_splits = parse_int_list(o.min_splits, "--min-splits");
        grid.lr_base = base.lr;
        grid.dt_base = base.dt;
        result = classify::grid_search(features.dataset, grid, o.folds, g.seed, g.threads);
    } else {
        classify::RandomRanges ranges;
        ranges.family = family;
        ranges.nb_alpha = parse_double_pair(o.alpha_range, "--alpha-range");
        ranges.lr_rate = parse_double_pair(o.rate_range, "--rate-range");
        ranges.lr_l2 = parse_double_pair(o.l2_range, "--l2-range");
        ranges.dt_max_depth = parse_int_pair(o.depth_range, "--depth-range");
        ranges.dt_min_split = parse_int_pair(o.min_split_range, "--min-split-range");
        ranges.lr_base = base.lr;
        ranges.dt_base = base.dt;
        result = classify::random_search(features.dataset, ranges, o.draws, o.folds, g.seed,
                                         g.threads);
    }

    std::cout << "evaluated " << result.table.size() << " candidates (" << o.method << ", "
              << o.folds << "-fold)\n";
    std::cout << "best: " << spec_json(result.best).dump() << "  mean_macro_f1="
              << std::fixed << std::setprecision(4)
              << result.table[result.best_index].mean_macro_f1 << "\n";
    std::cout.unsetf(std::ios::fixed);

    if (!o.out.empty()) {
        nlohmann::ordered_json j = report::report_header("tune");
        j["seed"] = g.seed;
        j["inputs"] = nlohmann::ordered_json::array({std::move(provenance)});
        j["method"] = o.method;
        j["folds"] = o.folds;
        nlohmann::ordered_json table = nlohmann::ordered_json::array();
        for (const auto& entry : result.table) {
            nlohmann::ordered_json row;
            row["spec"] = spec_json(entry.spec);
            row["mean_macro_f1"] = entry.mean_macro_f1;
            row["std_macro_f1"] = entry.std_macro_f1;
            table.push_back(std::move(row));
        }
        j["table"] = std::move(table);
        j["best_index"] = result.best_index;
        j["best"] = spec_json(result.best);
        io::write_file(o.out, report::fixed_json_dump(j));
    }
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

struct ForecastCmdOpts {
    std::string input;
    std::string format = "auto";
    std::string category;
    int horizon = 12;
    std::string out;
    std::string svg;
    std::string json;
    ForecastOpts model;
};

inline void cmd_forecast(const ForecastCmdOpts& o, const GlobalOpts& g) {
    auto [corpus, provenance] = load_corpus_input(o.input, o.format);
    if (!o.category.empty()) {
        corpus = filter_category(corpus, o.category);
    }
    const auto ts = forecast::aggregate_counts(corpus, o.model.freq);
    auto [path, desc] = fit_and_forecast(ts.values, to_forecast_spec(o.model), o.horizon);

    const auto rows = report::forecast_rows(ts, path);
    const auto csv = report::render_forecast_csv(rows);
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        io::write_file(o.out, csv);
        std::cerr << path.label << ": " << ts.values.size() << " observed periods, horizon "
                  << o.horizon << " -> " << o.out << "\n";
    }
    if (!o.svg.empty()) {
        const std::string title =
            (o.category.empty() ? std::string("query volume")
                                : "category \"" + o.category + "\" volume") +
            " (" + o.model.freq + ")";
        io::write_file(o.svg, report::render_svg_chart(title, ts, path));
    }
    if (!o.json.empty()) {
        nlohmann::ordered_json j = report::report_header("forecast");
        j["seed"] = g.seed;
        j["inputs"] = nlohmann::ordered_json::array({std::move(provenance)});
        j["granularity"] = o.model.freq;
        if (!o.category.empty()) {
            j["category"] = o.category;
        }
        j["horizon"] = o.horizon;
        j["model"] = std::move(desc);
        j["n_observed"] = ts.values.size();
        nlohmann::ordered_json periods = nlohmann::ordered_json::array();
        std::int64_t at = ts.starts.back();
        for (int h = 0; h < o.horizon; ++h) {
            at = forecast::detail::next_period(at, ts.freq);
            periods.push_back(dates::format_date(at));
        }
        j["forecast_periods"] = std::move(periods);
        j["point"] = path.point;
        j["lower95"] = path.lower;
        j["upper95"] = path.upper;
        io::write_file(o.json, report::fixed_json_dump(j));
    }
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

struct BacktestOpts {
    std::string input;
    std::string format = "auto";
    std::string category;
    std::size_t holdout = 0;
    std::string out;
    ForecastOpts model;
};

inline void cmd_backtest(const BacktestOpts& o, const GlobalOpts& g) {
    auto [corpus, provenance] = load_corpus_input(o.input, o.format);
    if (!o.category.empty()) {
        corpus = filter_category(corpus, o.category);
    }
    const auto ts = forecast::aggregate_counts(corpus, o.model.freq);
    const auto result = forecast::backtest(ts.values, to_forecast_spec(o.model), o.holdout);
    std::cout << result.model << " backtest, holdout " << o.holdout << " of "
              << ts.values.size() << " periods: " << std::fixed << std::setprecision(4)
              << "MAE=" << result.mae << " RMSE=" << result.rmse << "\n";
    std::cout.unsetf(std::ios::fixed);

    if (!o.out.empty()) {
        nlohmann::ordered_json j = report::report_header("backtest");
        j["seed"] = g.seed;
        j["inputs"] = nlohmann::ordered_json::array({std::move(provenance)});
        j["granularity"] = o.model.freq;
        j["model"] = result.model;
        j["holdout"] = o.holdout;
        j["n_periods"] = ts.values.size();
        j["mae"] = result.mae;
        j["rmse"] = result.rmse;
        j["forecasts"] = result.forecasts;
        j["actuals"] = result.actuals;
        io::write_file(o.out, report::fixed_json_dump(j));
    }
}

// ---------------------------------------------------------------------------
// spatial
// ---------------------------------------------------------------------------

struct SpatialOpts {
    std::string input;
    std::string format = "auto";
    std::string regions;
    std::size_t k = 3;
    int permutations = 999;
    double alpha = 0.05;
    std::string out;
};

inline void cmd_spatial(const SpatialOpts& o, const GlobalOpts& g) {
    auto [corpus, provenance] = load_corpus_input(o.input, o.format);
    const std::string region_bytes = io::read_file(o.regions);
    const auto table = spatial::parse_region_table(region_bytes);
    const auto counts = spatial::counts_by_zip(corpus, table);
    const auto weights = spatial::SpatialWeights::knn(table, o.k);
    const auto analysis = spatial::analyze_spatial(counts, weights, static_cast<int>(o.k),
                                                   o.permutations, g.seed, o.alpha, g.threads);

    std::cout << std::fixed << std::setprecision(4) << "Moran's I = " << analysis.morans_i
              << " (expected " << analysis.morans_expected << ", p = " << analysis.morans_p
              << ")\n"
              << "Geary's C = " << analysis.gearys_c << " (expected "
              << analysis.gearys_expected << ", p = " << analysis.gearys_p << ")\n";
    std::cout.unsetf(std::ios::fixed);
    std::size_t significant = 0;
    for (const auto& l : analysis.local) {
        if (l.label != "NS") {
            ++significant;
        }
    }
    std::cout << significant << " of " << analysis.local.size()
              << " sites in significant local clusters (alpha=" << o.alpha << ")\n";

    if (!o.out.empty()) {
        nlohmann::ordered_json j = report::report_header("spatial");
        j["seed"] = g.seed;
        j["inputs"] = nlohmann::ordered_json::array(
            {std::move(provenance), report::provenance_entry(o.regions, region_bytes)});
        j["n_sites"] = analysis.n_sites;
        j["k"] = o.k;
        j["permutations"] = o.permutations;
        j["alpha"] = o.alpha;
        j["moran"] = {{"observed", analysis.morans_i},
                      {"expected", analysis.morans_expected},
                      {"p_value", analysis.morans_p}};
        j["geary"] = {{"observed", analysis.gearys_c},
                      {"expected", analysis.gearys_expected},
                      {"p_value", analysis.gearys_p}};
        nlohmann::ordered_json sites = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < table.size(); ++i) {
            nlohmann::ordered_json s;
            s["zip"] = table.rows()[i].zip;
            s["region"] = table.rows()[i].region;
            s["count"] = counts[i];
            s["local_i"] = analysis.local[i].local_i;
            s["p_value"] = analysis.local[i].p_value;
            s["label"] = analysis.local[i].label;
            sites.push_back(std::move(s));
        }
        j["sites"] = std::move(sites);
        io::write_file(o.out, report::fixed_json_dump(j));
    }
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOpts {
    std::string input;
    std::string format = "auto";
    std::string test;
    std::string category_a;
    std::string category_b;
    std::string freq = "monthly";
    std::string regions;
    std::string out;
};

inline void cmd_stats(const StatsOpts& o, const GlobalOpts& g) {
    auto [corpus, provenance] = load_corpus_input(o.input, o.format);
    nlohmann::ordered_json j = report::report_header("stats");
    j["seed"] = g.seed;
    j["inputs"] = nlohmann::ordered_json::array({std::move(provenance)});

    stats::TestResult result;

    if (o.test == "welch") {
        require(!o.category_a.empty() && !o.category_b.empty(),
                "--test welch needs --category-a and --category-b");
        require(o.category_a != o.category_b, "--category-a and --category-b must differ");
        const auto a = forecast::aggregate_counts(filter_category(corpus, o.category_a), o.freq);
        const auto b = forecast::aggregate_counts(filter_category(corpus, o.category_b), o.freq);
        result = stats::welch_t_test(a.values, b.values);
        const auto sa = stats::describe(a.values);
        const auto sb = stats::describe(b.values);
        j["test"] = "welch_t";
        j["granularity"] = o.freq;
        j["group_a"] = {{"category", o.category_a},
                        {"n_periods", sa.n},
                        {"mean", sa.mean},
                        {"stddev", sa.stddev.value_or(0.0)}};
        j["group_b"] = {{"category", o.category_b},
                        {"n_periods", sb.n},
                        {"mean", sb.mean},
                        {"stddev", sb.stddev.value_or(0.0)}};
        std::cout << "welch t-test on " << o.freq << " counts: " << o.category_a << " (mean "
                  << std::fixed << std::setprecision(4) << sa.mean << ") vs " << o.category_b
                  << " (mean " << sb.mean << ")\n";
    } else {
        require(!o.regions.empty(), "--test chi2 needs --regions");
        const std::string region_bytes = io::read_file(o.regions);
        j["inputs"].push_back(report::provenance_entry(o.regions, region_bytes));
        const auto table = spatial::parse_region_table(region_bytes);
        const auto labels = record_labels(corpus);
        std::vector<std::string> categories = corpus.labels();
        std::vector<std::string> region_names;
        for (const auto& row : table.rows()) {
            region_names.push_back(row.region);
        }
        std::sort(region_names.begin(), region_names.end());
        region_names.erase(std::unique(region_names.begin(), region_names.end()),
                           region_names.end());
        std::vector<std::vector<double>> contingency(
            categories.size(), std::vector<double>(region_names.size(), 0.0));
        for (std::size_t i = 0; i < corpus.records().size(); ++i) {
            const auto* site = table.find(corpus.records()[i].zip);
            require(site != nullptr, "zip ", corpus.records()[i].zip,
                    " not present in region table");
            const std::size_t row = static_cast<std::size_t>(
                std::lower_bound(categories.begin(), categories.end(), labels[i]) -
                categories.begin());
            const std::size_t col = static_cast<std::size_t>(
                std::lower_bound(region_names.begin(), region_names.end(), site->region) -
                region_names.begin());
            contingency[row][col] += 1.0;
        }
        result = stats::chi_squared_test(contingency);
        j["test"] = "chi_squared";
        j["rows"] = categories;
        j["cols"] = region_names;
        j["table"] = contingency;
        std::cout << "chi-squared independence test: " << categories.size()
                  << " categories x " << region_names.size() << " regions\n";
    }

    std::cout << std::fixed << std::setprecision(4) << "statistic=" << result.statistic
              << " df=" << result.df << " p_value=" << std::setprecision(6) << result.p_value
              << "\n";
    std::cout.unsetf(std::ios::fixed);

    j["statistic"] = result.statistic;
    j["df"] = result.df;
    j["p_value"] = result.p_value;
    if (!o.out.empty()) {
        io::write_file(o.out, report::fixed_json_dump(j));
    }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOpts {
    std::string input;
    std::string format = "auto";
    std::string regions;
    std::string out_dir;
    std::string ratios = "0.7,0.15,0.15";
    std::size_t folds = 4;
    int horizon = 12;
    std::size_t holdout = 6;
    int permutations = 999;
    std::size_t k = 3;
    double alpha = 0.05;
    std::string freq = "monthly";
    std::uint32_t min_df = 1;
};

inline void cmd_report(const ReportOpts& o, const GlobalOpts& g) {
    const std::string input_bytes = io::read_file(o.input);
    const auto corpus =
        corpus::parse_records(input_bytes, detect_format(o.input, o.format));
    const std::string region_bytes = io::read_file(o.regions);
    const auto table = spatial::parse_region_table(region_bytes);
    const auto labels = record_labels(corpus);
    io::ensure_dir(o.out_dir);

    nlohmann::ordered_json j = report::report_header("analysis_report");
    j["seed"] = g.seed;
    j["parameters"] = {{"ratios", o.ratios},         {"folds", o.folds},
                       {"horizon", o.horizon},       {"holdout", o.holdout},
                       {"permutations", o.permutations}, {"k", o.k},
                       {"alpha", o.alpha},           {"granularity", o.freq},
                       {"min_df", o.min_df}};
    j["inputs"] = nlohmann::ordered_json::array(
        {report::provenance_entry(o.input, input_bytes),
         report::provenance_entry(o.regions, region_bytes)});

    // Corpus summary.
    {
        std::int64_t lo = corpus.records().front().timestamp, hi = lo;
        for (const auto& r : corpus.records()) {
            lo = std::min(lo, r.timestamp);
            hi = std::max(hi, r.timestamp);
        }
        nlohmann::ordered_json c;
        c["n_records"] = corpus.size();
        c["categories"] = corpus.labels();
        c["n_zips"] = corpus.regions().size();
        c["first_timestamp"] = dates::format_timestamp(lo);
        c["last_timestamp"] = dates::format_timestamp(hi);
        j["corpus"] = std::move(c);
    }

    // Classification: train on the train split, score the held-out test
    // split, and cross-validate each family on the full corpus.
    const auto split = corpus::stratified_split(corpus, parse_ratios(o.ratios), g.seed);
    const auto features = build_features(corpus, labels, split.train, o.min_df);
    {
        nlohmann::ordered_json cls;
        cls["split"] = {{"train", split.train.size()},
                        {"val", split.val.size()},
                        {"test", split.test.size()}};
        cls["vocabulary_terms"] = features.tfidf.vocab.size();
        std::vector<std::string> test_truth;
        for (std::size_t r : split.test) {
            test_truth.push_back(labels[r]);
        }
        for (const auto family :
             {classify::Family::Nb, classify::Family::Lr, classify::Family::Dt}) {
            classify::ModelSpec spec;
            spec.family = family;
            const auto model = classify::train_model(spec, features.dataset, split.train);
            const auto predictions = classify::predict_rows(model, features.dataset, split.test);
            const auto rep = classify::evaluate(predictions, test_truth);
            const auto cv =
                classify::k_fold_cv(features.dataset, o.folds, g.seed, spec, g.threads);
            nlohmann::ordered_json m;
            m["test"] = classify::report_to_json(rep);
            m["cv"] = {{"folds", o.folds},
                       {"mean_macro_f1", cv.mean_macro_f1},
                       {"std_macro_f1", cv.std_macro_f1}};
            cls[classify::family_name(family)] = std::move(m);
        }
        j["classification"] = std::move(cls);
    }

    // Forecast on total query volume, plus a holdout backtest comparison
    // across the three forecaster families.
    const auto ts = forecast::aggregate_counts(corpus, o.freq);
    {
        forecast::ForecastSpec fspec; // auto-arima defaults
        fspec.period = o.freq == "weekly" ? 52 : 12;
        auto [path, desc] = fit_and_forecast(ts.values, fspec, o.horizon);
        io::write_file(o.out_dir + "/forecast.csv",
                       report::render_forecast_csv(report::forecast_rows(ts, path)));
        io::write_file(o.out_dir + "/chart.svg",
                       report::render_svg_chart("query volume (" + o.freq + ")", ts, path));

        nlohmann::ordered_json f;
        f["granularity"] = o.freq;
        f["n_observed"] = ts.values.size();
        f["horizon"] = o.horizon;
        f["model"] = std::move(desc);
        f["history"] = ts.values;
        f["point"] = path.point;
        f["lower95"] = path.lower;
        f["upper95"] = path.upper;
        if (o.freq == "monthly" && ts.values.size() >= 24) {
            double first = 0.0, last = 0.0;
            for (std::size_t i = 0; i < 12; ++i) {
                first += ts.values[i];
                last += ts.values[ts.values.size() - 12 + i];
            }
            if (first > 0.0) {
                f["growth_percent"] = 100.0 * (last - first) / first;
            }
        }

        nlohmann::ordered_json backtests = nlohmann::ordered_json::array();
        for (const char* model : {"auto-arima", "hw", "snaive"}) {
            forecast::ForecastSpec bspec = fspec;
            bspec.kind = forecast::forecast_kind_from_name(model);
            nlohmann::ordered_json row;
            try {
                const auto bt = forecast::backtest(ts.values, bspec, o.holdout);
                row["model"] = bt.model;
                row["holdout"] = o.holdout;
                row["mae"] = bt.mae;
                row["rmse"] = bt.rmse;
            } catch (const Error& e) {
                row["model"] = model;
                row["holdout"] = o.holdout;
                row["error"] = e.what();
            }
            backtests.push_back(std::move(row));
        }
        f["backtests"] = std::move(backtests);
        j["forecast"] = std::move(f);
    }

    // Spatial autocorrelation of per-zip counts.
    {
        const auto counts = spatial::counts_by_zip(corpus, table);
        const auto weights = spatial::SpatialWeights::knn(table, o.k);
        const auto analysis =
            spatial::analyze_spatial(counts, weights, static_cast<int>(o.k), o.permutations,
                                     g.seed, o.alpha, g.threads);
        nlohmann::ordered_json s;
        s["n_sites"] = analysis.n_sites;
        s["k"] = o.k;
        s["permutations"] = o.permutations;
        s["moran"] = {{"observed", analysis.morans_i},
                      {"expected", analysis.morans_expected},
                      {"p_value", analysis.morans_p}};
        s["geary"] = {{"observed", analysis.gearys_c},
                      {"expected", analysis.gearys_expected},
                      {"p_value", analysis.gearys_p}};
        nlohmann::ordered_json sites = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < table.size(); ++i) {
            sites.push_back({{"zip", table.rows()[i].zip},
                             {"region", table.rows()[i].region},
                             {"count", counts[i]},
                             {"local_i", analysis.local[i].local_i},
                             {"p_value", analysis.local[i].p_value},
                             {"label", analysis.local[i].label}});
        }
        s["sites"] = std::move(sites);
        j["spatial"] = std::move(s);
    }

    // Significance tests: the two lowest-sorted categories by monthly
    // volume, and category-by-region independence.
    {
        nlohmann::ordered_json st;
        const auto& cats = corpus.labels();
        {
            const auto a = forecast::aggregate_counts(filter_category(corpus, cats[0]), o.freq);
            const auto b = forecast::aggregate_counts(filter_category(corpus, cats[1]), o.freq);
            const auto t = stats::welch_t_test(a.values, b.values);
            st["welch_t"] = {{"category_a", cats[0]},
                             {"category_b", cats[1]},
                             {"statistic", t.statistic},
                             {"df", t.df},
                             {"p_value", t.p_value}};
        }
        {
            std::vector<std::string> region_names;
            for (const auto& row : table.rows()) {
                region_names.push_back(row.region);
            }
            std::sort(region_names.begin(), region_names.end());
            region_names.erase(std::unique(region_names.begin(), region_names.end()),
                               region_names.end());
            std::vector<std::vector<double>> contingency(
                cats.size(), std::vector<double>(region_names.size(), 0.0));
            for (std::size_t i = 0; i < corpus.records().size(); ++i) {
                const auto* site = table.find(corpus.records()[i].zip);
                require(site != nullptr, "zip ", corpus.records()[i].zip,
                        " not present in region table");
                const std::size_t row = static_cast<std::size_t>(
                    std::lower_bound(cats.begin(), cats.end(), labels[i]) - cats.begin());
                const std::size_t col = static_cast<std::size_t>(
                    std::lower_bound(region_names.begin(), region_names.end(), site->region) -
                    region_names.begin());
                contingency[row][col] += 1.0;
            }
            const auto c = stats::chi_squared_test(contingency);
            st["chi_squared"] = {{"rows", cats},
                                 {"cols", region_names},
                                 {"statistic", c.statistic},
                                 {"df", c.df},
                                 {"p_value", c.p_value}};
        }
        j["stats"] = std::move(st);
    }

    io::write_file(o.out_dir + "/report.json", report::fixed_json_dump(j));
    std::cerr << "report for " << corpus.size() << " records -> " << o.out_dir
              << "/report.json (+ forecast.csv, chart.svg)\n";
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOpts {
    std::string config;
    std::string input;
    std::string format = "auto";
    std::string factors = "1.0,2.5";
    int repeats = 3;
    std::string out;
};

template <typename F>
double time_stage_ms(int repeats, F&& f) {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repeats));
    for (int rep = 0; rep < repeats; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

inline void cmd_bench(const BenchOpts& o, const GlobalOpts& g) {
    require(o.config.empty() != o.input.empty(),
            "bench needs exactly one of --config (generate) or --input (existing corpus)");
    const auto factors = parse_double_list(o.factors, "--factors");
    require(!factors.empty(), "--factors must not be empty");
    for (double f : factors) {
        require(f > 0.0, "growth factors must be positive");
    }
    require(o.repeats >= 1, "--repeats must be >= 1");

    nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
    const corpus::Corpus base = [&] {
        if (!o.config.empty()) {
            const std::string cfg_bytes = io::read_file(o.config);
            inputs.push_back(report::provenance_entry(o.config, cfg_bytes));
            return synth::generate_corpus(
                synth::parse_synth_config(cfg_bytes), g.seed);
        }
        auto in = load_corpus_input(o.input, o.format);
        inputs.push_back(std::move(in.provenance));
        return std::move(in.corpus);
    }();

    struct Row {
        double factor;
        std::size_t n_records;
        double features_ms, classify_ms, forecast_ms;
        double total() const { return features_ms + classify_ms + forecast_ms; }
        double records_per_second() const {
            return 1000.0 * static_cast<double>(n_records) / total();
        }
    };
    std::vector<Row> rows;
    volatile std::size_t sink = 0;

    for (double factor : factors) {
        const auto corpus = replicate_corpus(base, factor);
        const auto labels = record_labels(corpus);

        Row row;
        row.factor = factor;
        row.n_records = corpus.size();
        classify::Dataset dataset;
        textfeat::TfIdfModel tfidf;
        row.features_ms = time_stage_ms(o.repeats, [&] {
            const auto docs = tokenize_all(corpus);
            tfidf = textfeat::fit_tfidf(textfeat::build_vocabulary(docs, 1));
            dataset = classify::make_dataset(docs, labels, tfidf);
            sink = sink + dataset.counts.size();
        });
        row.classify_ms = time_stage_ms(o.repeats, [&] {
            const auto model =
                classify::train_nb(dataset.counts, dataset.labels, dataset.n_features, 1.0);
            for (const auto& v : dataset.counts) {
                sink = sink + classify::nb_predict(model, v).size();
            }
        });
        row.forecast_ms = time_stage_ms(o.repeats, [&] {
            const auto ts = forecast::aggregate_counts(corpus, "monthly");
            const auto model = forecast::fit_arima(ts.values, 1, 0, 1);
            sink = sink + forecast::arima_forecast(model, ts.values, 12).point.size();
        });
        rows.push_back(row);

        std::cout << "factor " << std::fixed << std::setprecision(2) << factor << ": "
                  << row.n_records << " records | features " << std::setprecision(1)
                  << row.features_ms << "ms, classify " << row.classify_ms << "ms, forecast "
                  << row.forecast_ms << "ms, total " << row.total() << "ms ("
                  << std::setprecision(0) << row.records_per_second() << " records/s)\n";
        std::cout.unsetf(std::ios::fixed);
    }

    nlohmann::ordered_json j = report::report_header("bench");
    j["seed"] = g.seed;
    j["inputs"] = std::move(inputs);
    j["base_records"] = base.size();
    j["repeats"] = o.repeats;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        arr.push_back({{"factor", row.factor},
                       {"n_records", row.n_records},
                       {"features_ms", row.features_ms},
                       {"classify_ms", row.classify_ms},
                       {"forecast_ms", row.forecast_ms},
                       {"total_ms", row.total()},
                       {"records_per_second", row.records_per_second()}});
    }
    j["runs"] = std::move(arr);
    if (rows.size() >= 2) {
        const auto& a = rows.front();
        const auto& b = rows.back();
        j["scaling"] = {{"records_ratio",
                         static_cast<double>(b.n_records) / static_cast<double>(a.n_records)},
                        {"time_ratio", b.total() / a.total()}};
        std::cout << "records x" << std::fixed << std::setprecision(2)
                  << static_cast<double>(b.n_records) / static_cast<double>(a.n_records)
                  << " -> time x" << b.total() / a.total() << "\n";
        std::cout.unsetf(std::ios::fixed);
    }
    if (!o.out.empty()) {
        io::write_file(o.out, report::fixed_json_dump(j));
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
    CLI::App app{"garden-trends: help-desk query analytics "
                 "(classification, forecasting, spatial statistics)"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string("garden-trends ") + kVersion);
    app.set_config("--run-config", "", "Read defaults from an INI/TOML file (flags override)");

    GlobalOpts g;
    app.add_option("-s,--seed", g.seed, "Root RNG seed")->capture_default_str();
    app.add_option("-t,--threads", g.threads, "Worker threads")
        ->capture_default_str()
        ->check(CLI::Range(1u, 256u));

    {
        auto o = std::make_shared<detail::SynthOpts>();
        auto* cmd = app.add_subcommand("synth", "Generate a labeled synthetic query corpus");
        cmd->add_option("--config", o->config, "Generator config JSON")->required();
        cmd->add_option("-o,--out", o->out, "Output corpus path")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto (by extension)")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--rates", o->rates, "Also write the true monthly rate table CSV");
        cmd->add_option("--regions-out", o->regions_out, "Also write the region table CSV");
        cmd->callback([o, &g] { detail::cmd_synth(*o, g); });
    }
    {
        auto o = std::make_shared<detail::SplitOpts>();
        auto* cmd = app.add_subcommand("split", "Stratified train/val/test split");
        cmd->add_option("-i,--input", o->input, "Labeled corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--ratios", o->ratios, "train,val,test fractions (sum to 1)")
            ->capture_default_str();
        cmd->add_option("--train-out", o->train_out, "Train split path")->required();
        cmd->add_option("--val-out", o->val_out, "Validation split path")->required();
        cmd->add_option("--test-out", o->test_out, "Test split path")->required();
        cmd->callback([o, &g] { detail::cmd_split(*o, g); });
    }
    {
        auto o = std::make_shared<detail::TrainOpts>();
        auto* cmd = app.add_subcommand("train", "Train a classifier and save it as JSON");
        cmd->add_option("-i,--input", o->input, "Labeled training corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("-o,--out", o->out, "Model bundle path")->required();
        detail::add_hyper_flags(cmd, o->hyper);
        cmd->callback([o, &g] { detail::cmd_train(*o, g); });
    }
    {
        auto o = std::make_shared<detail::EvaluateOpts>();
        auto* cmd = app.add_subcommand("evaluate", "Score a saved model on labeled data");
        cmd->add_option("-i,--input", o->input, "Labeled evaluation corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--model-file", o->model_file, "Saved model bundle")->required();
        cmd->add_option("-o,--out", o->out, "Evaluation report JSON path");
        cmd->callback([o, &g] { detail::cmd_evaluate(*o, g); });
    }
    {
        auto o = std::make_shared<detail::CvOpts>();
        auto* cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation");
        cmd->add_option("-i,--input", o->input, "Labeled corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--folds", o->folds, "Number of folds")->capture_default_str();
        cmd->add_option("-o,--out", o->out, "CV report JSON path");
        detail::add_hyper_flags(cmd, o->hyper);
        cmd->callback([o, &g] { detail::cmd_cv(*o, g); });
    }
    {
        auto o = std::make_shared<detail::TuneOpts>();
        auto* cmd = app.add_subcommand("tune", "Hyperparameter search (grid or random)");
        cmd->add_option("-i,--input", o->input, "Labeled corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--method", o->method, "grid or random")
            ->capture_default_str()
            ->check(CLI::IsMember({"grid", "random"}));
        cmd->add_option("--folds", o->folds, "CV folds per candidate")->capture_default_str();
        cmd->add_option("--draws", o->draws, "Random-search draws")->capture_default_str();
        cmd->add_option("-o,--out", o->out, "Search report JSON path");
        detail::add_hyper_flags(cmd, o->hyper);
        cmd->add_option("--alphas", o->alphas, "NB grid: alpha values")->capture_default_str();
        cmd->add_option("--rates", o->rates, "LR grid: learning rates")->capture_default_str();
        cmd->add_option("--l2s", o->l2s, "LR grid: L2 penalties")->capture_default_str();
        cmd->add_option("--depths", o->depths, "DT grid: max depths")->capture_default_str();
        cmd->add_option("--min-splits", o->min_splits, "DT grid: min samples to split")
            ->capture_default_str();
        cmd->add_option("--alpha-range", o->alpha_range, "NB random range lo,hi")
            ->capture_default_str();
        cmd->add_option("--rate-range", o->rate_range, "LR rate range lo,hi (log-uniform)")
            ->capture_default_str();
        cmd->add_option("--l2-range", o->l2_range, "LR L2 range lo,hi (log-uniform)")
            ->capture_default_str();
        cmd->add_option("--depth-range", o->depth_range, "DT depth range lo,hi")
            ->capture_default_str();
        cmd->add_option("--min-split-range", o->min_split_range, "DT min-split range lo,hi")
            ->capture_default_str();
        cmd->callback([o, &g] { detail::cmd_tune(*o, g); });
    }
    {
        auto o = std::make_shared<detail::ForecastCmdOpts>();
        auto* cmd = app.add_subcommand("forecast", "Aggregate query volume and forecast it");
        cmd->add_option("-i,--input", o->input, "Query corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--category", o->category, "Only forecast this category's volume");
        cmd->add_option("--horizon", o->horizon, "Periods to forecast")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd->add_option("-o,--out", o->out, "Forecast CSV path (default: stdout)");
        cmd->add_option("--svg", o->svg, "Also render an SVG chart");
        cmd->add_option("--json", o->json, "Also write a forecast summary JSON");
        detail::add_forecast_flags(cmd, o->model);
        cmd->callback([o, &g] { detail::cmd_forecast(*o, g); });
    }
    {
        auto o = std::make_shared<detail::BacktestOpts>();
        auto* cmd = app.add_subcommand("backtest", "Holdout forecast evaluation");
        cmd->add_option("-i,--input", o->input, "Query corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--category", o->category, "Only backtest this category's volume");
        cmd->add_option("--holdout", o->holdout, "Held-out trailing periods to score")
            ->required()
            ->check(CLI::PositiveNumber);
        cmd->add_option("-o,--out", o->out, "Backtest report JSON path");
        detail::add_forecast_flags(cmd, o->model);
        cmd->callback([o, &g] { detail::cmd_backtest(*o, g); });
    }
    {
        auto o = std::make_shared<detail::SpatialOpts>();
        auto* cmd =
            app.add_subcommand("spatial", "Moran/Geary autocorrelation of per-zip volume");
        cmd->add_option("-i,--input", o->input, "Query corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--regions", o->regions, "Region table CSV (zip,lat,lon,region)")
            ->required();
        cmd->add_option("-k,--k", o->k, "Neighbors per site")->capture_default_str();
        cmd->add_option("--permutations", o->permutations, "Permutations for p-values")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd->add_option("--alpha", o->alpha, "Local cluster significance level")
            ->capture_default_str();
        cmd->add_option("-o,--out", o->out, "Spatial report JSON path");
        cmd->callback([o, &g] { detail::cmd_spatial(*o, g); });
    }
    {
        auto o = std::make_shared<detail::StatsOpts>();
        auto* cmd = app.add_subcommand("stats", "Significance tests on query volume");
        cmd->add_option("-i,--input", o->input, "Query corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--test", o->test, "welch (two categories) or chi2 (category x region)")
            ->required()
            ->check(CLI::IsMember({"welch", "chi2"}));
        cmd->add_option("--category-a", o->category_a, "First category (welch)");
        cmd->add_option("--category-b", o->category_b, "Second category (welch)");
        cmd->add_option("--granularity", o->freq, "Aggregation period for welch")
            ->capture_default_str()
            ->check(CLI::IsMember({"monthly", "weekly"}));
        cmd->add_option("--regions", o->regions, "Region table CSV (chi2)");
        cmd->add_option("-o,--out", o->out, "Stats report JSON path");
        cmd->callback([o, &g] { detail::cmd_stats(*o, g); });
    }
    {
        auto o = std::make_shared<detail::ReportOpts>();
        auto* cmd = app.add_subcommand(
            "report", "Full analysis: classification, forecast, spatial, stats");
        cmd->add_option("-i,--input", o->input, "Labeled query corpus")->required();
        cmd->add_option("--format", o->format, "jsonl, csv, or auto")
            ->capture_default_str()
            ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
        cmd->add_option("--regions", o->regions, "Region table CSV")->required();
        cmd->add_option("--out-dir", o->out_dir, "Output directory")->required();
        cmd->add_option("--ratios", o->ratios, "train,val,test fractions")
            ->capture_default_str();
        cmd->add_option("--folds", o->folds, "CV folds")->capture_default_str();
        cmd->add_option("--horizon", o->horizon, "Forecast periods")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd->add_option("--permutations", o->permutations, "Spatial permutations")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd->add_option("-k,--k", o->k, "Spatial neighbors per site")->capture_default_str();
        cmd->add_option("--alpha", o->alpha, "Local cluster significance level")
            ->capture_default_str();
        cmd->add_option("--granularity", o->freq, "Aggregation period")
            ->capture_default_str()
            ->check(CLI::IsMember({"monthly", "weekly"}));
        cmd->add_option("--min-df", o->min_df, "Vocabulary min document frequency")
            ->capture_default_str();
        cmd->callback([o, &g] { detail::cmd_report(*o, g); });
    }
    {
        auto o = std::make_shared<detail::BenchOpts>();
        auto* cmd = app.add_subcommand("bench", "Pipeline timing across corpus growth factors");
        cmd->add_option("--config", o->config, "Generator config JSON (build base corpus)");
        cmd->add_option("-i,--input", o->input, "Existing corpus file (JSONL or CSV)");
        cmd->add_option("-f,--format", o->format, "Input format: jsonl or csv")
            ->check(CLI::IsMember({"auto", "jsonl", "csv"}))
            ->capture_default_str();
        cmd->add_option("--factors", o->factors, "Comma-separated corpus growth factors")
            ->capture_default_str();
        cmd->add_option("--repeats", o->repeats, "Repetitions per stage (median)")
            ->capture_default_str();
        cmd->add_option("-o,--out", o->out, "Bench report JSON path");
        cmd->callback([o, &g] { detail::cmd_bench(*o, g); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace garden::cli
