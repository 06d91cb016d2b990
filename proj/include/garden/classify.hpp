#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "garden/corpus.hpp"
#include "garden/error.hpp"
#include "garden/parallel.hpp"
#include "garden/rng.hpp"
#include "garden/textfeat.hpp"
#include "garden/version.hpp"

namespace garden::classify {

using textfeat::SparseVector;

namespace detail {

inline std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
    std::set<std::string> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

inline std::vector<std::size_t> encode_labels(const std::vector<std::string>& labels,
                                              const std::vector<std::string>& classes) {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        const auto it = std::lower_bound(classes.begin(), classes.end(), label);
        require(it != classes.end() && *it == label, "unknown class label \"", label, "\"");
        out.push_back(static_cast<std::size_t>(it - classes.begin()));
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Multinomial Naive Bayes
// ---------------------------------------------------------------------------

/// Multinomial NB over raw term counts with Laplace smoothing alpha.
struct NbModel {
    std::vector<std::string> classes; // sorted
    std::vector<double> log_prior;
    std::vector<std::vector<double>> log_likelihood; // [class][term]
    double alpha = 1.0;
    std::size_t vocab_size = 0;
};

inline NbModel train_nb(const std::vector<SparseVector>& counts,
                        const std::vector<std::string>& labels, std::size_t vocab_size,
                        double alpha) {
    require(counts.size() == labels.size(), "train_nb: feature/label length mismatch");
    require(!counts.empty(), "train_nb: empty training set");
    require(alpha > 0, "train_nb: alpha must be positive");
    require(vocab_size > 0, "train_nb: empty vocabulary");

    NbModel model;
    model.classes = detail::sorted_classes(labels);
    require(model.classes.size() >= 2, "train_nb: need at least 2 classes, got ",
            model.classes.size());
    model.alpha = alpha;
    model.vocab_size = vocab_size;

    const std::size_t n_classes = model.classes.size();
    const auto y = detail::encode_labels(labels, model.classes);
    std::vector<double> class_count(n_classes, 0.0);
    std::vector<std::vector<double>> term_count(n_classes,
                                                std::vector<double>(vocab_size, 0.0));
    std::vector<double> total_count(n_classes, 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        class_count[y[i]] += 1.0;
        for (const auto& [idx, v] : counts[i].entries) {
            require(idx < vocab_size, "train_nb: feature index out of range");
            term_count[y[i]][idx] += v;
            total_count[y[i]] += v;
        }
    }

    const double n = static_cast<double>(counts.size());
    model.log_prior.resize(n_classes);
    model.log_likelihood.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        model.log_prior[c] = std::log(class_count[c] / n);
        model.log_likelihood[c].resize(vocab_size);
        const double denom = total_count[c] + alpha * static_cast<double>(vocab_size);
        for (std::size_t t = 0; t < vocab_size; ++t) {
            model.log_likelihood[c][t] = std::log((term_count[c][t] + alpha) / denom);
        }
    }
    return model;
}

namespace detail {

inline std::vector<double> softmax(std::vector<double> scores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - m);
        sum += s;
    }
    for (double& s : scores) {
        s /= sum;
    }
    return scores;
}

} // namespace detail

/// Per-class posterior probabilities; an empty vector falls back to priors.
inline std::vector<double> nb_predict_proba(const NbModel& model, const SparseVector& counts) {
    std::vector<double> scores(model.classes.size());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        double s = model.log_prior[c];
        for (const auto& [idx, v] : counts.entries) {
            if (idx < model.vocab_size) {
                s += v * model.log_likelihood[c][idx];
            }
        }
        scores[c] = s;
    }
    return detail::softmax(std::move(scores));
}

inline std::string nb_predict(const NbModel& model, const SparseVector& counts) {
    const auto proba = nb_predict_proba(model, counts);
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(proba.begin(), proba.end()) - proba.begin());
    return model.classes[best];
}

// ---------------------------------------------------------------------------
// Softmax (multinomial logistic) regression
// ---------------------------------------------------------------------------

struct LrHyper {
    double learning_rate = 0.5;
    double l2 = 1e-3;
    int max_iter = 500;
    double tol = 1e-7;
};

/// Multinomial softmax regression over TF-IDF features. Weights are stored
/// row-major, |classes| x (n_features + 1); the last column is the bias.
struct LrModel {
    std::vector<std::string> classes;
    std::size_t n_features = 0;
    std::vector<double> weights;
    LrHyper hyper;
    double final_loss = 0.0;
    int iterations = 0;
};

/// Mean cross-entropy plus (l2/2)*||W||^2 (bias excluded) and its exact
/// analytic gradient.
inline std::pair<double, std::vector<double>>
lr_loss_grad(const std::vector<double>& weights, std::size_t n_classes,
             std::size_t n_features, const std::vector<SparseVector>& features,
             const std::vector<std::size_t>& y, double l2) {
    const std::size_t width = n_features + 1;
    require(weights.size() == n_classes * width, "lr_loss_grad: weight shape mismatch");
    require(features.size() == y.size() && !features.empty(),
            "lr_loss_grad: feature/label mismatch");

    const double n = static_cast<double>(features.size());
    double loss = 0.0;
    std::vector<double> grad(weights.size(), 0.0);
    std::vector<double> scores(n_classes);
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t c = 0; c < n_classes; ++c) {
            double s = weights[c * width + n_features]; // bias
            for (const auto& [idx, v] : features[i].entries) {
                s += weights[c * width + idx] * v;
            }
            scores[c] = s;
        }
        const auto p = detail::softmax(scores);
        loss -= std::log(std::max(p[y[i]], 1e-300));
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double coeff = p[c] - (c == y[i] ? 1.0 : 0.0);
            for (const auto& [idx, v] : features[i].entries) {
                grad[c * width + idx] += coeff * v;
            }
            grad[c * width + n_features] += coeff;
        }
    }
    loss /= n;
    for (double& g : grad) {
        g /= n;
    }
    double penalty = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t f = 0; f < n_features; ++f) {
            const double w = weights[c * width + f];
            penalty += w * w;
            grad[c * width + f] += l2 * w;
        }
    }
    loss += 0.5 * l2 * penalty;
    return {loss, std::move(grad)};
}

/// Full-batch gradient descent from zero weights; stops at max_iter or when
/// the loss improves by less than tol.
inline LrModel train_lr(const std::vector<SparseVector>& features,
                        const std::vector<std::string>& labels, std::size_t n_features,
                        LrHyper hyper = {}) {
    require(features.size() == labels.size(), "train_lr: feature/label length mismatch");
    require(!features.empty(), "train_lr: empty training set");
    require(hyper.learning_rate > 0, "train_lr: learning rate must be positive");
    require(hyper.l2 >= 0, "train_lr: l2 must be non-negative");
    require(hyper.max_iter >= 1, "train_lr: max_iter must be >= 1");

    LrModel model;
    model.classes = detail::sorted_classes(labels);
    require(model.classes.size() >= 2, "train_lr: need at least 2 classes, got ",
            model.classes.size());
    model.n_features = n_features;
    model.hyper = hyper;
    const auto y = detail::encode_labels(labels, model.classes);
    const std::size_t n_classes = model.classes.size();
    model.weights.assign(n_classes * (n_features + 1), 0.0);

    auto [loss, grad] =
        lr_loss_grad(model.weights, n_classes, n_features, features, y, hyper.l2);
    model.final_loss = loss;
    for (int iter = 1; iter <= hyper.max_iter; ++iter) {
        for (std::size_t j = 0; j < model.weights.size(); ++j) {
            model.weights[j] -= hyper.learning_rate * grad[j];
        }
        auto [new_loss, new_grad] =
            lr_loss_grad(model.weights, n_classes, n_features, features, y, hyper.l2);
        require(std::isfinite(new_loss), "train_lr: diverged at iteration ", iter);
        const double improvement = loss - new_loss;
        loss = new_loss;
        grad = std::move(new_grad);
        model.final_loss = loss;
        model.iterations = iter;
        if (improvement < hyper.tol) {
            break;
        }
    }
    return model;
}

inline std::vector<double> lr_predict_proba(const LrModel& model, const SparseVector& tfidf) {
    const std::size_t width = model.n_features + 1;
    std::vector<double> scores(model.classes.size());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        double s = model.weights[c * width + model.n_features];
        for (const auto& [idx, v] : tfidf.entries) {
            if (idx < model.n_features) {
                s += model.weights[c * width + idx] * v;
            }
        }
        scores[c] = s;
    }
    return detail::softmax(std::move(scores));
}

inline std::string lr_predict(const LrModel& model, const SparseVector& tfidf) {
    const auto proba = lr_predict_proba(model, tfidf);
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(proba.begin(), proba.end()) - proba.begin());
    return model.classes[best];
}

// ---------------------------------------------------------------------------
// CART decision tree (Gini impurity)
// ---------------------------------------------------------------------------

struct DtHyper {
    int max_depth = 20;
    int min_samples_split = 2;
};

/// feature < 0 marks a leaf; leaves carry per-class training counts.
struct DtNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<std::uint32_t> class_counts;
};

struct DtModel {
    std::vector<std::string> classes;
    std::vector<DtNode> nodes; // nodes[0] is the root
    DtHyper hyper;
    std::size_t n_features = 0;
};

namespace detail {

inline double gini(const std::vector<double>& counts, double total) {
    double s = 0.0;
    for (double c : counts) {
        const double p = c / total;
        s += p * p;
    }
    return 1.0 - s;
}

struct DtBuilder {
    const std::vector<std::vector<double>>& columns; // [feature][sample]
    const std::vector<std::size_t>& y;
    std::size_t n_classes;
    DtHyper hyper;
    std::vector<DtNode> nodes;

    std::int32_t build(std::vector<std::uint32_t>& samples, int depth) {
        const double m = static_cast<double>(samples.size());
        std::vector<double> counts(n_classes, 0.0);
        for (std::uint32_t s : samples) {
            counts[y[s]] += 1.0;
        }
        const double parent_gini = gini(counts, m);
        const bool pure = parent_gini <= 0.0;

        std::int32_t best_feature = -1;
        double best_threshold = 0.0;
        double best_decrease = 1e-12;
        if (!pure && depth < hyper.max_depth &&
            samples.size() >= static_cast<std::size_t>(hyper.min_samples_split)) {
            std::vector<std::pair<double, std::size_t>> order(samples.size());
            std::vector<double> left_counts(n_classes);
            for (std::size_t f = 0; f < columns.size(); ++f) {
                const auto& col = columns[f];
                for (std::size_t i = 0; i < samples.size(); ++i) {
                    order[i] = {col[samples[i]], y[samples[i]]};
                }
                std::sort(order.begin(), order.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                std::fill(left_counts.begin(), left_counts.end(), 0.0);
                for (std::size_t i = 1; i < order.size(); ++i) {
                    left_counts[order[i - 1].second] += 1.0;
                    if (order[i].first <= order[i - 1].first) {
                        continue;
                    }
                    const double nl = static_cast<double>(i);
                    const double nr = m - nl;
                    double gl = 0.0, gr = 0.0;
                    for (std::size_t c = 0; c < n_classes; ++c) {
                        const double lc = left_counts[c];
                        const double rc = counts[c] - lc;
                        gl += lc * lc;
                        gr += rc * rc;
                    }
                    gl = 1.0 - gl / (nl * nl);
                    gr = 1.0 - gr / (nr * nr);
                    const double decrease = parent_gini - (nl * gl + nr * gr) / m;
                    if (decrease > best_decrease) {
                        best_decrease = decrease;
                        best_feature = static_cast<std::int32_t>(f);
                        best_threshold = 0.5 * (order[i - 1].first + order[i].first);
                    }
                }
            }
        }

        if (best_feature < 0) {
            DtNode leaf;
            leaf.class_counts.assign(counts.begin(), counts.end());
            nodes.push_back(std::move(leaf));
            return static_cast<std::int32_t>(nodes.size() - 1);
        }

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t s : samples) {
            (columns[best_feature][s] <= best_threshold ? left : right).push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();

        const std::size_t self = nodes.size();
        nodes.emplace_back();
        nodes[self].feature = best_feature;
        nodes[self].threshold = best_threshold;
        const std::int32_t l = build(left, depth + 1);
        const std::int32_t r = build(right, depth + 1);
        nodes[self].left = l;
        nodes[self].right = r;
        return static_cast<std::int32_t>(self);
    }
};

} // namespace detail

inline DtModel train_dt(const std::vector<SparseVector>& features,
                        const std::vector<std::string>& labels, std::size_t n_features,
                        DtHyper hyper = {}) {
    require(features.size() == labels.size(), "train_dt: feature/label length mismatch");
    require(!features.empty(), "train_dt: empty training set");
    require(hyper.max_depth >= 1, "train_dt: max_depth must be >= 1");
    require(hyper.min_samples_split >= 2, "train_dt: min_samples_split must be >= 2");

    DtModel model;
    model.classes = detail::sorted_classes(labels);
    model.hyper = hyper;
    model.n_features = n_features;
    const auto y = detail::encode_labels(labels, model.classes);

    std::vector<std::vector<double>> columns(n_features,
                                             std::vector<double>(features.size(), 0.0));
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (const auto& [idx, v] : features[i].entries) {
            require(idx < n_features, "train_dt: feature index out of range");
            columns[idx][i] = v;
        }
    }

    detail::DtBuilder builder{columns, y, model.classes.size(), hyper, {}};
    std::vector<std::uint32_t> all(features.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = static_cast<std::uint32_t>(i);
    }
    builder.build(all, 0);
    model.nodes = std::move(builder.nodes);
    return model;
}

inline std::string dt_predict(const DtModel& model, const SparseVector& tfidf) {
    std::int32_t at = 0;
    while (model.nodes[at].feature >= 0) {
        const auto& node = model.nodes[at];
        const double v = tfidf.value_at(static_cast<std::uint32_t>(node.feature));
        at = v <= node.threshold ? node.left : node.right;
    }
    const auto& counts = model.nodes[at].class_counts;
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    return model.classes[best];
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Confusion matrix (rows = truth, cols = predicted) with per-class and
/// macro precision/recall/F1. Macro averages run over classes present in
/// the truth labels.
struct ClassificationReport {
    std::vector<std::string> labels; // sorted union of truth and predictions
    std::vector<std::vector<std::size_t>> confusion;
    double accuracy = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

inline ClassificationReport evaluate(const std::vector<std::string>& predictions,
                                     const std::vector<std::string>& truth) {
    require(predictions.size() == truth.size(), "evaluate: prediction/truth length mismatch");
    require(!truth.empty(), "evaluate: empty input");

    ClassificationReport report;
    {
        std::set<std::string> all(truth.begin(), truth.end());
        all.insert(predictions.begin(), predictions.end());
        report.labels.assign(all.begin(), all.end());
    }
    const std::size_t L = report.labels.size();
    const auto t = detail::encode_labels(truth, report.labels);
    const auto p = detail::encode_labels(predictions, report.labels);
    report.confusion.assign(L, std::vector<std::size_t>(L, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++report.confusion[t[i]][p[i]];
        if (t[i] == p[i]) {
            ++correct;
        }
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

    report.precision.resize(L);
    report.recall.resize(L);
    report.f1.resize(L);
    std::size_t present = 0;
    for (std::size_t c = 0; c < L; ++c) {
        std::size_t row_sum = 0, col_sum = 0;
        for (std::size_t j = 0; j < L; ++j) {
            row_sum += report.confusion[c][j];
            col_sum += report.confusion[j][c];
        }
        const double tp = static_cast<double>(report.confusion[c][c]);
        report.precision[c] = col_sum > 0 ? tp / static_cast<double>(col_sum) : 0.0;
        report.recall[c] = row_sum > 0 ? tp / static_cast<double>(row_sum) : 0.0;
        const double pr = report.precision[c] + report.recall[c];
        report.f1[c] = pr > 0 ? 2.0 * report.precision[c] * report.recall[c] / pr : 0.0;
        if (row_sum > 0) {
            ++present;
            report.macro_precision += report.precision[c];
            report.macro_recall += report.recall[c];
            report.macro_f1 += report.f1[c];
        }
    }
    report.macro_precision /= static_cast<double>(present);
    report.macro_recall /= static_cast<double>(present);
    report.macro_f1 /= static_cast<double>(present);
    return report;
}

// ---------------------------------------------------------------------------
// Model-agnostic training surface
// ---------------------------------------------------------------------------

enum class Family { Nb, Lr, Dt };

inline const char* family_name(Family family) {
    switch (family) {
    case Family::Nb: return "nb";
    case Family::Lr: return "lr";
    case Family::Dt: return "dt";
    }
    return "?";
}

inline Family family_from_name(std::string_view name) {
    if (name == "nb") {
        return Family::Nb;
    }
    if (name == "lr") {
        return Family::Lr;
    }
    if (name == "dt") {
        return Family::Dt;
    }
    fail("unknown classifier family \"", std::string(name), "\"");
}

struct ModelSpec {
    Family family = Family::Nb;
    double nb_alpha = 1.0;
    LrHyper lr;
    DtHyper dt;
};

/// Both feature views of one tokenized corpus. NB consumes counts, LR and
/// DT consume the TF-IDF view.
struct Dataset {
    std::vector<SparseVector> counts;
    std::vector<SparseVector> tfidf;
    std::vector<std::string> labels;
    std::size_t n_features = 0;
};

inline Dataset make_dataset(const std::vector<std::vector<std::string>>& docs,
                            const std::vector<std::string>& labels,
                            const textfeat::TfIdfModel& model) {
    require(docs.size() == labels.size(), "make_dataset: docs/labels length mismatch");
    Dataset ds;
    ds.labels = labels;
    ds.n_features = model.vocab.size();
    ds.counts.reserve(docs.size());
    ds.tfidf.reserve(docs.size());
    for (const auto& doc : docs) {
        ds.counts.push_back(textfeat::count_transform(model.vocab, doc));
        ds.tfidf.push_back(textfeat::tfidf_transform(model, doc));
    }
    return ds;
}

class Classifier {
public:
    explicit Classifier(NbModel m) : model_(std::move(m)) {}
    explicit Classifier(LrModel m) : model_(std::move(m)) {}
    explicit Classifier(DtModel m) : model_(std::move(m)) {}

    Family family() const {
        return std::holds_alternative<NbModel>(model_)   ? Family::Nb
               : std::holds_alternative<LrModel>(model_) ? Family::Lr
                                                         : Family::Dt;
    }

    const std::vector<std::string>& classes() const {
        return std::visit([](const auto& m) -> const std::vector<std::string>& {
            return m.classes;
        }, model_);
    }

    std::string predict(const SparseVector& counts, const SparseVector& tfidf) const {
        if (const auto* nb = std::get_if<NbModel>(&model_)) {
            return nb_predict(*nb, counts);
        }
        if (const auto* lr = std::get_if<LrModel>(&model_)) {
            return lr_predict(*lr, tfidf);
        }
        return dt_predict(std::get<DtModel>(model_), tfidf);
    }

    template <typename T>
    const T& as() const {
        return std::get<T>(model_);
    }

private:
    std::variant<NbModel, LrModel, DtModel> model_;
};

namespace detail {

template <typename T>
std::vector<T> gather(const std::vector<T>& items, const std::vector<std::size_t>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        out.push_back(items[r]);
    }
    return out;
}

} // namespace detail

inline Classifier train_model(const ModelSpec& spec, const Dataset& data,
                              const std::vector<std::size_t>& rows) {
    const auto labels = detail::gather(data.labels, rows);
    switch (spec.family) {
    case Family::Nb:
        return Classifier(train_nb(detail::gather(data.counts, rows), labels,
                                   data.n_features, spec.nb_alpha));
    case Family::Lr:
        return Classifier(train_lr(detail::gather(data.tfidf, rows), labels,
                                   data.n_features, spec.lr));
    case Family::Dt:
        return Classifier(train_dt(detail::gather(data.tfidf, rows), labels,
                                   data.n_features, spec.dt));
    }
    fail("train_model: bad family");
}

inline std::vector<std::string> predict_rows(const Classifier& model, const Dataset& data,
                                             const std::vector<std::size_t>& rows) {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        out.push_back(model.predict(data.counts[r], data.tfidf[r]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cross-validation and hyperparameter search
// ---------------------------------------------------------------------------

struct CvResult {
    std::vector<ClassificationReport> fold_reports;
    double mean_macro_f1 = 0.0;
    double std_macro_f1 = 0.0;
};

/// Stratified k-fold cross-validation; fold i validates, the rest trains.
/// Folds may train in parallel, results are reduced in fold order.
inline CvResult k_fold_cv(const Dataset& data, std::size_t k, std::uint64_t seed,
                          const ModelSpec& spec, unsigned threads = 1) {
    const auto folds = corpus::stratified_folds(data.labels, k, seed);
    CvResult result;
    result.fold_reports.resize(k);
    parallel_for(k, threads, [&](std::size_t f) {
        std::vector<char> mask(data.labels.size(), 0);
        for (std::size_t r : folds[f]) {
            mask[r] = 1;
        }
        std::vector<std::size_t> train_rows;
        train_rows.reserve(data.labels.size() - folds[f].size());
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (!mask[i]) {
                train_rows.push_back(i);
            }
        }
        const Classifier model = train_model(spec, data, train_rows);
        const auto predictions = predict_rows(model, data, folds[f]);
        result.fold_reports[f] = evaluate(predictions, detail::gather(data.labels, folds[f]));
    });
    double sum = 0.0;
    for (const auto& r : result.fold_reports) {
        sum += r.macro_f1;
    }
    result.mean_macro_f1 = sum / static_cast<double>(k);
    double ss = 0.0;
    for (const auto& r : result.fold_reports) {
        const double d = r.macro_f1 - result.mean_macro_f1;
        ss += d * d;
    }
    result.std_macro_f1 = std::sqrt(ss / static_cast<double>(k - 1));
    return result;
}

struct SearchEntry {
    ModelSpec spec;
    double mean_macro_f1 = 0.0;
    double std_macro_f1 = 0.0;
};

struct SearchResult {
    ModelSpec best;
    std::size_t best_index = 0;
    std::vector<SearchEntry> table; // enumeration order
};

/// Grid axes per family; enumeration is row-major over the relevant axes.
struct GridSpec {
    Family family = Family::Nb;
    std::vector<double> nb_alphas;
    std::vector<double> lr_rates;
    std::vector<double> lr_l2s;
    std::vector<int> dt_max_depths;
    std::vector<int> dt_min_splits;
    LrHyper lr_base;
    DtHyper dt_base;
};

inline std::vector<ModelSpec> enumerate_grid(const GridSpec& grid) {
    std::vector<ModelSpec> specs;
    switch (grid.family) {
    case Family::Nb:
        for (double alpha : grid.nb_alphas) {
            ModelSpec s;
            s.family = Family::Nb;
            s.nb_alpha = alpha;
            specs.push_back(s);
        }
        break;
    case Family::Lr:
        for (double rate : grid.lr_rates) {
            for (double l2 : grid.lr_l2s) {
                ModelSpec s;
                s.family = Family::Lr;
                s.lr = grid.lr_base;
                s.lr.learning_rate = rate;
                s.lr.l2 = l2;
                specs.push_back(s);
            }
        }
        break;
    case Family::Dt:
        for (int depth : grid.dt_max_depths) {
            for (int min_split : grid.dt_min_splits) {
                ModelSpec s;
                s.family = Family::Dt;
                s.dt = grid.dt_base;
                s.dt.max_depth = depth;
                s.dt.min_samples_split = min_split;
                specs.push_back(s);
            }
        }
        break;
    }
    return specs;
}

namespace detail {

inline SearchResult score_specs(const Dataset& data, std::vector<ModelSpec> specs,
                                std::size_t k, std::uint64_t seed, unsigned threads) {
    SearchResult result;
    result.table.resize(specs.size());
    parallel_for(specs.size(), threads, [&](std::size_t i) {
        const CvResult cv = k_fold_cv(data, k, seed, specs[i], 1);
        result.table[i] = {specs[i], cv.mean_macro_f1, cv.std_macro_f1};
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.table.size(); ++i) {
        if (result.table[i].mean_macro_f1 > result.table[best].mean_macro_f1) {
            best = i;
        }
    }
    result.best = result.table[best].spec;
    result.best_index = best;
    return result;
}

} // namespace detail

/// Scores every grid cell by k-fold mean macro F1; ties go to the earliest
/// cell in enumeration order.
inline SearchResult grid_search(const Dataset& data, const GridSpec& grid, std::size_t k,
                                std::uint64_t seed, unsigned threads = 1) {
    auto specs = enumerate_grid(grid);
    require(!specs.empty(), "grid_search: empty grid");
    return detail::score_specs(data, std::move(specs), k, seed, threads);
}

/// Sampling ranges per family. Learning rate and l2 are drawn log-uniform,
/// everything else uniform. lo == hi pins a parameter.
struct RandomRanges {
    Family family = Family::Nb;
    std::pair<double, double> nb_alpha{0.1, 10.0};
    std::pair<double, double> lr_rate{0.01, 1.0};
    std::pair<double, double> lr_l2{1e-6, 1e-1};
    std::pair<int, int> dt_max_depth{2, 20};
    std::pair<int, int> dt_min_split{2, 10};
    LrHyper lr_base;
    DtHyper dt_base;
};

inline SearchResult random_search(const Dataset& data, const RandomRanges& ranges,
                                  std::size_t n_draws, std::size_t k, std::uint64_t seed,
                                  unsigned threads = 1) {
    require(n_draws >= 1, "random_search: n_draws must be >= 1");
    const auto check = [](auto range, const char* what) {
        require(range.first <= range.second, "random_search: empty ", what, " range");
    };
    check(ranges.nb_alpha, "alpha");
    check(ranges.lr_rate, "learning-rate");
    check(ranges.lr_l2, "l2");
    check(ranges.dt_max_depth, "max-depth");
    check(ranges.dt_min_split, "min-split");

    Rng rng(derive_seed(seed, "random_search"));
    std::vector<ModelSpec> specs;
    specs.reserve(n_draws);
    for (std::size_t i = 0; i < n_draws; ++i) {
        ModelSpec s;
        s.family = ranges.family;
        switch (ranges.family) {
        case Family::Nb:
            s.nb_alpha = rng.uniform(ranges.nb_alpha.first, ranges.nb_alpha.second);
            break;
        case Family::Lr:
            s.lr = ranges.lr_base;
            s.lr.learning_rate = rng.log_uniform(ranges.lr_rate.first, ranges.lr_rate.second);
            s.lr.l2 = rng.log_uniform(ranges.lr_l2.first, ranges.lr_l2.second);
            break;
        case Family::Dt:
            s.dt = ranges.dt_base;
            s.dt.max_depth = static_cast<int>(
                rng.uniform_int(ranges.dt_max_depth.first, ranges.dt_max_depth.second));
            s.dt.min_samples_split = static_cast<int>(
                rng.uniform_int(ranges.dt_min_split.first, ranges.dt_min_split.second));
            break;
        }
        specs.push_back(s);
    }
    return detail::score_specs(data, std::move(specs), k, seed, threads);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const NbModel& m) {
    nlohmann::json j;
    j["kind"] = "nb";
    j["classes"] = m.classes;
    j["log_prior"] = m.log_prior;
    j["log_likelihood"] = m.log_likelihood;
    j["alpha"] = m.alpha;
    j["vocab_size"] = m.vocab_size;
    return j;
}

inline NbModel nb_from_json(const nlohmann::json& j) {
    NbModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.log_prior = j.at("log_prior").get<std::vector<double>>();
    m.log_likelihood = j.at("log_likelihood").get<std::vector<std::vector<double>>>();
    m.alpha = j.at("alpha").get<double>();
    m.vocab_size = j.at("vocab_size").get<std::size_t>();
    return m;
}

inline nlohmann::json to_json(const LrModel& m) {
    nlohmann::json j;
    j["kind"] = "lr";
    j["classes"] = m.classes;
    j["n_features"] = m.n_features;
    j["weights"] = m.weights;
    j["hyper"] = {{"learning_rate", m.hyper.learning_rate},
                  {"l2", m.hyper.l2},
                  {"max_iter", m.hyper.max_iter},
                  {"tol", m.hyper.tol}};
    j["final_loss"] = m.final_loss;
    j["iterations"] = m.iterations;
    return j;
}

inline LrModel lr_from_json(const nlohmann::json& j) {
    LrModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    const auto& h = j.at("hyper");
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.l2 = h.at("l2").get<double>();
    m.hyper.max_iter = h.at("max_iter").get<int>();
    m.hyper.tol = h.at("tol").get<double>();
    m.final_loss = j.at("final_loss").get<double>();
    m.iterations = j.at("iterations").get<int>();
    return m;
}

inline nlohmann::json to_json(const DtModel& m) {
    nlohmann::json j;
    j["kind"] = "dt";
    j["classes"] = m.classes;
    j["n_features"] = m.n_features;
    j["hyper"] = {{"max_depth", m.hyper.max_depth},
                  {"min_samples_split", m.hyper.min_samples_split}};
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : m.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"counts", n.class_counts}});
    }
    j["nodes"] = std::move(nodes);
    return j;
}

inline DtModel dt_from_json(const nlohmann::json& j) {
    DtModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.hyper.max_depth = j.at("hyper").at("max_depth").get<int>();
    m.hyper.min_samples_split = j.at("hyper").at("min_samples_split").get<int>();
    for (const auto& n : j.at("nodes")) {
        DtNode node;
        node.feature = n.at("feature").get<std::int32_t>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<std::int32_t>();
        node.right = n.at("right").get<std::int32_t>();
        node.class_counts = n.at("counts").get<std::vector<std::uint32_t>>();
        m.nodes.push_back(std::move(node));
    }
    return m;
}

/// Plain-text metrics table, one row per class plus the macro row.
inline std::string to_text_table(const ClassificationReport& r) {
    std::size_t width = std::string("class").size();
    for (const auto& label : r.labels) {
        width = std::max(width, label.size());
    }
    width = std::max(width, std::string("macro").size());

    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s  %9s  %7s\n", static_cast<int>(width),
                  "class", "precision", "recall", "f1", "support");
    out += buf;
    for (std::size_t c = 0; c < r.labels.size(); ++c) {
        std::size_t support = 0;
        for (std::size_t j = 0; j < r.labels.size(); ++j) {
            support += r.confusion[c][j];
        }
        std::snprintf(buf, sizeof buf, "%-*s  %9.4f  %9.4f  %9.4f  %7zu\n",
                      static_cast<int>(width), r.labels[c].c_str(), r.precision[c],
                      r.recall[c], r.f1[c], support);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-*s  %9.4f  %9.4f  %9.4f  %7zu\n",
                  static_cast<int>(width), "macro", r.macro_precision, r.macro_recall,
                  r.macro_f1, [&] {
                      std::size_t total = 0;
                      for (const auto& row : r.confusion) {
                          for (std::size_t v : row) {
                              total += v;
                          }
                      }
                      return total;
                  }());
    out += buf;
    std::snprintf(buf, sizeof buf, "accuracy: %.4f\n", r.accuracy);
    out += buf;
    return out;
}

inline nlohmann::json report_to_json(const ClassificationReport& r) {
    nlohmann::json j;
    j["labels"] = r.labels;
    j["confusion"] = r.confusion;
    j["accuracy"] = r.accuracy;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["macro_precision"] = r.macro_precision;
    j["macro_recall"] = r.macro_recall;
    j["macro_f1"] = r.macro_f1;
    j["averaging"] = "macro";
    return j;
}

} // namespace garden::classify
