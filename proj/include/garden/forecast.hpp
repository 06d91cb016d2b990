#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "garden/corpus.hpp"
#include "garden/dates.hpp"
#include "garden/error.hpp"
#include "garden/optimize.hpp"
#include "garden/polyroot.hpp"

namespace garden::forecast {

// ---------------------------------------------------------------------------
// Time-series aggregation
// ---------------------------------------------------------------------------

/// Evenly spaced counts per calendar period. `starts` are the period start
/// dates in days since the Unix epoch; gaps inside the observed range are
/// filled with zero counts.
struct TimeSeries {
    std::string freq; // "monthly" or "weekly"
    std::vector<std::int64_t> starts;
    std::vector<double> values;
};

namespace detail {

inline std::int64_t period_start(std::int64_t epoch_seconds, const std::string& freq) {
    if (freq == "monthly") {
        return dates::month_start(epoch_seconds);
    }
    if (freq == "weekly") {
        return dates::week_start(epoch_seconds);
    }
    fail("unknown frequency \"", freq, "\" (expected monthly or weekly)");
}

inline std::int64_t next_period(std::int64_t start, const std::string& freq) {
    return freq == "monthly" ? dates::next_month(start) : start + 7;
}

} // namespace detail

inline TimeSeries aggregate_counts(const corpus::Corpus& corpus, const std::string& freq) {
    require(!corpus.records().empty(), "aggregate_counts: empty corpus");
    std::map<std::int64_t, double> buckets;
    for (const auto& rec : corpus.records()) {
        buckets[detail::period_start(rec.timestamp, freq)] += 1.0;
    }
    TimeSeries ts;
    ts.freq = freq;
    const std::int64_t last = buckets.rbegin()->first;
    for (std::int64_t at = buckets.begin()->first; at <= last;
         at = detail::next_period(at, freq)) {
        ts.starts.push_back(at);
        const auto it = buckets.find(at);
        ts.values.push_back(it == buckets.end() ? 0.0 : it->second);
    }
    return ts;
}

// ---------------------------------------------------------------------------
// Differencing
// ---------------------------------------------------------------------------

inline std::vector<double> difference(std::vector<double> y, int d) {
    require(d >= 0, "difference: negative order");
    require(static_cast<std::size_t>(d) < y.size() || (d == 0 && !y.empty()),
            "difference: series shorter than differencing order");
    for (int k = 0; k < d; ++k) {
        for (std::size_t i = y.size() - 1; i > 0; --i) {
            y[i] -= y[i - 1];
        }
        y.erase(y.begin());
    }
    return y;
}

/// Undo d rounds of differencing for a block of future values, using the
/// tails of the original series to seed each level.
inline std::vector<double> integrate_forecasts(const std::vector<double>& y, int d,
                                               const std::vector<double>& future_diffs) {
    std::vector<double> last(d);
    {
        std::vector<double> level = y;
        for (int k = 0; k < d; ++k) {
            last[k] = level.back();
            level = difference(std::move(level), 1);
        }
    }
    std::vector<double> out;
    out.reserve(future_diffs.size());
    for (double f : future_diffs) {
        double v = f;
        for (int k = d - 1; k >= 0; --k) {
            v += last[k];
            last[k] = v;
        }
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// ARIMA via conditional sum of squares
// ---------------------------------------------------------------------------

struct ArimaModel {
    int p = 0, d = 0, q = 0;
    double intercept = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
    double sse = 0.0;
    double sigma2 = 0.0;
    double aic = 0.0;
    std::size_t n_diff = 0; // length of the differenced series used for fitting
    bool converged = false;
};

namespace detail {

/// Residual recursion with zero pre-sample values:
///   e_t = y_t - c - sum phi_i y_{t-i} - sum theta_j e_{t-j}
inline std::vector<double> arima_residuals(const std::vector<double>& y, double c,
                                           const std::vector<double>& phi,
                                           const std::vector<double>& theta) {
    std::vector<double> e(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        double v = y[t] - c;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (t >= i + 1) {
                v -= phi[i] * y[t - i - 1];
            }
        }
        for (std::size_t j = 0; j < theta.size(); ++j) {
            if (t >= j + 1) {
                v -= theta[j] * e[t - j - 1];
            }
        }
        e[t] = v;
    }
    return e;
}

/// AR stationarity / MA invertibility: roots of the monic reversed
/// polynomial must lie strictly inside the unit circle. Returns the excess
/// over 1 of the largest root modulus, or 0 when admissible.
inline double unit_circle_excess(const std::vector<double>& coeffs, bool negate) {
    if (coeffs.empty()) {
        return 0.0;
    }
    // z^k - a_1 z^{k-1} - ... - a_k for AR, z^k + a_1 z^{k-1} + ... for MA;
    // polyroot wants c[0] + c[1] z + ... + z^k.
    std::vector<double> monic(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        monic[coeffs.size() - 1 - i] = negate ? -coeffs[i] : coeffs[i];
    }
    const double max_mod = polyroot::max_root_modulus(monic);
    return max_mod < 1.0 ? 0.0 : max_mod - 1.0 + 1e-9;
}

} // namespace detail

/// Conditional sum of squares for params = [c, phi_1..phi_p, theta_1..theta_q]:
/// residuals run over the whole series, the sum skips the first max(p, q)
/// terms that lean on pre-sample zeros.
inline double css_objective(const std::vector<double>& params, const std::vector<double>& y,
                            int p, int q) {
    require(params.size() == static_cast<std::size_t>(1 + p + q),
            "css_objective: parameter count mismatch");
    const double c = params[0];
    const std::vector<double> phi(params.begin() + 1, params.begin() + 1 + p);
    const std::vector<double> theta(params.begin() + 1 + p, params.end());
    const auto e = detail::arima_residuals(y, c, phi, theta);
    const std::size_t skip = static_cast<std::size_t>(std::max(p, q));
    double sse = 0.0;
    for (std::size_t t = skip; t < e.size(); ++t) {
        sse += e[t] * e[t];
    }
    return sse;
}

/// Fits ARIMA(p,d,q) by Nelder-Mead over the CSS objective, starting from
/// intercept = mean of the differenced series and zero AR/MA coefficients.
/// Non-stationary / non-invertible candidates are rejected with a large
/// penalty proportional to how far the offending root sits outside the
/// unit circle.
inline ArimaModel fit_arima(const std::vector<double>& y_raw, int p, int d, int q) {
    require(p >= 0 && p <= 5 && q >= 0 && q <= 5, "fit_arima: p and q must be in [0, 5]");
    require(d >= 0 && d <= 2, "fit_arima: d must be in [0, 2]");
    require(y_raw.size() > static_cast<std::size_t>(d),
            "fit_arima: series too short for d=", d);
    const std::vector<double> y = difference(y_raw, d);
    const std::size_t n = y.size();
    require(n >= static_cast<std::size_t>(10 + p + q),
            "fit_arima: need at least ", 10 + p + q, " differenced observations for order (",
            p, ",", d, ",", q, "), got ", n);

    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= static_cast<double>(n);

    const auto objective = [&](const std::vector<double>& params) {
        const std::vector<double> phi(params.begin() + 1, params.begin() + 1 + p);
        const std::vector<double> theta(params.begin() + 1 + p, params.end());
        const double ar_excess = detail::unit_circle_excess(phi, true);
        const double ma_excess = detail::unit_circle_excess(theta, false);
        if (ar_excess > 0.0 || ma_excess > 0.0) {
            return 1e12 * (1.0 + ar_excess + ma_excess);
        }
        return css_objective(params, y, p, q);
    };

    std::vector<double> x0(1 + p + q, 0.0);
    x0[0] = mean;
    const auto nm = optimize::nelder_mead(objective, x0, 0.1, 1e-8, 2000);

    ArimaModel model;
    model.p = p;
    model.d = d;
    model.q = q;
    model.intercept = nm.x[0];
    model.phi.assign(nm.x.begin() + 1, nm.x.begin() + 1 + p);
    model.theta.assign(nm.x.begin() + 1 + p, nm.x.end());
    model.sse = nm.value;
    require(model.sse < 1e11, "fit_arima: optimizer stuck in non-stationary region for (", p,
            ",", d, ",", q, ")");
    model.n_diff = n;
    model.sigma2 = model.sse / static_cast<double>(n);
    model.aic = static_cast<double>(n) * std::log(model.sse / static_cast<double>(n)) +
                2.0 * static_cast<double>(p + q + 1);
    model.converged = nm.converged;
    return model;
}

/// psi-weights of the integrated process: phi(B)(1-B)^d psi(B) = theta(B).
inline std::vector<double> psi_weights(const ArimaModel& m, int count) {
    // A(B) = phi(B)(1-B)^d, A_0 = 1.
    std::vector<double> a(m.phi.size() + 1, 0.0);
    a[0] = 1.0;
    for (std::size_t i = 0; i < m.phi.size(); ++i) {
        a[i + 1] = -m.phi[i];
    }
    for (int k = 0; k < m.d; ++k) {
        std::vector<double> next(a.size() + 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            next[i] += a[i];
            next[i + 1] -= a[i];
        }
        a = std::move(next);
    }
    std::vector<double> psi(static_cast<std::size_t>(count), 0.0);
    for (int k = 0; k < count; ++k) {
        double v = 0.0;
        if (k == 0) {
            v = 1.0;
        } else {
            if (k <= m.q) {
                v = m.theta[static_cast<std::size_t>(k - 1)];
            }
            for (std::size_t i = 1; i < a.size() && i <= static_cast<std::size_t>(k); ++i) {
                v -= a[i] * psi[static_cast<std::size_t>(k) - i];
            }
        }
        psi[static_cast<std::size_t>(k)] = v;
    }
    return psi;
}

/// One forecast path with symmetric 95% intervals.
struct ForecastPath {
    std::vector<double> point;
    std::vector<double> lower;
    std::vector<double> upper;
    std::string label;
};

inline ForecastPath arima_forecast(const ArimaModel& m, const std::vector<double>& y_raw,
                                   int horizon) {
    require(horizon >= 1, "arima_forecast: horizon must be >= 1");
    const std::vector<double> y = difference(y_raw, m.d);
    const auto e = detail::arima_residuals(y, m.intercept, m.phi, m.theta);

    // Recursive point forecasts on the differenced scale; future residuals
    // are zero in expectation.
    std::vector<double> ext = y;
    for (int h = 1; h <= horizon; ++h) {
        const std::size_t t = ext.size();
        double v = m.intercept;
        for (std::size_t i = 0; i < m.phi.size(); ++i) {
            if (t >= i + 1) {
                v += m.phi[i] * ext[t - i - 1];
            }
        }
        for (std::size_t j = 0; j < m.theta.size(); ++j) {
            const std::size_t lag = j + 1;
            if (t >= lag && t - lag < e.size()) {
                v += m.theta[j] * e[t - lag];
            }
        }
        ext.push_back(v);
    }
    const std::vector<double> diffs(ext.begin() + static_cast<std::ptrdiff_t>(y.size()),
                                    ext.end());
    ForecastPath path;
    path.point = integrate_forecasts(y_raw, m.d, diffs);
    const auto psi = psi_weights(m, horizon);
    const double sigma = std::sqrt(m.sigma2);
    double var_sum = 0.0;
    for (int h = 1; h <= horizon; ++h) {
        const double w = psi[static_cast<std::size_t>(h - 1)];
        var_sum += w * w;
        const double half = 1.96 * sigma * std::sqrt(var_sum);
        path.lower.push_back(path.point[static_cast<std::size_t>(h - 1)] - half);
        path.upper.push_back(path.point[static_cast<std::size_t>(h - 1)] + half);
    }
    path.label = "arima(" + std::to_string(m.p) + "," + std::to_string(m.d) + "," +
                 std::to_string(m.q) + ")";
    return path;
}

/// Exhaustive AIC search over p in [0, max_p], d in [0, max_d], q in
/// [0, max_q], enumerated lexicographically; ties keep the earliest order.
/// Orders the series cannot support are skipped.
inline ArimaModel select_arima(const std::vector<double>& y, int max_p, int max_d, int max_q) {
    require(max_p >= 0 && max_d >= 0 && max_q >= 0, "select_arima: negative search bound");
    bool found = false;
    ArimaModel best;
    for (int p = 0; p <= max_p; ++p) {
        for (int d = 0; d <= max_d; ++d) {
            for (int q = 0; q <= max_q; ++q) {
                ArimaModel m;
                try {
                    m = fit_arima(y, p, d, q);
                } catch (const Error&) {
                    continue;
                }
                if (!found || m.aic < best.aic) {
                    best = m;
                    found = true;
                }
            }
        }
    }
    require(found, "select_arima: no admissible order for series of length ", y.size());
    return best;
}

// ---------------------------------------------------------------------------
// Holt-Winters (additive)
// ---------------------------------------------------------------------------

struct HoltWintersModel {
    int period = 12;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seasonal; // indexed by t mod period, end-of-fit state
    double sse = 0.0;
    double resid_std = 0.0;
    std::size_t n_obs = 0;
};

namespace detail {

struct HwState {
    double level, trend;
    std::vector<double> seasonal;
    double sse;
};

inline HwState hw_run(const std::vector<double>& y, int m, double alpha, double beta,
                      double gamma) {
    const std::size_t period = static_cast<std::size_t>(m);
    double mean1 = 0.0, mean2 = 0.0;
    for (std::size_t i = 0; i < period; ++i) {
        mean1 += y[i];
        mean2 += y[period + i];
    }
    mean1 /= static_cast<double>(period);
    mean2 /= static_cast<double>(period);

    HwState st;
    st.level = mean1;
    st.trend = (mean2 - mean1) / static_cast<double>(period);
    st.seasonal.resize(period);
    for (std::size_t i = 0; i < period; ++i) {
        st.seasonal[i] = y[i] - mean1;
    }
    st.sse = 0.0;

    for (std::size_t t = period; t < y.size(); ++t) {
        const std::size_t s = t % period;
        const double predicted = st.level + st.trend + st.seasonal[s];
        const double err = y[t] - predicted;
        st.sse += err * err;

        const double new_level =
            alpha * (y[t] - st.seasonal[s]) + (1.0 - alpha) * (st.level + st.trend);
        st.trend = beta * (new_level - st.level) + (1.0 - beta) * st.trend;
        st.seasonal[s] = gamma * (y[t] - new_level) + (1.0 - gamma) * st.seasonal[s];
        st.level = new_level;

        if (s == period - 1) {
            // Re-center the seasonal components once per completed cycle,
            // folding the offset into the level so fits are unchanged.
            double mean_s = 0.0;
            for (double v : st.seasonal) {
                mean_s += v;
            }
            mean_s /= static_cast<double>(period);
            for (double& v : st.seasonal) {
                v -= mean_s;
            }
            st.level += mean_s;
        }
    }
    return st;
}

} // namespace detail

/// Grid search over alpha, beta, gamma in {0.05, 0.15, ..., 0.95} (step 0.1)
/// minimizing one-step-ahead SSE; ties keep the first triple in enumeration
/// order (alpha outermost).
inline HoltWintersModel fit_holt_winters(const std::vector<double>& y, int period) {
    require(period >= 2, "fit_holt_winters: period must be >= 2");
    require(y.size() >= 2 * static_cast<std::size_t>(period),
            "fit_holt_winters: need at least two full seasons (", 2 * period, " points), got ",
            y.size());

    HoltWintersModel best;
    best.period = period;
    best.sse = std::numeric_limits<double>::infinity();
    for (int ia = 0; ia < 10; ++ia) {
        for (int ib = 0; ib < 10; ++ib) {
            for (int ig = 0; ig < 10; ++ig) {
                const double alpha = 0.05 + 0.1 * ia;
                const double beta = 0.05 + 0.1 * ib;
                const double gamma = 0.05 + 0.1 * ig;
                const auto st = detail::hw_run(y, period, alpha, beta, gamma);
                if (st.sse < best.sse) {
                    best.alpha = alpha;
                    best.beta = beta;
                    best.gamma = gamma;
                    best.level = st.level;
                    best.trend = st.trend;
                    best.seasonal = st.seasonal;
                    best.sse = st.sse;
                }
            }
        }
    }
    best.n_obs = y.size();
    const std::size_t n_err = y.size() - static_cast<std::size_t>(period);
    best.resid_std = std::sqrt(best.sse / static_cast<double>(n_err));
    return best;
}

inline ForecastPath hw_forecast(const HoltWintersModel& m, int horizon) {
    require(horizon >= 1, "hw_forecast: horizon must be >= 1");
    ForecastPath path;
    const std::size_t period = static_cast<std::size_t>(m.period);
    for (int h = 1; h <= horizon; ++h) {
        const std::size_t pos = (m.n_obs - 1 + static_cast<std::size_t>(h)) % period;
        const double point = m.level + static_cast<double>(h) * m.trend + m.seasonal[pos];
        const double half = 1.96 * m.resid_std * std::sqrt(static_cast<double>(h));
        path.point.push_back(point);
        path.lower.push_back(point - half);
        path.upper.push_back(point + half);
    }
    path.label = "holt_winters(" + std::to_string(m.period) + ")";
    return path;
}

// ---------------------------------------------------------------------------
// Seasonal naive
// ---------------------------------------------------------------------------

/// Repeats the last observed season. Interval width grows with the number
/// of completed future seasons: sigma_h = sigma * sqrt(floor((h-1)/m) + 1).
inline ForecastPath seasonal_naive(const std::vector<double>& y, int period, int horizon) {
    require(period >= 1, "seasonal_naive: period must be >= 1");
    require(horizon >= 1, "seasonal_naive: horizon must be >= 1");
    const std::size_t m = static_cast<std::size_t>(period);
    require(y.size() >= m, "seasonal_naive: need at least one full season (", period,
            " points), got ", y.size());

    double sse = 0.0;
    std::size_t n_err = 0;
    for (std::size_t t = m; t < y.size(); ++t) {
        const double e = y[t] - y[t - m];
        sse += e * e;
        ++n_err;
    }
    const double sigma = n_err > 0 ? std::sqrt(sse / static_cast<double>(n_err)) : 0.0;

    ForecastPath path;
    for (int h = 1; h <= horizon; ++h) {
        const std::size_t k = static_cast<std::size_t>(h - 1) / m;
        const double point = y[y.size() - m + (static_cast<std::size_t>(h - 1) % m)];
        const double half = 1.96 * sigma * std::sqrt(static_cast<double>(k + 1));
        path.point.push_back(point);
        path.lower.push_back(point - half);
        path.upper.push_back(point + half);
    }
    path.label = "seasonal_naive(" + std::to_string(period) + ")";
    return path;
}

// ---------------------------------------------------------------------------
// Unified forecasting surface
// ---------------------------------------------------------------------------

struct ForecastSpec {
    enum class Kind { Arima, AutoArima, HoltWinters, SeasonalNaive };
    Kind kind = Kind::AutoArima;
    int p = 1, d = 0, q = 1;       // Arima
    int max_p = 2, max_d = 1, max_q = 2; // AutoArima
    int period = 12;               // HoltWinters / SeasonalNaive
};

inline ForecastSpec::Kind forecast_kind_from_name(std::string_view name) {
    if (name == "arima") {
        return ForecastSpec::Kind::Arima;
    }
    if (name == "auto-arima") {
        return ForecastSpec::Kind::AutoArima;
    }
    if (name == "hw" || name == "holt-winters") {
        return ForecastSpec::Kind::HoltWinters;
    }
    if (name == "snaive" || name == "seasonal-naive") {
        return ForecastSpec::Kind::SeasonalNaive;
    }
    fail("unknown forecast model \"", std::string(name),
         "\" (expected arima, auto-arima, hw, or snaive)");
}

inline ForecastPath run_forecast(const std::vector<double>& y, const ForecastSpec& spec,
                                 int horizon) {
    switch (spec.kind) {
    case ForecastSpec::Kind::Arima:
        return arima_forecast(fit_arima(y, spec.p, spec.d, spec.q), y, horizon);
    case ForecastSpec::Kind::AutoArima: {
        const ArimaModel m = select_arima(y, spec.max_p, spec.max_d, spec.max_q);
        return arima_forecast(m, y, horizon);
    }
    case ForecastSpec::Kind::HoltWinters:
        return hw_forecast(fit_holt_winters(y, spec.period), horizon);
    case ForecastSpec::Kind::SeasonalNaive:
        return seasonal_naive(y, spec.period, horizon);
    }
    fail("run_forecast: bad forecast kind");
}

// ---------------------------------------------------------------------------
// Accuracy metrics and backtesting
// ---------------------------------------------------------------------------

struct AccuracyMetrics {
    double mae = 0.0;
    double rmse = 0.0;
};

inline AccuracyMetrics accuracy_metrics(const std::vector<double>& forecasts,
                                        const std::vector<double>& actuals) {
    require(forecasts.size() == actuals.size(), "accuracy_metrics: length mismatch");
    require(!forecasts.empty(), "accuracy_metrics: empty input");
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double e = forecasts[i] - actuals[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
    }
    const double n = static_cast<double>(forecasts.size());
    return {abs_sum / n, std::sqrt(sq_sum / n)};
}

struct BacktestReport {
    std::string model;
    double mae = 0.0;
    double rmse = 0.0;
    std::vector<double> forecasts;
    std::vector<double> actuals;
};

/// Holdout backtest: fit on the first n−h points, forecast h steps, and
/// score the forecasts against the held-out tail.
inline BacktestReport backtest(const std::vector<double>& y, const ForecastSpec& spec,
                               std::size_t holdout) {
    require(holdout >= 1, "backtest: holdout must be >= 1");
    require(holdout < y.size(), "backtest: holdout must leave a training window (h < n)");
    const std::vector<double> train(y.begin(),
                                    y.end() - static_cast<std::ptrdiff_t>(holdout));
    const auto path = run_forecast(train, spec, static_cast<int>(holdout));
    const std::vector<double> actual(y.end() - static_cast<std::ptrdiff_t>(holdout), y.end());
    const auto metrics = accuracy_metrics(path.point, actual);
    return {path.label, metrics.mae, metrics.rmse, path.point, actual};
}

} // namespace garden::forecast
