#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "garden/corpus.hpp"
#include "garden/dates.hpp"
#include "garden/forecast.hpp"
#include "garden/polyroot.hpp"
#include "garden/rng.hpp"

using namespace garden;
using Catch::Matchers::WithinAbs;

namespace {

corpus::Corpus corpus_at(const std::vector<std::string>& timestamps) {
    std::vector<corpus::QueryRecord> records;
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        corpus::QueryRecord r;
        r.id = "q" + std::to_string(i + 1);
        r.text = "text";
        r.timestamp = dates::parse_timestamp(timestamps[i]);
        r.zip = "10001";
        records.push_back(std::move(r));
    }
    return corpus::Corpus(std::move(records));
}

// AR(1) simulation with standard-normal shocks, burn-in discarded.
std::vector<double> simulate_ar1(double phi, double c, std::size_t n, std::uint64_t seed,
                                 double sigma = 1.0) {
    Rng rng(seed);
    std::vector<double> y;
    y.reserve(n);
    double prev = c / (1.0 - phi);
    for (std::size_t t = 0; t < n + 50; ++t) {
        const double v = c + phi * prev + sigma * rng.normal();
        if (t >= 50) {
            y.push_back(v);
        }
        prev = v;
    }
    return y;
}

} // namespace

TEST_CASE("monthly aggregation counts, gap-fills, and conserves records") {
    const auto c = corpus_at({"2022-05-03T10:00:00Z", "2022-05-14T09:00:00Z",
                              "2022-05-30T23:59:59Z"});
    const auto ts = forecast::aggregate_counts(c, "monthly");
    REQUIRE(ts.starts.size() == 1);
    CHECK(dates::format_date(ts.starts[0]) == "2022-05-01");
    CHECK(ts.values == std::vector<double>{3.0});

    const auto gappy = forecast::aggregate_counts(
        corpus_at({"2022-01-10T00:00:00Z", "2022-03-05T00:00:00Z"}), "monthly");
    REQUIRE(gappy.values == std::vector<double>{1.0, 0.0, 1.0});
    CHECK(dates::format_date(gappy.starts[1]) == "2022-02-01");

    // Conservation: total counts equal the number of records.
    double total = 0.0;
    for (double v : gappy.values) {
        total += v;
    }
    CHECK(total == 2.0);
}

TEST_CASE("weekly aggregation bins by ISO Monday weeks") {
    // Tue 2022-05-03 and Sun 2022-05-08 share a week, Mon 2022-05-09 opens the next.
    const auto ts = forecast::aggregate_counts(
        corpus_at({"2022-05-03T00:00:00Z", "2022-05-08T12:00:00Z", "2022-05-09T00:00:00Z"}),
        "weekly");
    REQUIRE(ts.values == std::vector<double>{2.0, 1.0});
    CHECK(dates::format_date(ts.starts[0]) == "2022-05-02");
    CHECK(dates::format_date(ts.starts[1]) == "2022-05-09");
}

TEST_CASE("difference basics") {
    CHECK(forecast::difference({1.0, 3.0, 6.0}, 1) == std::vector<double>{2.0, 3.0});
    CHECK(forecast::difference({1.0, 3.0, 6.0}, 0) == std::vector<double>{1.0, 3.0, 6.0});
    CHECK(forecast::difference({1.0, 3.0, 6.0, 10.0}, 2) == std::vector<double>{1.0, 1.0});
    CHECK_THROWS_AS(forecast::difference({5.0}, 1), Error);
}

TEST_CASE("difference then integrate restores the tail exactly") {
    Rng rng(20240519);
    for (int trial = 0; trial < 210; ++trial) {
        const int d = trial % 2 + 1;
        const auto n = static_cast<std::size_t>(rng.uniform_int(d + 2, 40));
        std::vector<double> y(n);
        for (auto& v : y) {
            v = static_cast<double>(rng.uniform_int(-50, 50));
        }
        const auto h = static_cast<std::size_t>(rng.uniform_int(1, 8));

        // Differencing the full series, then integrating the post-split block
        // back on top of the prefix, must reproduce the original tail.
        const auto split = static_cast<std::size_t>(
            rng.uniform_int(d + 1, static_cast<std::int64_t>(n) - 1));
        const auto diffs = forecast::difference(y, d);
        const std::vector<double> head(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(split));
        const std::vector<double> tail_diffs(
            diffs.begin() + static_cast<std::ptrdiff_t>(split - static_cast<std::size_t>(d)),
            diffs.end());
        const auto rebuilt = forecast::integrate_forecasts(head, d, tail_diffs);
        REQUIRE(rebuilt.size() == n - split);
        for (std::size_t i = 0; i < rebuilt.size(); ++i) {
            REQUIRE_THAT(rebuilt[i], WithinAbs(y[split + i], 1e-9));
        }
        (void)h;
    }
}

TEST_CASE("css objective is zero on an exact noise-free AR(1)") {
    std::vector<double> y{1.0};
    for (int t = 1; t < 12; ++t) {
        y.push_back(0.5 * y.back());
    }
    CHECK_THAT(forecast::css_objective({0.0, 0.5}, y, 1, 0), WithinAbs(0.0, 1e-18));
}

TEST_CASE("css objective reproduces a manual residual recursion") {
    // 5-point series with ARMA(1,1) params traced step by step.
    const std::vector<double> y{2.0, -1.0, 3.0, 0.5, 1.0};
    const double c = 0.3, phi = 0.6, theta = 0.4;
    double e_prev = 0.0, y_prev = 0.0;
    double sse = 0.0;
    std::vector<double> residuals;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double e = y[t] - c - phi * y_prev - theta * e_prev;
        residuals.push_back(e);
        if (t >= 1) { // skip = max(p, q) = 1
            sse += e * e;
        }
        y_prev = y[t];
        e_prev = e;
    }
    CHECK_THAT(forecast::css_objective({c, phi, theta}, y, 1, 1), WithinAbs(sse, 1e-12));
}

TEST_CASE("css objective validates its parameter count") {
    CHECK_THROWS_AS(forecast::css_objective({0.0}, {1.0, 2.0, 3.0}, 1, 0), Error);
}

TEST_CASE("white noise fit with order (0,0,0) recovers the mean") {
    Rng rng(4242);
    std::vector<double> y;
    for (int i = 0; i < 200; ++i) {
        y.push_back(5.0 + rng.normal());
    }
    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= static_cast<double>(y.size());

    const auto m = forecast::fit_arima(y, 0, 0, 0);
    CHECK_THAT(m.intercept, WithinAbs(mean, 1e-6));
    CHECK(m.phi.empty());
    CHECK(m.theta.empty());
    CHECK_THAT(m.sigma2, WithinAbs(m.sse / static_cast<double>(m.n_diff), 1e-9));
}

TEST_CASE("ar(1) fit recovers phi and reaches the grid-scan css minimum") {
    const auto y = simulate_ar1(0.7, 0.0, 500, 91);
    const auto m = forecast::fit_arima(y, 1, 0, 0);
    REQUIRE(m.phi.size() == 1);
    CHECK(m.phi[0] >= 0.6);
    CHECK(m.phi[0] <= 0.8);

    // Independent coarse scan: for each phi the optimal intercept of the
    // conditional SSE has the closed form c = mean(y_t - phi*y_{t-1}).
    double grid_min = 1e300;
    for (double phi = -0.95; phi <= 0.951; phi += 0.01) {
        double c = 0.0;
        for (std::size_t t = 1; t < y.size(); ++t) {
            c += y[t] - phi * y[t - 1];
        }
        c /= static_cast<double>(y.size() - 1);
        double sse = 0.0;
        for (std::size_t t = 1; t < y.size(); ++t) {
            const double e = y[t] - c - phi * y[t - 1];
            sse += e * e;
        }
        grid_min = std::min(grid_min, sse);
    }
    CHECK(m.sse <= grid_min * 1.01);
    CHECK(grid_min <= m.sse * 1.01);
}

TEST_CASE("fitted models always satisfy the root conditions") {
    Rng rng(77);
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        const auto y = simulate_ar1(0.6, 1.0, 120, 1000 + trial);
        const auto m = forecast::fit_arima(y, 2, 0, 1);
        // Stationarity: roots of z^2 - phi_1 z - phi_2 inside the unit
        // circle; invertibility likewise for z + theta_1.
        const std::vector<double> ar{-m.phi[1], -m.phi[0]};
        CHECK(polyroot::max_root_modulus(ar) < 1.0);
        const std::vector<double> ma{m.theta[0]};
        CHECK(polyroot::max_root_modulus(ma) < 1.0);
    }
}

TEST_CASE("fit_arima rejects impossible orders") {
    const std::vector<double> tiny{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK_THROWS_AS(forecast::fit_arima(tiny, 1, 1, 1), Error);
    CHECK_THROWS_AS(forecast::fit_arima(tiny, 6, 0, 0), Error);
    CHECK_THROWS_AS(forecast::fit_arima(tiny, 0, 3, 0), Error);
}

TEST_CASE("mean-model forecasts are flat with constant intervals") {
    Rng rng(5);
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) {
        y.push_back(10.0 + rng.normal());
    }
    const auto m = forecast::fit_arima(y, 0, 0, 0);
    const auto path = forecast::arima_forecast(m, y, 6);
    REQUIRE(path.point.size() == 6);
    for (std::size_t h = 0; h < 6; ++h) {
        CHECK_THAT(path.point[h], WithinAbs(m.intercept, 1e-12));
        CHECK_THAT(path.upper[h] - path.lower[h],
                   WithinAbs(path.upper[0] - path.lower[0], 1e-9));
    }
}

TEST_CASE("ar(1) point forecasts follow the geometric recursion") {
    forecast::ArimaModel m;
    m.p = 1;
    m.phi = {0.5};
    m.intercept = 0.0;
    m.sigma2 = 1.0;
    m.n_diff = 10;
    const auto path = forecast::arima_forecast(m, {2.0, 8.0}, 3);
    REQUIRE(path.point.size() == 3);
    CHECK_THAT(path.point[0], WithinAbs(4.0, 1e-12));
    CHECK_THAT(path.point[1], WithinAbs(2.0, 1e-12));
    CHECK_THAT(path.point[2], WithinAbs(1.0, 1e-12));
}

TEST_CASE("forecast intervals bracket the point and widen with horizon") {
    const auto y = simulate_ar1(0.7, 2.0, 200, 17);
    for (int d = 0; d <= 1; ++d) {
        const auto m = forecast::fit_arima(y, 1, d, 1);
        const auto path = forecast::arima_forecast(m, y, 12);
        double prev_width = 0.0;
        for (std::size_t h = 0; h < 12; ++h) {
            REQUIRE(path.lower[h] <= path.point[h]);
            REQUIRE(path.point[h] <= path.upper[h]);
            const double width = path.upper[h] - path.lower[h];
            REQUIRE(width >= prev_width - 1e-9);
            prev_width = width;
        }
    }
}

TEST_CASE("aic selection agrees with a brute-force scan of the same grid") {
    const auto y = simulate_ar1(0.75, 0.0, 300, 23);
    const auto best = forecast::select_arima(y, 2, 1, 2);

    // Strongly autocorrelated data should never select pure noise.
    CHECK(best.p >= 1);

    double best_aic = 1e300;
    int best_p = -1, best_d = -1, best_q = -1;
    for (int p = 0; p <= 2; ++p) {
        for (int d = 0; d <= 1; ++d) {
            for (int q = 0; q <= 2; ++q) {
                double aic = 1e300;
                try {
                    const auto m = forecast::fit_arima(y, p, d, q);
                    aic = m.aic;
                    // AIC recomputable from stored fields.
                    const double n = static_cast<double>(m.n_diff);
                    REQUIRE_THAT(m.aic, WithinAbs(n * std::log(m.sse / n) +
                                                      2.0 * static_cast<double>(p + q + 1),
                                                  1e-9));
                } catch (const Error&) {
                    continue;
                }
                const bool better =
                    aic < best_aic - 1e-12 ||
                    (std::abs(aic - best_aic) <= 1e-12 &&
                     (p + q < best_p + best_q || (p + q == best_p + best_q && d < best_d)));
                if (better) {
                    best_aic = aic;
                    best_p = p;
                    best_d = d;
                    best_q = q;
                }
            }
        }
    }
    CHECK(best.p == best_p);
    CHECK(best.d == best_d);
    CHECK(best.q == best_q);
    CHECK_THAT(best.aic, WithinAbs(best_aic, 1e-9));

    // Degenerate bounds leave a single candidate.
    const auto only = forecast::select_arima(y, 0, 0, 0);
    CHECK((only.p == 0 && only.d == 0 && only.q == 0));
}

TEST_CASE("holt-winters reproduces an exactly periodic series") {
    std::vector<double> y;
    const std::vector<double> cycle{10.0, 20.0, 30.0, 40.0};
    for (int r = 0; r < 10; ++r) {
        y.insert(y.end(), cycle.begin(), cycle.end());
    }
    const auto m = forecast::fit_holt_winters(y, 4);
    CHECK((m.alpha > 0.0 && m.alpha < 1.0));
    CHECK((m.beta > 0.0 && m.beta < 1.0));
    CHECK((m.gamma > 0.0 && m.gamma < 1.0));
    double seasonal_sum = 0.0;
    for (double s : m.seasonal) {
        seasonal_sum += s;
    }
    CHECK_THAT(seasonal_sum, WithinAbs(0.0, 1e-6));

    const auto path = forecast::hw_forecast(m, 8);
    for (std::size_t h = 0; h < 8; ++h) {
        REQUIRE_THAT(path.point[h], WithinAbs(cycle[h % 4], 1e-6));
        REQUIRE(path.lower[h] <= path.point[h]);
        REQUIRE(path.point[h] <= path.upper[h]);
    }
}

TEST_CASE("holt-winters handles constants and rejects short input") {
    const std::vector<double> flat(20, 7.0);
    const auto m = forecast::fit_holt_winters(flat, 5);
    CHECK_THAT(m.level, WithinAbs(7.0, 1e-6));
    CHECK_THAT(m.trend, WithinAbs(0.0, 1e-6));
    for (double s : m.seasonal) {
        CHECK_THAT(s, WithinAbs(0.0, 1e-6));
    }
    CHECK_THROWS_AS(forecast::fit_holt_winters(std::vector<double>(5, 1.0), 5), Error);
    CHECK_THROWS_AS(forecast::fit_holt_winters(flat, 1), Error);
}

TEST_CASE("seasonal naive recycles the last observed cycle") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const auto path = forecast::seasonal_naive(y, 3, 5);
    CHECK(path.point == std::vector<double>{4.0, 5.0, 6.0, 4.0, 5.0});

    // m = 1 repeats the last value.
    const auto naive = forecast::seasonal_naive(y, 1, 3);
    CHECK(naive.point == std::vector<double>{6.0, 6.0, 6.0});

    CHECK_THROWS_AS(forecast::seasonal_naive({1.0, 2.0}, 3, 2), Error);
}

TEST_CASE("accuracy metrics match the hand fixture") {
    const auto m = forecast::accuracy_metrics({1.0, 2.0, 3.0}, {2.0, 2.0, 5.0});
    CHECK_THAT(m.mae, WithinAbs(1.0, 1e-9));
    CHECK_THAT(m.rmse, WithinAbs(std::sqrt(5.0 / 3.0), 1e-9));

    const auto zero = forecast::accuracy_metrics({4.0, 4.0}, {4.0, 4.0});
    CHECK(zero.mae == 0.0);
    CHECK(zero.rmse == 0.0);

    CHECK_THROWS_AS(forecast::accuracy_metrics({1.0}, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(forecast::accuracy_metrics({}, {}), Error);
}

TEST_CASE("rmse dominates mae on random error vectors") {
    Rng rng(137);
    for (int trial = 0; trial < 210; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 50));
        std::vector<double> f(n), a(n);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = rng.uniform(-100.0, 100.0);
            a[i] = rng.uniform(-100.0, 100.0);
        }
        const auto m = forecast::accuracy_metrics(f, a);
        REQUIRE(m.rmse >= m.mae - 1e-12);
    }
}

TEST_CASE("backtest fits the head and scores the held-out tail") {
    // Exactly periodic series: the seasonal-naive backtest is perfect.
    std::vector<double> y;
    for (int r = 0; r < 8; ++r) {
        for (double v : {3.0, 7.0, 5.0}) {
            y.push_back(v);
        }
    }
    forecast::ForecastSpec snaive;
    snaive.kind = forecast::ForecastSpec::Kind::SeasonalNaive;
    snaive.period = 3;
    const auto report = forecast::backtest(y, snaive, 6);
    CHECK(report.mae == 0.0);
    CHECK(report.rmse == 0.0);
    REQUIRE(report.forecasts.size() == 6);
    REQUIRE(report.actuals.size() == 6);
    CHECK(report.model == "seasonal_naive(3)");
    CHECK_THROWS_AS(forecast::backtest(y, snaive, y.size()), Error);
    CHECK_THROWS_AS(forecast::backtest(y, snaive, 0), Error);
}

TEST_CASE("arima backtest beats seasonal naive on a plain ar(1)") {
    const auto y = simulate_ar1(0.8, 5.0, 200, 311);
    forecast::ForecastSpec arima;
    arima.kind = forecast::ForecastSpec::Kind::Arima;
    arima.p = 1;
    arima.d = 0;
    arima.q = 0;
    forecast::ForecastSpec snaive;
    snaive.kind = forecast::ForecastSpec::Kind::SeasonalNaive;
    snaive.period = 12;

    const auto a = forecast::backtest(y, arima, 12);
    const auto s = forecast::backtest(y, snaive, 12);
    CHECK(a.rmse <= s.rmse);
    CHECK(a.rmse >= a.mae - 1e-12);
    CHECK(s.rmse >= s.mae - 1e-12);
}

TEST_CASE("forecast model names resolve, including aliases") {
    using Kind = forecast::ForecastSpec::Kind;
    CHECK(forecast::forecast_kind_from_name("arima") == Kind::Arima);
    CHECK(forecast::forecast_kind_from_name("auto-arima") == Kind::AutoArima);
    CHECK(forecast::forecast_kind_from_name("hw") == Kind::HoltWinters);
    CHECK(forecast::forecast_kind_from_name("holt-winters") == Kind::HoltWinters);
    CHECK(forecast::forecast_kind_from_name("snaive") == Kind::SeasonalNaive);
    CHECK(forecast::forecast_kind_from_name("seasonal-naive") == Kind::SeasonalNaive);
    CHECK_THROWS_AS(forecast::forecast_kind_from_name("prophet"), Error);
}

TEST_CASE("polynomial roots back the stationarity checks") {
    // Monic convention: coeffs are c0..c_{n-1} of z^n + ... + c1 z + c0.
    // (z - 2)(z - 3) = z^2 - 5z + 6.
    CHECK_THAT(polyroot::max_root_modulus({6.0, -5.0}), WithinAbs(3.0, 1e-9));
    // z^2 + 4: roots +/- 2i (|sum of coeffs| >= 1 avoids the bound fast path).
    CHECK_THAT(polyroot::max_root_modulus({4.0, 0.0}), WithinAbs(2.0, 1e-9));
    // Below the fast-path threshold only the < 1 guarantee matters.
    CHECK(polyroot::max_root_modulus({0.2, 0.3}) < 1.0);
    CHECK(polyroot::max_root_modulus({}) == 0.0);

    const auto roots = polyroot::roots({-1.0, 0.0, 0.0}); // z^3 = 1
    REQUIRE(roots.size() == 3);
    for (const auto& r : roots) {
        CHECK_THAT(std::abs(r), WithinAbs(1.0, 1e-9));
        CHECK_THAT(std::abs(std::pow(r, 3) - 1.0), WithinAbs(0.0, 1e-8));
    }
}
