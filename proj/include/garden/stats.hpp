#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "garden/error.hpp"

namespace garden::stats {

namespace detail {

inline constexpr double kTiny = 1e-300;
inline constexpr double kTol = 1e-12;
inline constexpr int kMaxTerms = 300;

// Continued fraction for the regularized incomplete beta, evaluated with
// Lentz's method.
inline double betacf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxTerms; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kTol) {
            return h;
        }
    }
    fail("incomplete beta: continued fraction did not converge for a=", a, " b=", b,
         " x=", x);
}

// Series for the regularized lower incomplete gamma P(a, x).
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxTerms; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kTol) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    fail("incomplete gamma: series did not converge for a=", a, " x=", x);
}

// Continued fraction for the regularized upper incomplete gamma Q(a, x).
inline double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = b + an / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kTol) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    fail("incomplete gamma: continued fraction did not converge for a=", a, " x=", x);
}

} // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incbeta(double a, double b, double x) {
    require(a > 0 && b > 0, "incbeta: a and b must be positive");
    require(x >= 0.0 && x <= 1.0, "incbeta: x must lie in [0, 1]");
    if (x == 0.0) {
        return 0.0;
    }
    if (x == 1.0) {
        return 1.0;
    }
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::betacf(a, b, x) / a;
    }
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Student-t upper tail P(T > t) with df degrees of freedom.
inline double t_sf(double t, double df) {
    require(df > 0, "t_sf: df must be positive");
    if (t < 0.0) {
        return 1.0 - t_sf(-t, df);
    }
    if (t == 0.0) {
        return 0.5;
    }
    const double x = df / (df + t * t);
    return 0.5 * incbeta(0.5 * df, 0.5, x);
}

/// Chi-squared upper tail P(X > x) with df degrees of freedom. Uses the
/// series for small x and the continued fraction otherwise.
inline double chi2_sf(double x, double df) {
    require(df > 0, "chi2_sf: df must be positive");
    require(x >= 0, "chi2_sf: x must be non-negative");
    if (x == 0.0) {
        return 1.0;
    }
    const double a = 0.5 * df;
    const double xx = 0.5 * x;
    if (x < df + 1.0) {
        return 1.0 - detail::gamma_p_series(a, xx);
    }
    return detail::gamma_q_cf(a, xx);
}

/// Descriptive summary; stddev uses the n-1 denominator and is absent for a
/// single observation.
struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> stddev;
    double min = 0.0;
    double max = 0.0;
};

inline Summary describe(std::span<const double> values) {
    require(!values.empty(), "describe: empty input");
    Summary s;
    s.n = values.size();
    double sum = 0.0;
    s.min = values[0];
    s.max = values[0];
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - s.mean;
            ss += d * d;
        }
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Welch's two-sample t-test (unequal variances), two-sided.
inline TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    require(a.size() >= 2 && b.size() >= 2, "welch_t_test: need at least 2 samples per group");
    const Summary sa = describe(a);
    const Summary sb = describe(b);
    const double va = *sa.stddev * *sa.stddev;
    const double vb = *sb.stddev * *sb.stddev;
    require(va > 0 && vb > 0, "welch_t_test: degenerate variance");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double se2 = va / na + vb / nb;
    const double t = (sa.mean - sb.mean) / std::sqrt(se2);
    const double df = se2 * se2 /
                      ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    TestResult r;
    r.name = "welch_t";
    r.statistic = t;
    r.df = df;
    r.p_value = 2.0 * t_sf(std::fabs(t), df);
    r.p_value = std::min(r.p_value, 1.0);
    return r;
}

/// Pearson chi-squared test of independence on an r x c contingency table.
inline TestResult chi_squared_test(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size();
    require(rows >= 2, "chi_squared_test: need at least 2 rows");
    const std::size_t cols = table[0].size();
    require(cols >= 2, "chi_squared_test: need at least 2 columns");
    for (const auto& row : table) {
        require(row.size() == cols, "chi_squared_test: ragged table");
        for (double v : row) {
            require(v >= 0, "chi_squared_test: negative count");
        }
    }
    std::vector<double> row_sum(rows, 0.0);
    std::vector<double> col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            row_sum[i] += table[i][j];
            col_sum[j] += table[i][j];
            total += table[i][j];
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        require(row_sum[i] > 0, "chi_squared_test: row ", i, " sums to zero");
    }
    for (std::size_t j = 0; j < cols; ++j) {
        require(col_sum[j] > 0, "chi_squared_test: column ", j, " sums to zero");
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double expected = row_sum[i] * col_sum[j] / total;
            const double d = table[i][j] - expected;
            stat += d * d / expected;
        }
    }
    TestResult r;
    r.name = "chi_squared";
    r.statistic = stat;
    r.df = static_cast<double>((rows - 1) * (cols - 1));
    r.p_value = chi2_sf(stat, r.df);
    return r;
}

} // namespace garden::stats
