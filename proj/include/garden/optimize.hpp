#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "garden/error.hpp"

namespace garden::optimize {

struct NmResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nelder-Mead downhill simplex with the standard coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
///
/// The initial simplex is x0 plus one vertex per dimension offset by
/// `step` along that axis. Terminates when the simplex diameter (max
/// pairwise Euclidean distance) drops below `tol` or after `max_iter`
/// iterations.
template <typename F>
NmResult nelder_mead(F&& f, std::vector<double> x0, double step = 0.1, double tol = 1e-8,
                     int max_iter = 2000) {
    require(!x0.empty(), "nelder_mead: empty starting point");
    const std::size_t n = x0.size();

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = f(simplex[i]);
    }

    const auto diameter = [&]() {
        double d2 = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = i + 1; j <= n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double d = simplex[i][k] - simplex[j][k];
                    s += d * d;
                }
                d2 = std::max(d2, s);
            }
        }
        return std::sqrt(d2);
    };

    NmResult result;
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        if (diameter() < tol) {
            result.converged = true;
            break;
        }
        const std::size_t best = order[0];
        const std::size_t second_worst = order[n - 1];
        const std::size_t worst = order[n];

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                centroid[k] += simplex[i][k];
            }
        }
        for (double& c : centroid) {
            c /= static_cast<double>(n);
        }

        for (std::size_t k = 0; k < n; ++k) {
            xr[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
        }
        const double fr = f(xr);

        if (fr < values[best]) {
            for (std::size_t k = 0; k < n; ++k) {
                xe[k] = centroid[k] + 2.0 * (xr[k] - centroid[k]);
            }
            const double fe = f(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second_worst]) {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }

        bool shrink = false;
        if (fr < values[worst]) {
            for (std::size_t k = 0; k < n; ++k) {
                xc[k] = centroid[k] + 0.5 * (xr[k] - centroid[k]);
            }
            const double fc = f(xc);
            if (fc <= fr) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                shrink = true;
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                xc[k] = centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
            }
            const double fc = f(xc);
            if (fc < values[worst]) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == best) {
                    continue;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
                }
                values[i] = f(simplex[i]);
            }
        }
    }

    const std::size_t best = static_cast<std::size_t>(
        std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    result.iterations = iter;
    return result;
}

} // namespace garden::optimize
