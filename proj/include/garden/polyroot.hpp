#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace garden::polyroot {

/// All complex roots of the monic polynomial
///   z^n + c[n-1] z^{n-1} + ... + c[1] z + c[0]
/// via Durand-Kerner iteration. Degrees here are tiny (<= 5), so a fixed
/// iteration budget is plenty; with repeated roots the estimates are still
/// accurate to far better than the unit-circle checks need.
inline std::vector<std::complex<double>> roots(const std::vector<double>& coeffs) {
    const std::size_t n = coeffs.size();
    if (n == 0) {
        return {};
    }
    const auto eval = [&](std::complex<double> z) {
        std::complex<double> v = 1.0;
        for (std::size_t i = n; i-- > 0;) {
            v = v * z + coeffs[i];
        }
        return v;
    };

    std::vector<std::complex<double>> x(n);
    const std::complex<double> base(0.4, 0.9);
    std::complex<double> p = base;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = p;
        p *= base;
    }

    for (int iter = 0; iter < 1000; ++iter) {
        double max_delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> denom = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    denom *= x[i] - x[j];
                }
            }
            const std::complex<double> delta = eval(x[i]) / denom;
            x[i] -= delta;
            max_delta = std::max(max_delta, std::abs(delta));
        }
        if (max_delta < 1e-13) {
            break;
        }
    }
    return x;
}

/// Largest root modulus of the monic polynomial above; 0 for degree 0.
/// If sum |c_i| < 1 every root is strictly inside the unit circle, so the
/// root finder is skipped and an upper bound below 1 is returned.
inline double max_root_modulus(const std::vector<double>& coeffs) {
    if (coeffs.empty()) {
        return 0.0;
    }
    double abs_sum = 0.0;
    for (double c : coeffs) {
        abs_sum += std::abs(c);
    }
    if (abs_sum < 1.0) {
        return abs_sum; // bound suffices: all roots have modulus < 1
    }
    double max_mod = 0.0;
    for (const auto& r : roots(coeffs)) {
        max_mod = std::max(max_mod, std::abs(r));
    }
    return max_mod;
}

} // namespace garden::polyroot
