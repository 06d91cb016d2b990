#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "garden/corpus.hpp"
#include "garden/error.hpp"
#include "garden/parallel.hpp"
#include "garden/rng.hpp"

namespace garden::spatial {

// ---------------------------------------------------------------------------
// Region table
// ---------------------------------------------------------------------------

struct SiteRow {
    std::string zip;
    double lat = 0.0;
    double lon = 0.0;
    std::string region;
};

/// Site coordinates keyed by ZIP code, loaded from a `zip,lat,lon,region`
/// CSV. Row order is preserved; zips must be unique and coordinates valid.
class RegionTable {
public:
    explicit RegionTable(std::vector<SiteRow> rows) : rows_(std::move(rows)) {
        require(!rows_.empty(), "region table has no rows");
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto& r = rows_[i];
            require(corpus::valid_zip(r.zip), "invalid zip \"", r.zip, "\" in region table");
            require(r.lat >= -90.0 && r.lat <= 90.0, "latitude out of range for zip ", r.zip);
            require(r.lon >= -180.0 && r.lon <= 180.0, "longitude out of range for zip ",
                    r.zip);
            require(!r.region.empty(), "empty region for zip ", r.zip);
            const auto [it, inserted] = index_.emplace(r.zip, i);
            require(inserted, "duplicate zip ", r.zip, " in region table");
        }
    }

    const std::vector<SiteRow>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    const SiteRow* find(const std::string& zip) const {
        const auto it = index_.find(zip);
        return it == index_.end() ? nullptr : &rows_[it->second];
    }

private:
    std::vector<SiteRow> rows_;
    std::map<std::string, std::size_t> index_;
};

inline RegionTable parse_region_table(std::string_view bytes) {
    const auto rows = corpus::detail::read_csv(bytes);
    require(!rows.empty(), "region table csv has no header row");
    const auto& header = rows.front().first;
    std::string joined;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) {
            joined += ',';
        }
        joined += header[i];
    }
    require(joined == "zip,lat,lon,region", "region table header must be \"zip,lat,lon,region\", got \"",
            joined, "\"");
    std::vector<SiteRow> sites;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& fields = rows[r].first;
        const std::size_t line = rows[r].second;
        require(fields.size() == 4, "expected 4 fields at line ", line, ", got ",
                fields.size());
        SiteRow row;
        row.zip = fields[0];
        try {
            row.lat = std::stod(fields[1]);
            row.lon = std::stod(fields[2]);
        } catch (const std::exception&) {
            fail("malformed coordinate at line ", line);
        }
        row.region = fields[3];
        sites.push_back(std::move(row));
    }
    return RegionTable(std::move(sites));
}

/// Great-circle distance in kilometers (haversine, mean earth radius).
inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kRadiusKm = 6371.0088;
    constexpr double kDegToRad = 3.141592653589793238462643383279502884 / 180.0;
    const double phi1 = lat1 * kDegToRad;
    const double phi2 = lat2 * kDegToRad;
    const double dphi = (lat2 - lat1) * kDegToRad;
    const double dlam = (lon2 - lon1) * kDegToRad;
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
    return 2.0 * kRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

// ---------------------------------------------------------------------------
// Spatial weights
// ---------------------------------------------------------------------------

/// Symmetric binary contiguity/neighbor matrix with a zero diagonal.
class SpatialWeights {
public:
    /// Undirected edge list over n sites.
    static SpatialWeights from_edges(std::size_t n,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        require(n >= 2, "spatial weights need at least 2 sites");
        SpatialWeights w;
        w.n_ = n;
        w.w_.assign(n * n, 0.0);
        for (const auto& [i, j] : edges) {
            require(i < n && j < n, "edge index out of range");
            require(i != j, "self edge at site ", i);
            w.w_[i * n + j] = 1.0;
            w.w_[j * n + i] = 1.0;
        }
        w.finish();
        return w;
    }

    /// k-nearest-neighbor graph under haversine distance, symmetrized by
    /// union: w_ij = 1 when i is among j's k nearest or vice versa.
    /// Distance ties are broken by the smaller ZIP code string.
    static SpatialWeights knn(const RegionTable& table, std::size_t k) {
        const std::size_t n = table.size();
        require(n >= 2, "spatial weights need at least 2 sites");
        require(k >= 1 && k < n, "k must be in [1, ", n - 1, "] for ", n, " sites");
        SpatialWeights w;
        w.n_ = n;
        w.w_.assign(n * n, 0.0);
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t i = 0; i < n; ++i) {
            dist.clear();
            const auto& a = table.rows()[i];
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                const auto& b = table.rows()[j];
                dist.emplace_back(haversine_km(a.lat, a.lon, b.lat, b.lon), j);
            }
            std::sort(dist.begin(), dist.end(), [&](const auto& x, const auto& y) {
                if (x.first != y.first) {
                    return x.first < y.first;
                }
                return table.rows()[x.second].zip < table.rows()[y.second].zip;
            });
            for (std::size_t r = 0; r < k; ++r) {
                const std::size_t j = dist[r].second;
                w.w_[i * n + j] = 1.0;
                w.w_[j * n + i] = 1.0;
            }
        }
        w.finish();
        return w;
    }

    std::size_t size() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
    double s0() const { return s0_; }

    /// Non-zero neighbor indices of site i.
    const std::vector<std::uint32_t>& neighbors(std::size_t i) const { return adj_[i]; }

private:
    void finish() {
        s0_ = 0.0;
        adj_.assign(n_, {});
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (w_[i * n_ + j] != 0.0) {
                    s0_ += w_[i * n_ + j];
                    adj_[i].push_back(static_cast<std::uint32_t>(j));
                }
            }
        }
        require(s0_ > 0.0, "spatial weights have no links");
    }

    std::size_t n_ = 0;
    std::vector<double> w_;
    std::vector<std::vector<std::uint32_t>> adj_;
    double s0_ = 0.0;
};

// ---------------------------------------------------------------------------
// Global autocorrelation
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> center(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = x[i] - mean;
    }
    return z;
}

inline double sum_sq(const std::vector<double>& z) {
    double s = 0.0;
    for (double v : z) {
        s += v * v;
    }
    return s;
}

} // namespace detail

/// Moran's I = (n / S0) * sum_ij w_ij z_i z_j / sum_i z_i^2.
inline double morans_i(const std::vector<double>& values, const SpatialWeights& w) {
    const std::size_t n = values.size();
    require(n == w.size(), "morans_i: values/weights size mismatch");
    const auto z = detail::center(values);
    const double denom = detail::sum_sq(z);
    require(denom > 0.0, "morans_i: constant values have no spatial variance");
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double lag = 0.0;
        for (std::uint32_t j : w.neighbors(i)) {
            lag += w.at(i, j) * z[j];
        }
        cross += z[i] * lag;
    }
    return (static_cast<double>(n) / w.s0()) * cross / denom;
}

/// Geary's C = ((n - 1) / (2 S0)) * sum_ij w_ij (x_i - x_j)^2 / sum_i z_i^2.
inline double gearys_c(const std::vector<double>& values, const SpatialWeights& w) {
    const std::size_t n = values.size();
    require(n == w.size(), "gearys_c: values/weights size mismatch");
    const auto z = detail::center(values);
    const double denom = detail::sum_sq(z);
    require(denom > 0.0, "gearys_c: constant values have no spatial variance");
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t j : w.neighbors(i)) {
            const double d = values[i] - values[j];
            cross += w.at(i, j) * d * d;
        }
    }
    return (static_cast<double>(n - 1) / (2.0 * w.s0())) * cross / denom;
}

inline double morans_expected(std::size_t n) {
    return -1.0 / static_cast<double>(n - 1);
}

inline constexpr double gearys_expected() { return 1.0; }

enum class GlobalStat { MoransI, GearysC };

/// Two-sided permutation p-value around the statistic's null expectation:
/// p = (1 + #{|perm - E| >= |observed - E|}) / (1 + n_perm). Each
/// permutation draws from its own derived seed, so results are identical
/// for any thread count.
inline double permutation_pvalue(const std::vector<double>& values, const SpatialWeights& w,
                                 GlobalStat stat, int n_perm, std::uint64_t seed,
                                 unsigned threads = 1) {
    require(n_perm >= 1, "permutation_pvalue: n_perm must be >= 1");
    const bool moran = stat == GlobalStat::MoransI;
    const double observed = moran ? morans_i(values, w) : gearys_c(values, w);
    const double expected = moran ? morans_expected(values.size()) : gearys_expected();
    const double obs_dev = std::abs(observed - expected);
    const char* tag = moran ? "perm:moran" : "perm:geary";

    std::vector<char> extreme(static_cast<std::size_t>(n_perm), 0);
    parallel_for(static_cast<std::size_t>(n_perm), threads, [&](std::size_t i) {
        Rng rng(derive_seed(seed, tag, i));
        std::vector<double> shuffled = values;
        rng.shuffle(shuffled);
        const double stat_i = moran ? morans_i(shuffled, w) : gearys_c(shuffled, w);
        if (std::abs(stat_i - expected) >= obs_dev) {
            extreme[i] = 1;
        }
    });
    std::size_t count = 0;
    for (char c : extreme) {
        count += static_cast<std::size_t>(c);
    }
    return static_cast<double>(1 + count) / static_cast<double>(1 + n_perm);
}

// ---------------------------------------------------------------------------
// Local Moran (LISA)
// ---------------------------------------------------------------------------

struct LocalMoran {
    double local_i = 0.0;
    double p_value = 1.0;
    std::string label; // HH, LL, HL, LH, or NS
};

/// Local Moran's I_i = n z_i (sum_j w_ij z_j) / sum z^2 with conditional
/// permutation significance: z_i stays fixed while neighbor values are
/// drawn from the remaining sites. Quadrant labels (HH/LL/HL/LH) apply
/// only when p_i <= alpha; everything else is NS.
inline std::vector<LocalMoran> local_morans_i(const std::vector<double>& values,
                                              const SpatialWeights& w, int n_perm,
                                              std::uint64_t seed, double alpha = 0.05,
                                              unsigned threads = 1) {
    const std::size_t n = values.size();
    require(n == w.size(), "local_morans_i: values/weights size mismatch");
    require(n_perm >= 1, "local_morans_i: n_perm must be >= 1");
    const auto z = detail::center(values);
    const double denom = detail::sum_sq(z);
    require(denom > 0.0, "local_morans_i: constant values have no spatial variance");
    const double scale = static_cast<double>(n) / denom;

    std::vector<LocalMoran> out(n);
    parallel_for(n, threads, [&](std::size_t i) {
        double lag = 0.0;
        for (std::uint32_t j : w.neighbors(i)) {
            lag += w.at(i, j) * z[j];
        }
        const double observed = scale * z[i] * lag;

        std::vector<double> pool;
        pool.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                pool.push_back(z[j]);
            }
        }
        const std::size_t k = w.neighbors(i).size();
        Rng rng(derive_seed(seed, "perm:local", i));
        int count = 0;
        std::vector<double> scratch(pool.size());
        for (int rep = 0; rep < n_perm; ++rep) {
            scratch = pool;
            rng.shuffle(scratch);
            double perm_lag = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                perm_lag += scratch[r];
            }
            const double perm_i = scale * z[i] * perm_lag;
            if (std::abs(perm_i) >= std::abs(observed)) {
                ++count;
            }
        }
        out[i].local_i = observed;
        out[i].p_value = static_cast<double>(1 + count) / static_cast<double>(1 + n_perm);
        if (out[i].p_value <= alpha) {
            if (z[i] > 0) {
                out[i].label = lag > 0 ? "HH" : "HL";
            } else {
                out[i].label = lag > 0 ? "LH" : "LL";
            }
        } else {
            out[i].label = "NS";
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Corpus-level spatial analysis
// ---------------------------------------------------------------------------

/// Query counts per region-table site, in row order. Every corpus ZIP must
/// be present in the table.
inline std::vector<double> counts_by_zip(const corpus::Corpus& corpus,
                                         const RegionTable& table) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < table.size(); ++i) {
        index.emplace(table.rows()[i].zip, i);
    }
    std::vector<double> counts(table.size(), 0.0);
    for (const auto& rec : corpus.records()) {
        const auto it = index.find(rec.zip);
        require(it != index.end(), "zip ", rec.zip, " not present in region table");
        counts[it->second] += 1.0;
    }
    return counts;
}

struct SpatialAnalysis {
    std::size_t n_sites = 0;
    int k = 0;
    int n_permutations = 0;
    double morans_i = 0.0;
    double morans_expected = 0.0;
    double morans_p = 1.0;
    double gearys_c = 0.0;
    double gearys_expected = 1.0;
    double gearys_p = 1.0;
    std::vector<LocalMoran> local;
};

inline SpatialAnalysis analyze_spatial(const std::vector<double>& values,
                                       const SpatialWeights& w, int k, int n_perm,
                                       std::uint64_t seed, double alpha = 0.05,
                                       unsigned threads = 1) {
    SpatialAnalysis a;
    a.n_sites = values.size();
    a.k = k;
    a.n_permutations = n_perm;
    a.morans_i = morans_i(values, w);
    a.morans_expected = morans_expected(values.size());
    a.morans_p = permutation_pvalue(values, w, GlobalStat::MoransI, n_perm, seed, threads);
    a.gearys_c = gearys_c(values, w);
    a.gearys_expected = gearys_expected();
    a.gearys_p = permutation_pvalue(values, w, GlobalStat::GearysC, n_perm, seed, threads);
    a.local = local_morans_i(values, w, n_perm, seed, alpha, threads);
    return a;
}

} // namespace garden::spatial
