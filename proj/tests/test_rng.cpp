#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "garden/rng.hpp"

using namespace garden;
using Catch::Matchers::WithinAbs;

TEST_CASE("splitmix64 matches the reference sequence") {
    // First three outputs of the reference implementation seeded with 0.
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
    CHECK(splitmix64(state) == 0x06c45d188009454fULL);
}

TEST_CASE("fnv1a64 matches published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("derived seeds separate stages and indices") {
    const std::uint64_t root = 42;
    CHECK(derive_seed(root, "synth") == derive_seed(root, "synth"));
    CHECK(derive_seed(root, "synth") != derive_seed(root, "split"));
    CHECK(derive_seed(root, "perm", 0) != derive_seed(root, "perm", 1));
    CHECK(derive_seed(root, "perm", 7) == derive_seed(root, "perm", 7));
    CHECK(derive_seed(1, "perm") != derive_seed(2, "perm"));

    // No collisions across a modest tag/index block.
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        seen.insert(derive_seed(root, "perm:moran", i));
        seen.insert(derive_seed(root, "perm:geary", i));
    }
    CHECK(seen.size() == 2000);
}

TEST_CASE("generators with equal seeds agree, different seeds differ") {
    Rng a(123), b(123), c(124);
    bool any_diff = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        REQUIRE(va == b.next_u64());
        any_diff |= va != c.next_u64();
    }
    CHECK(any_diff);
}

TEST_CASE("uniform_below stays in range with a sane mean") {
    Rng rng(7);
    const std::uint64_t n = 10;
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const auto v = rng.uniform_below(n);
        REQUIRE(v < n);
        sum += static_cast<double>(v);
    }
    // Mean of U{0..9} is 4.5, sd of the sample mean ~ 0.02.
    CHECK_THAT(sum / 20000.0, WithinAbs(4.5, 0.1));
    CHECK_THROWS_AS(rng.uniform_below(0), Error);
}

TEST_CASE("uniform_int covers closed ranges") {
    Rng rng(11);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto v = rng.uniform_int(-3, 3);
        REQUIRE((v >= -3 && v <= 3));
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.uniform_int(5, 5) == 5);
    CHECK_THROWS_AS(rng.uniform_int(2, 1), Error);
}

TEST_CASE("uniform01 is in [0,1) with mean 1/2") {
    Rng rng(13);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double v = rng.uniform01();
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
        sum += v;
    }
    CHECK_THAT(sum / 20000.0, WithinAbs(0.5, 0.01));
}

TEST_CASE("normal has standard moments") {
    Rng rng(17);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK_THAT(mean, WithinAbs(0.0, 0.02));
    CHECK_THAT(var, WithinAbs(1.0, 0.03));
    CHECK_THAT(rng.normal(10.0, 0.0), WithinAbs(10.0, 1e-12));
}

TEST_CASE("poisson sampling has the right mean, including chunked rates") {
    Rng rng(19);
    for (double lambda : {0.5, 4.0, 100.0}) { // 100 exercises the chunking path
        const int n = 20000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto v = rng.poisson(lambda);
            REQUIRE(v >= 0);
            sum += static_cast<double>(v);
        }
        // sd of the sample mean is sqrt(lambda/n); allow 5 sigma.
        const double tol = 5.0 * std::sqrt(lambda / n);
        CHECK_THAT(sum / n, WithinAbs(lambda, tol));
    }
    CHECK(rng.poisson(0.0) == 0);
    CHECK_THROWS_AS(rng.poisson(-1.0), Error);
}

TEST_CASE("shuffle produces a permutation, deterministically per seed") {
    std::vector<int> v(30);
    for (int i = 0; i < 30; ++i) {
        v[i] = i;
    }
    auto a = v;
    Rng(101).shuffle(a);
    auto b = v;
    Rng(101).shuffle(b);
    CHECK(a == b);

    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == v);

    auto other = v;
    Rng(102).shuffle(other);
    CHECK(a != other);
}

TEST_CASE("log_uniform stays inside its bounds") {
    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.log_uniform(1e-4, 10.0);
        REQUIRE(v >= 1e-4);
        REQUIRE(v <= 10.0);
    }
    CHECK_THROWS_AS(rng.log_uniform(0.0, 1.0), Error);
}
