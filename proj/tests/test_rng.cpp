#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedsb/rng.hpp"

using namespace fedsb;

TEST_CASE("splitmix64 matches the reference sequence") {
    // First output of the published generator for states 0 and 42.
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
    CHECK(splitmix64(42) == 0xBDD732262FEB6E95ULL);
}

TEST_CASE("mix_seed is deterministic and order-sensitive") {
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(mix_seed(7, 0) != mix_seed(7, 1));
}

TEST_CASE("client round seeds separate clients and rounds") {
    CHECK(client_round_seed(1, 0, 0) != client_round_seed(1, 1, 0));
    CHECK(client_round_seed(1, 0, 0) != client_round_seed(1, 0, 1));
    CHECK(client_round_seed(1, 0, 0) != client_round_seed(2, 0, 0));
    CHECK(client_round_seed(9, 3, 17) == client_round_seed(9, 3, 17));
}

TEST_CASE("uniform01 stays in [0, 1)") {
    Rng rng(123);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform respects its bounds") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-2.5, 3.5);
        CHECK(u >= -2.5);
        CHECK(u < 3.5);
    }
}

TEST_CASE("normal draws have standard moments") {
    Rng rng(99);
    const int n = 20000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(var > 0.9);
    CHECK(var < 1.1);
}

TEST_CASE("identical seeds reproduce identical streams") {
    Rng a(777);
    Rng b(777);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("below is bounded and covers its range") {
    Rng rng(3);
    CHECK(rng.below(1) == 0);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const std::uint64_t v = rng.below(7);
        CHECK(v < 7);
        seen[v] += 1;
    }
    for (int count : seen) CHECK(count > 0);
}

TEST_CASE("shuffle permutes without losing elements") {
    std::vector<int> v = {1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> w = v;
    Rng rng(11);
    rng.shuffle(w);
    auto sorted = w;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == v);

    std::vector<int> w2 = v;
    Rng rng2(11);
    rng2.shuffle(w2);
    CHECK(w == w2);
}
