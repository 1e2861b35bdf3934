#include <gtest/gtest.h>

#include <cmath>

#include "actflow/core/hash.hpp"
#include "actflow/core/rng.hpp"

using actflow::Fnv1a;
using actflow::Rng;

TEST(Rng, DeterministicAcrossInstances) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(Rng, StreamsDecorrelated) {
    Rng a = Rng::for_stream(7, 0);
    Rng b = Rng::for_stream(7, 1);
    int same = 0;
    for (int i = 0; i < 64; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    EXPECT_EQ(same, 0);
}

TEST(Rng, UniformIntBoundsAndCoverage) {
    Rng rng(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        int64_t v = rng.uniform_int(7);
        ASSERT_GE(v, 0);
        ASSERT_LT(v, 7);
        counts[static_cast<size_t>(v)]++;
    }
    for (int c : counts) {
        EXPECT_NEAR(c, 10000, 500);
    }
}

TEST(Rng, NormalMoments) {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(Rng, UniformRange) {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform(2.0, 3.0);
        EXPECT_GE(u, 2.0);
        EXPECT_LT(u, 3.0);
    }
}

TEST(Fnv1aHash, MatchesKnownVector) {
    // FNV-1a 64 of "a" is a published constant
    Fnv1a h;
    h.update("a");
    EXPECT_EQ(h.hex(), "af63dc4c8601ec8c");
}

TEST(Fnv1aHash, IncrementalEqualsWhole) {
    Fnv1a a, b;
    a.update("hello ");
    a.update("world");
    b.update("hello world");
    EXPECT_EQ(a.hex(), b.hex());
}
