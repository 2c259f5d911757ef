#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "macts/clock.hpp"

using macts::HardwareClock;
using macts::LogicalClock;

TEST_CASE("hardware readout matches drift and boot offset") {
    CHECK(HardwareClock{0.0, 0.0}.read(1'000'000.0) == 1'000'000);
    CHECK(HardwareClock{40.0, 0.0}.read(1'000'000.0) == 1'000'040);
    CHECK(HardwareClock{-40.0, 500'000'000.0}.read(0.0) == 500'000'000);
}

TEST_CASE("hardware readout is monotone and granularity-aligned") {
    std::mt19937_64 rng{42};
    std::uniform_real_distribution<double> ppm(-40.0, 40.0);
    std::uniform_real_distribution<double> boot(0.0, 500e6);
    std::uniform_real_distribution<double> step(0.0, 1e6);
    for (int trial = 0; trial < 50; ++trial) {
        const HardwareClock clock{ppm(rng), boot(rng)};
        double t = 0.0;
        std::int64_t last = clock.read(t);
        for (int i = 0; i < 200; ++i) {
            t += step(rng);
            const std::int64_t now = clock.read(t);
            CHECK(now >= last);
            CHECK(now % clock.granularity_us == 0);
            last = now;
        }
    }
}

TEST_CASE("empirical hardware-rate ratio matches the drift ratio") {
    std::mt19937_64 rng{7};
    std::uniform_real_distribution<double> ppm(-40.0, 40.0);
    std::uniform_real_distribution<double> boot(0.0, 500e6);
    for (int trial = 0; trial < 100; ++trial) {
        const HardwareClock a{ppm(rng), boot(rng)};
        const HardwareClock b{ppm(rng), boot(rng)};
        const double t1 = std::uniform_real_distribution<double>(0.0, 1e9)(rng);
        const double dt = std::uniform_real_distribution<double>(1e6, 1e8)(rng);
        const double empirical =
            static_cast<double>(b.read(t1 + dt) - b.read(t1)) /
            static_cast<double>(a.read(t1 + dt) - a.read(t1));
        const double exact = (1.0 + b.rate_ppm * 1e-6) / (1.0 + a.rate_ppm * 1e-6);
        CHECK(std::abs(empirical - exact) <=
              2.05 * static_cast<double>(a.granularity_us) / dt);
    }
}

TEST_CASE("logical readout follows the anchor and the rate multiplier") {
    CHECK(LogicalClock{1.0, 0, 0.0}.read(5'000) == 5'000);
    CHECK(LogicalClock{1.00004, 0, 0.0}.read(1'000'000) == 1'000'040);
    CHECK(LogicalClock{0.5, 100, 200.0}.read(300) == 300);
}

TEST_CASE("logical readout rejects hardware time before the anchor") {
    const LogicalClock lc{1.0, 1'000, 1'000.0};
    CHECK_THROWS_AS(lc.read(999), std::logic_error);
}

TEST_CASE("update jumps the value by the correction and switches the rate") {
    LogicalClock lc;
    REQUIRE(lc.read(1'000) == 1'000);
    lc.apply_update(1'000, 1.0, 50.0);
    CHECK(lc.read(1'000) == 1'050);

    SECTION("zero correction keeps the value continuous while the slope doubles") {
        lc.apply_update(1'000, 2.0, 0.0);
        CHECK(lc.read(1'000) == 1'050);
        CHECK(lc.read(1'100) == 1'050 + 200);
    }

    SECTION("negative corrections are permitted") {
        lc.apply_update(1'000, 1.0, -50.0);
        CHECK(lc.read(1'000) == 1'000);
    }

    SECTION("non-positive rate multipliers are rejected") {
        CHECK_THROWS_AS(lc.apply_update(1'100, 0.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(lc.apply_update(1'100, -1.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("update with zero correction and unchanged rate is a no-op") {
    std::mt19937_64 rng{3};
    std::uniform_real_distribution<double> phi_dist(0.5, 1.5);
    std::uniform_int_distribution<std::int64_t> hw_dist(0, 1'000'000);
    for (int trial = 0; trial < 50; ++trial) {
        LogicalClock a;
        a.phi = phi_dist(rng);
        LogicalClock b = a;
        const std::int64_t at = hw_dist(rng);
        b.apply_update(at, b.phi, 0.0);
        for (int i = 0; i < 20; ++i) {
            const std::int64_t hw = at + hw_dist(rng);
            CHECK(a.read(hw) == b.read(hw));
        }
    }
}

TEST_CASE("real-valued corrections land within readout quantization") {
    LogicalClock lc;
    lc.apply_update(0, 1.0, 0.0);
    const std::int64_t before = lc.read(500);
    lc.apply_update(500, 1.0, 49.835);
    const std::int64_t after = lc.read(500);
    CHECK(std::abs(static_cast<double>(after - before) - 49.835) <= 1.0);
}
