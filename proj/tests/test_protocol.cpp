#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "macts/protocol.hpp"

using namespace macts;

namespace {

NodeState test_node(int id = 0, int h_initial = 2, double d_fixed = 3.0) {
    ProtocolParams params;
    params.h_initial = h_initial;
    params.d_fixed_us = d_fixed;
    HardwareClock hw{0.0, 0.0};
    NodeState node = make_node(id, hw, params);
    return node;
}

} // namespace

TEST_CASE("origin broadcasts carry the node's current clocks and hop zero") {
    NodeState node = test_node(3);
    const SyncMessage msg = make_broadcast(node, 1'000'000, 1'000'000);
    CHECK(msg.hw_ts_us == 1'000'000);
    CHECK(msg.logical_ts_us == 1'000'000);
    CHECK(msg.phi == 1.0);
    CHECK(msg.hop_count == 0);
    CHECK(msg.sender_id == 3);
    CHECK(msg.origin_id == 3);

    node.logical.apply_update(1'000'000, 1.00002, 0.0);
    const SyncMessage next = make_broadcast(node, 1'000'100, node.logical.read(1'000'100));
    CHECK(next.phi == 1.00002);
    CHECK(next.hop_count == 0);
    CHECK(next.wave == msg.wave + 1);
}

TEST_CASE("skew estimation needs two pairs and divides transmitter by receiver deltas") {
    NeighborRecord rec;
    // first pair only stores
    CHECK(estimate_skew(rec, 1'000'000, 2'000'000) == 1.0);
    CHECK(rec.has_pair);

    SECTION("nominal clocks give ratio one") {
        CHECK(estimate_skew(rec, 31'000'000, 32'000'000) == 1.0);
    }
    SECTION("a fast receiver sees the transmitter as slow") {
        // receiver at +40 ppm covers 30'001'200 us while the nominal
        // transmitter covers 30'000'000 us
        const double est = estimate_skew(rec, 31'001'200, 32'000'000);
        CHECK_THAT(est, Catch::Matchers::WithinRel(30'000'000.0 / 30'001'200.0, 1e-12));
    }
    SECTION("fast transmitter over slow receiver exceeds one") {
        const double est = estimate_skew(rec, 30'998'800, 32'001'200);
        CHECK_THAT(est, Catch::Matchers::WithinRel((1.0 + 40e-6) / (1.0 - 40e-6), 1e-9));
    }
    SECTION("degenerate pairs are discarded") {
        REQUIRE(estimate_skew(rec, 31'000'000, 32'000'000) == 1.0);
        CHECK(estimate_skew(rec, 31'000'000, 32'000'010) == 1.0); // zero receiver delta
        CHECK(estimate_skew(rec, 30'000'000, 32'000'020) == 1.0); // receiver went backwards
        CHECK(rec.hw_rx_old == 31'000'000);                       // baseline untouched
    }
}

TEST_CASE("skew estimate reaches the true ratio within quantization of one period") {
    const HardwareClock tx{-40.0, 123'456.0};
    const HardwareClock rx{+40.0, 9'876'543.0};
    const double period_us = 30e6;
    NeighborRecord rec;
    estimate_skew(rec, rx.read(0.0 + 3.33), tx.read(0.0));
    const double est = estimate_skew(rec, rx.read(period_us + 3.33), tx.read(period_us));
    const double truth = (1.0 - 40e-6) / (1.0 + 40e-6);
    CHECK(std::abs(est - truth) <= 2.1 / period_us);
}

TEST_CASE("offset estimation subtracts the fixed delay compensation") {
    CHECK_THAT(estimate_offset(1'000'103, 1'000'000, 3.33),
               Catch::Matchers::WithinAbs(99.67, 1e-9));
    CHECK(estimate_offset(1'000'003, 1'000'000, 3.0) == 0.0);
}

TEST_CASE("offset residual is centered on zero over quantized stamps") {
    // both stamps floor independently, so the quantization bias cancels
    std::mt19937_64 rng{99};
    std::normal_distribution<double> delay(3.33, 0.07);
    std::uniform_real_distribution<double> phase(0.0, 1.0);
    double sum = 0.0;
    const int packets = 10'000;
    for (int i = 0; i < packets; ++i) {
        const double tx_real = 1e6 * i + phase(rng);
        const double d = delay(rng);
        const auto tx = static_cast<std::int64_t>(std::floor(tx_real));
        const auto rx = static_cast<std::int64_t>(std::floor(tx_real + d));
        sum += estimate_offset(rx, tx, 3.33); // true offset is zero
    }
    CHECK(std::abs(sum / packets) <= 0.02);
}

TEST_CASE("rate multiplier update is the stated convex combination") {
    CHECK(update_rate_multiplier(1.0, 1.0, 1.0, 0.5) == 1.0);
    CHECK_THAT(update_rate_multiplier(1.0, 1.00004, 1.0, 0.5),
               Catch::Matchers::WithinAbs(1.00002, 1e-12));
    CHECK_THAT(update_rate_multiplier(1.0001, 1.0, 0.9999, 0.5),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(update_rate_multiplier(0.0, 1.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(update_rate_multiplier(1.0, -1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("receiving from a synchronized twin is a fixed point") {
    NodeState node = test_node(0, 2, 3.0);
    SyncMessage msg;
    msg.hw_ts_us = 1'000'000;
    msg.logical_ts_us = 1'000'000;
    msg.phi = 1.0;
    msg.hop_count = 0;
    msg.sender_id = 1;
    msg.origin_id = 1;

    // delivery exactly d_fixed later on an identical clock
    const ReceiveResult result = on_receive(node, msg, 1'000'003, 1'000'003);
    CHECK(result.accepted);
    CHECK(result.offset_estimate_us == 0.0);
    CHECK(node.logical.phi == 1.0);
    CHECK(node.logical.read(1'000'003) == 1'000'003);
    CHECK(node.neighbors.at(1).rate_estimate == 1.0);
    CHECK(node.neighbors.at(1).last_local_error_us == 0.0);
}

TEST_CASE("correction moves the receiver halfway toward the transmitter") {
    NodeState node = test_node(0, 1, 0.0);
    SyncMessage msg;
    msg.logical_ts_us = 1'000'000; // transmitter is 100 us behind the receiver
    msg.hw_ts_us = 2'000'000;
    msg.phi = 1.0;
    msg.sender_id = 1;
    msg.origin_id = 1;

    node.logical.apply_update(0, 1.0, 100.0); // receiver reads hw + 100
    const std::int64_t rx_reading = node.logical.read(1'000'000);
    REQUIRE(rx_reading == 1'000'100);

    const ReceiveResult result = on_receive(node, msg, 1'000'000, rx_reading);
    CHECK_THAT(result.offset_estimate_us, Catch::Matchers::WithinAbs(100.0, 1e-12));
    CHECK(node.logical.read(1'000'000) == 1'000'050);
}

TEST_CASE("hop bound and duplicate waves gate forwarding") {
    SyncMessage msg;
    msg.hw_ts_us = 1'000'000;
    msg.logical_ts_us = 1'000'000;
    msg.phi = 1.0;
    msg.sender_id = 1;
    msg.origin_id = 7;
    msg.wave = 4;

    SECTION("single-hop operation never forwards") {
        NodeState node = test_node(0, 1);
        msg.hop_count = 0;
        CHECK_FALSE(on_receive(node, msg, 1'000'003, 1'000'003).forward);
    }
    SECTION("two-hop operation forwards fresh hop-0 packets once") {
        NodeState node = test_node(0, 2);
        msg.hop_count = 0;
        const ReceiveResult first = on_receive(node, msg, 1'000'003, 1'000'003);
        CHECK(first.forward);
        CHECK(first.forward_hop == 1);

        // a multi-path copy of the same wave from another neighbor
        SyncMessage copy = msg;
        copy.sender_id = 2;
        const ReceiveResult second = on_receive(node, copy, 1'000'403, 1'000'403);
        CHECK(second.accepted);
        CHECK_FALSE(second.forward);

        SyncMessage spent = msg;
        spent.hop_count = 1;
        spent.wave = 5;
        CHECK_FALSE(on_receive(node, spent, 2'000'003, 2'000'003).forward);
    }
    SECTION("a node never forwards its own wave back out") {
        NodeState node = test_node(7, 3);
        msg.hop_count = 1;
        CHECK_FALSE(on_receive(node, msg, 1'000'003, 1'000'003).forward);
    }
    SECTION("hop counts past the configured maximum are dropped and counted") {
        NodeState node = test_node(0, 2);
        msg.hop_count = 3;
        const ReceiveResult result = on_receive(node, msg, 1'000'003, 1'000'003);
        CHECK_FALSE(result.accepted);
        CHECK(node.dropped_malformed == 1);
        CHECK(node.neighbors.empty());
    }
}

TEST_CASE("unknown transmitters get a fresh record") {
    NodeState node = test_node(0, 2);
    SyncMessage msg;
    msg.hw_ts_us = 500;
    msg.logical_ts_us = 500;
    msg.phi = 1.0;
    msg.hop_count = 0;
    msg.sender_id = 9;
    msg.origin_id = 9;
    on_receive(node, msg, 503, 503);
    REQUIRE(node.neighbors.count(9) == 1);
    CHECK(node.neighbors.at(9).has_pair);
    CHECK(node.neighbors.at(9).rate_estimate == 1.0);
}

TEST_CASE("controller walks the hop depth against the local error threshold") {
    NodeState node = test_node(0, 2);
    const std::int64_t now = 100'000'000;
    auto put_error = [&](int id, double err) {
        NeighborRecord rec;
        rec.has_error = true;
        rec.last_local_error_us = err;
        rec.last_heard_hw_us = now - 1'000'000;
        node.neighbors[id] = rec;
    };

    SECTION("all local errors under the threshold step the depth down") {
        put_error(1, 1.2);
        put_error(2, 3.0);
        put_error(3, 4.9);
        REQUIRE(node.h_current == 2);
        CHECK(controller_step(node, now));
        CHECK(node.h_current == 1);
        CHECK_FALSE(controller_step(node, now)); // clamped at 1
        CHECK(node.h_current == 1);
    }
    SECTION("any local error at or above the threshold steps the depth up") {
        node.h_current = 1;
        put_error(1, 1.0);
        put_error(2, 12.0);
        CHECK(controller_step(node, now));
        CHECK(node.h_current == 2);
        CHECK_FALSE(controller_step(node, now)); // clamped at h_initial
    }
    SECTION("stale transmitters are excluded") {
        node.h_current = 2;
        put_error(1, 1.0);
        node.neighbors[2] = NeighborRecord{};
        node.neighbors[2].has_error = true;
        node.neighbors[2].last_local_error_us = 50.0;
        node.neighbors[2].last_heard_hw_us = now - 70'000'000; // older than 2 periods
        CHECK(controller_step(node, now));
        CHECK(node.h_current == 1);
    }
    SECTION("no fresh data counts as not converged") {
        node.h_current = 1;
        CHECK(controller_step(node, now));
        CHECK(node.h_current == 2);
    }
}

TEST_CASE("by-hop error accumulation") {
    CHECK(by_hop_error_bound(1, {0.0}, {0.0}, 500.0) == 0.0);
    CHECK_THAT(by_hop_error_bound(3, {0.07, 0.07, 0.07}, {0.0, 0.0, 0.0}, 500.0),
               Catch::Matchers::WithinAbs(0.21, 1e-12));
    CHECK_THAT(by_hop_error_bound(2, {0.0, 0.0}, {40.0, 40.0}, 1000.0),
               Catch::Matchers::WithinAbs(0.08, 1e-12));
    CHECK_THROWS_AS(by_hop_error_bound(2, {0.0}, {0.0, 0.0}, 500.0), std::invalid_argument);
}
