#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sepchain/bucket.hpp"
#include "sepchain/errors.hpp"
#include "sepchain/transform.hpp"

#include <cstring>
#include <random>
#include <vector>

using namespace sepchain;

namespace {

std::span<const std::byte> as_bytes(const std::vector<std::uint8_t>& v) { return std::as_bytes(std::span(v)); }

std::vector<std::byte> packed(const std::vector<std::uint64_t>& slots, unsigned width) {
    std::vector<std::uint8_t> raw;
    for (std::size_t i = 0; i < slots.size(); ++i) oracle::bit_write(raw, i, width, slots[i]);
    raw.resize(quotient_bytes(slots.size(), width));
    std::vector<std::byte> out(raw.size());
    if (!raw.empty()) std::memcpy(out.data(), raw.data(), raw.size());
    return out;
}

constexpr BucketVariant kVariants[] = {BucketVariant::cht, BucketVariant::vec, BucketVariant::single,
                                       BucketVariant::plain};

} // namespace

TEST_CASE("variant and policy names") {
    for (auto v : kVariants) CHECK(parse_variant(to_string(v)) == v);
    CHECK(parse_policy("inc") == GrowthPolicy::incremental);
    CHECK(parse_policy("half") == GrowthPolicy::half_increase);
    CHECK_THROWS_AS(parse_variant("avx"), ConfigError);
    CHECK_THROWS_AS(parse_policy("double"), ConfigError);
}

TEST_CASE("storage widths") {
    CHECK(storage_width(BucketVariant::cht, 12, 32) == 12);
    CHECK(storage_width(BucketVariant::single, 7, 32) == 7);
    CHECK(storage_width(BucketVariant::vec, 8, 32) == 8);
    CHECK(storage_width(BucketVariant::vec, 9, 32) == 16);
    CHECK(storage_width(BucketVariant::vec, 3, 32) == 8);
    CHECK(storage_width(BucketVariant::vec, 33, 64) == 64);
    CHECK(storage_width(BucketVariant::vec, 0, 32) == 0);
    CHECK(storage_width(BucketVariant::plain, 12, 32) == 32);
}

TEST_CASE("quotient codec examples") {
    std::vector<std::byte> storage(3);
    quotient_set(storage, 0, 12, 0xABC);
    quotient_set(storage, 1, 12, 0x123);
    CHECK(std::to_integer<int>(storage[0]) == 0xBC);
    CHECK(std::to_integer<int>(storage[1]) == 0x3A);
    CHECK(std::to_integer<int>(storage[2]) == 0x12);
    CHECK(storage == packed({0xABC, 0x123}, 12));
    CHECK(quotient_get(storage, 0, 12) == 0xABC);
    CHECK(quotient_get(storage, 1, 12) == 0x123);

    const std::vector<std::uint8_t> bytes{5, 200, 17};
    for (std::size_t i = 0; i < bytes.size(); ++i) CHECK(quotient_get(as_bytes(bytes), i, 8) == bytes[i]);

    CHECK_THROWS_AS(quotient_set(storage, 0, 12, 0x1000), DomainError);
}

TEST_CASE("quotient codec matches a shadow array") {
    std::mt19937_64 rng(21);
    for (unsigned width = 0; width <= 64; ++width) {
        const std::size_t slots = 1 + rng() % 70;
        std::vector<std::byte> storage(quotient_bytes(slots, width));
        std::vector<std::uint64_t> shadow(slots, 0);
        for (int step = 0; step < 2000; ++step) {
            const std::size_t i = rng() % slots;
            const std::uint64_t v = rng() & low_mask(width);
            quotient_set(storage, i, width, v);
            shadow[i] = v;
            const std::size_t probe = rng() % slots;
            REQUIRE(quotient_get(storage, probe, width) == shadow[probe]);
        }
        REQUIRE(storage == packed(shadow, width));
    }
}

TEST_CASE("scan examples") {
    const std::vector<std::uint8_t> q{3, 7, 3, 9};
    CHECK(scan_scalar(as_bytes(q), 4, 3, 8) == 0);
    CHECK(scan_packed(as_bytes(q), 4, 3, 8) == 0);
    CHECK(scan_vector(as_bytes(q), 4, 3, 8) == 0);
    CHECK(scan_scalar(as_bytes(q), 4, 9, 8) == 3);
    CHECK_FALSE(scan_scalar(as_bytes(q), 4, 4, 8).has_value());
    CHECK_FALSE(scan_scalar({}, 0, 3, 8).has_value());
    CHECK_FALSE(scan_packed({}, 0, 3, 12).has_value());
    CHECK_FALSE(scan_vector({}, 0, 3, 16).has_value());
    // slots beyond size must be ignored
    CHECK_FALSE(scan_packed(as_bytes(q), 1, 7, 8).has_value());
    CHECK_FALSE(scan_vector(as_bytes(q), 3, 9, 8).has_value());
    CHECK_THROWS_AS(scan_packed(as_bytes(q), 1, 0, 33), ConfigError);
    CHECK_THROWS_AS(scan_vector(as_bytes(q), 1, 0, 12), ConfigError);
}

TEST_CASE("scan_packed agrees with a naive scan at width 12") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<std::uint64_t> slots(40);
        for (auto& s : slots) s = rng() % 64; // small range forces repeats
        const auto storage = packed(slots, 12);
        const std::uint64_t target = rng() % 80;
        REQUIRE(scan_packed(storage, slots.size(), target, 12) == oracle::naive_find(slots, slots.size(), target));
    }
}

TEST_CASE("all scans agree for every width") {
    std::mt19937_64 rng(123);
    std::vector<VectorBackend> backends;
    for (auto b : {VectorBackend::scalar, VectorBackend::sse2, VectorBackend::avx2}) {
        if (vector_backend_supported(b)) backends.push_back(b);
    }
    MESSAGE("active vector backend: " << to_string(active_vector_backend()));
    for (unsigned width = 1; width <= 64; ++width) {
        for (int trial = 0; trial < 1500; ++trial) {
            const std::size_t size = rng() % 256;
            // every other trial draws from 16 values so that duplicates are common
            const auto draw = [&] { return (trial % 2 == 0 ? rng() % 16 : rng()) & low_mask(width); };
            std::vector<std::uint64_t> slots(size);
            for (auto& s : slots) s = draw();
            const std::uint64_t target = size > 0 && rng() % 2 == 0 ? slots[rng() % size] : draw();
            const auto storage = packed(slots, width);
            const auto expected = oracle::naive_find(slots, size, target);
            REQUIRE(scan_scalar(storage, size, target, width) == expected);
            if (width <= 32) REQUIRE(scan_packed(storage, size, target, width) == expected);
            if (width == 8 || width == 16 || width == 32 || width == 64) {
                for (auto b : backends) REQUIRE(scan_vector(b, storage, size, target, width) == expected);
            }
        }
    }
}

TEST_CASE("grow_capacity") {
    CHECK(grow_capacity(4, 5, GrowthPolicy::half_increase) == 6);
    CHECK(grow_capacity(1, 2, GrowthPolicy::half_increase) == 2);
    CHECK(grow_capacity(254, 255, GrowthPolicy::half_increase) == 255);
    CHECK(grow_capacity(7, 8, GrowthPolicy::incremental) == 8);
    CHECK(grow_capacity(0, 1, GrowthPolicy::half_increase) == 1);
    CHECK_FALSE(grow_capacity(255, 256, GrowthPolicy::incremental).has_value());
    for (std::size_t c = 0; c < 255; ++c) {
        const auto next = grow_capacity(c, c + 1, GrowthPolicy::half_increase);
        REQUIRE(next.has_value());
        REQUIRE(*next <= kMaxBucketSize);
        REQUIRE(*next >= c + 1);
    }
}

TEST_CASE("insert and swap-remove") {
    for (auto variant : kVariants) {
        AllocLedger ledger;
        const BucketShape shape{variant, GrowthPolicy::incremental, storage_width(variant, 12, 32), 4};
        BucketGroup group;
        CHECK(bucket_insert(group, shape, ledger, 10, 100));
        CHECK(bucket_insert(group, shape, ledger, 11, 101));
        CHECK(bucket_insert(group, shape, ledger, 12, 102));
        bucket_remove(group, shape, 0);
        CHECK(group.size == 2);
        CHECK(bucket_quotient(group, shape, 0) == 12);
        CHECK(bucket_value(group, shape, 0) == 102);
        CHECK(bucket_quotient(group, shape, 1) == 11);
        CHECK(group.capacity == 3);
        CHECK(bucket_find(group, shape, 11) == 1);
        CHECK_FALSE(bucket_find(group, shape, 10).has_value());
        bucket_release(group, shape, ledger);
        CHECK(ledger.current() == 0);
    }
}

TEST_CASE("a full bucket refuses the next insert") {
    for (auto variant : kVariants) {
        for (auto policy : {GrowthPolicy::incremental, GrowthPolicy::half_increase}) {
            AllocLedger ledger;
            const BucketShape shape{variant, policy, storage_width(variant, 16, 32), 2};
            BucketGroup group;
            for (std::uint64_t i = 0; i < 255; ++i) {
                REQUIRE(bucket_insert(group, shape, ledger, i, i));
                if (policy == GrowthPolicy::incremental) REQUIRE(group.capacity == group.size);
                REQUIRE(group.capacity <= kMaxBucketSize);
                REQUIRE(ledger.current() == bucket_allocated_bytes(group, shape));
            }
            const std::size_t before = ledger.current();
            CHECK_FALSE(bucket_insert(group, shape, ledger, 999, 1));
            CHECK(group.size == 255);
            CHECK(ledger.current() == before);
            for (std::uint64_t i = 0; i < 255; ++i) REQUIRE(bucket_find(group, shape, i) == i);
            bucket_release(group, shape, ledger);
        }
    }
}

TEST_CASE("full bucket of 8-byte values holds 2040 value bytes") {
    AllocLedger ledger;
    const BucketShape shape{BucketVariant::cht, GrowthPolicy::incremental, 0, 8};
    BucketGroup group;
    for (int i = 0; i < 255; ++i) REQUIRE(bucket_insert(group, shape, ledger, 0, i));
    CHECK(ledger.current() == 2040);
    bucket_release(group, shape, ledger);
}

TEST_CASE("single variant keeps quotients before values in one block") {
    AllocLedger ledger;
    const BucketShape shape{BucketVariant::single, GrowthPolicy::half_increase, 12, 4};
    BucketGroup group;
    std::mt19937_64 rng(8);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> shadow;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t q = rng() & 0xfff;
        const std::uint64_t v = rng() & 0xffffffff;
        REQUIRE(bucket_insert(group, shape, ledger, q, v));
        shadow.emplace_back(q, v);
        REQUIRE(group.values == nullptr);
        REQUIRE(ledger.current() == quotient_bytes(group.capacity, 12) + 4 * group.capacity);
        const std::byte* values = group.quotients + quotient_bytes(group.capacity, 12);
        for (std::size_t j = 0; j < shadow.size(); ++j) {
            REQUIRE(quotient_get({group.quotients, quotient_bytes(group.capacity, 12)}, j, 12) == shadow[j].first);
            std::uint32_t stored;
            std::memcpy(&stored, values + 4 * j, 4);
            REQUIRE(stored == shadow[j].second);
        }
    }
    bucket_release(group, shape, ledger);
}

TEST_CASE("vec storage is aligned and counted at its aligned size") {
    AllocLedger ledger;
    const BucketShape shape{BucketVariant::vec, GrowthPolicy::incremental, 16, 0};
    BucketGroup group;
    for (int i = 0; i < 40; ++i) {
        REQUIRE(bucket_insert(group, shape, ledger, i, 0));
        REQUIRE(reinterpret_cast<std::uintptr_t>(group.quotients) % kVecAlignment == 0);
        REQUIRE(ledger.current() == tracked::aligned_size(2 * group.capacity, kVecAlignment));
    }
    bucket_release(group, shape, ledger);
    CHECK(ledger.current() == 0);
}

TEST_CASE("rewriting values preserves them") {
    for (auto variant : kVariants) {
        AllocLedger ledger;
        const BucketShape narrow{variant, GrowthPolicy::incremental, storage_width(variant, 10, 32), 1};
        BucketGroup group;
        for (int i = 0; i < 200; ++i) REQUIRE(bucket_insert(group, narrow, ledger, i, i % 256));
        bucket_rewrite_values(group, narrow, ledger, 3);
        BucketShape wide = narrow;
        wide.value_bytes = 3;
        for (int i = 0; i < 200; ++i) REQUIRE(bucket_value(group, wide, i) == static_cast<std::uint64_t>(i % 256));
        bucket_set_value(group, wide, 5, 0xabcdef);
        CHECK(bucket_value(group, wide, 5) == 0xabcdef);
        CHECK(ledger.current() == bucket_allocated_bytes(group, wide));
        bucket_release(group, wide, ledger);
        CHECK(ledger.current() == 0);
    }
}

TEST_CASE("reserve allocates the exact capacity") {
    AllocLedger ledger;
    const BucketShape shape{BucketVariant::cht, GrowthPolicy::half_increase, 12, 4};
    BucketGroup group;
    bucket_reserve(group, shape, ledger, 37);
    CHECK(group.capacity == 37);
    CHECK(ledger.current() == quotient_bytes(37, 12) + 37 * 4);
    CHECK_THROWS_AS(bucket_reserve(group, shape, ledger, 256), CapacityError);
    bucket_release(group, shape, ledger);
}
