#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sepchain/bench.hpp"
#include "sepchain/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

using namespace sepchain;
using namespace sepchain::bench;

namespace {

BenchConfig quick(BenchOp op, std::uint64_t n) {
    BenchConfig config;
    config.op = op;
    config.n = n;
    config.repetitions = 1;
    config.warmup = 0;
    return config;
}

} // namespace

TEST_CASE("operation names") {
    for (auto op : {BenchOp::insert, BenchOp::query_hit, BenchOp::query_miss, BenchOp::erase, BenchOp::distinct,
                    BenchOp::reserved}) {
        CHECK(parse_op(to_string(op)) == op);
    }
    CHECK_THROWS_AS(parse_op("lookup"), ConfigError);
}

TEST_CASE("insert runs") {
    const auto one = run(quick(BenchOp::insert, 1));
    CHECK(one.element_count == 1);
    CHECK(one.bytes_per_element == doctest::Approx(static_cast<double>(one.bytes_allocated)));

    const auto a = run(quick(BenchOp::insert, 50000));
    const auto b = run(quick(BenchOp::insert, 50000));
    CHECK(a.element_count == b.element_count);
    CHECK(a.bucket_count == b.bucket_count);
    CHECK(a.bytes_allocated == b.bytes_allocated);
    CHECK(a.bytes_per_element == doctest::Approx(static_cast<double>(a.bytes_allocated) / 50000));
    CHECK(a.max_bucket_size <= kMaxBucketSize);
}

TEST_CASE("query and erase runs verify themselves") {
    CHECK(run(quick(BenchOp::query_hit, 20000)).found_count == 20000);
    CHECK(run(quick(BenchOp::query_miss, 20000)).found_count == 0);
    const auto erased = run(quick(BenchOp::erase, 20000));
    CHECK(erased.found_count == 256);
    const auto inserted = run(quick(BenchOp::insert, 20000));
    CHECK(erased.element_count == inserted.element_count - 256);
}

TEST_CASE("distinct run conserves counts") {
    for (auto v : {BucketVariant::cht, BucketVariant::vec, BucketVariant::single, BucketVariant::plain}) {
        auto config = quick(BenchOp::distinct, 40000);
        config.variant = v;
        const auto record = run(config);
        CHECK(record.counter_total == 40000);
        const auto stream = distinct_stream(40000, config.seed);
        CHECK(record.element_count == std::unordered_set<std::uint32_t>(stream.begin(), stream.end()).size());
    }
}

TEST_CASE("distinct stream has about a quarter distinct keys") {
    const auto stream = distinct_stream(1 << 16, 9);
    const std::set<std::uint32_t> keys(stream.begin(), stream.end());
    CHECK(keys.size() <= (1u << 14));
    CHECK(keys.size() > (1u << 14) * 9 / 10);
    CHECK(distinct_stream(1000, 9) == distinct_stream(1000, 9));
    CHECK(distinct_stream(1000, 9) != distinct_stream(1000, 10));
}

TEST_CASE("random pairs are reproducible and respect the value width") {
    CHECK(random_pairs(100, 5, 4).front().key == random_pairs(100, 5, 4).front().key);
    for (const auto& p : random_pairs(1000, 5, 1)) REQUIRE(p.value <= 0xff);
    for (const auto& p : random_pairs(1000, 5, 0)) REQUIRE(p.value == 0);
}

TEST_CASE("reserved runs") {
    auto config = quick(BenchOp::reserved, 30000);
    CHECK_THROWS_AS(run(config), ConfigError);
    config.reserve_buckets = 1 << 16;
    const auto record = run(config);
    CHECK(record.quotient_width == 16);
    CHECK(record.bucket_count == (1u << 16));
    CHECK(record.element_count == run(quick(BenchOp::insert, 30000)).element_count);
    config.reserve_buckets = 3000;
    CHECK_THROWS_AS(run(config), ConfigError);
}

TEST_CASE("reserving lowers the footprint of the vec variant") {
    auto without = quick(BenchOp::insert, 1 << 20);
    without.variant = BucketVariant::vec;
    auto with = without;
    with.op = BenchOp::reserved;
    with.reserve_buckets = 1 << 16;
    CHECK(run(with).bytes_per_element < run(without).bytes_per_element);
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(run(quick(BenchOp::insert, 0)), ConfigError);
    auto config = quick(BenchOp::distinct, 1000);
    config.value_bytes = 1;
    CHECK_THROWS_AS(run(config), ConfigError);
}

TEST_CASE("csv output") {
    CHECK(csv_header() ==
          "variant,policy,op,n,seed,seconds_total,ns_per_op,bytes_allocated,bytes_per_element,bucket_count,max_bucket_size");
    BenchRecord record;
    record.config = quick(BenchOp::query_miss, 1024);
    record.config.variant = BucketVariant::vec;
    record.config.policy = GrowthPolicy::half_increase;
    record.seconds_total = 0.5;
    record.ns_per_op = 12.25;
    record.bytes_allocated = 4096;
    record.bytes_per_element = 4.0;
    record.bucket_count = 8;
    record.max_bucket_size = 200;
    CHECK(csv_row(record) == "vec,half,query-miss,1024,1,0.500000,12.25,4096,4.0000,8,200");

    const auto path = std::filesystem::temp_directory_path() / "sepchain_bench_csv_test.csv";
    std::filesystem::remove(path);
    write_csv(path.string(), record);
    write_csv(path.string(), record);
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == std::string(csv_header()) + "\n" + csv_row(record) + "\n" + csv_row(record) + "\n");
    std::filesystem::remove(path);
}

TEST_CASE("space and collision model") {
    CHECK(predicted_space(0, 8, 1) == 18.0);
    CHECK(predicted_space(255 * 1024, 8, 1024) == 2107392.0);
    CHECK(predicted_space(1000, 2.5, 4) == 72.0 + 2500.0);
    double previous = 0;
    for (std::uint64_t n = 1; n < 100000; n += 997) {
        const double space = predicted_space(n, 8, uniform_bucket_bound(n));
        REQUIRE(space >= previous);
        previous = space;
    }
    CHECK(uniform_bucket_bound(255) == 2);
    CHECK(uniform_bucket_bound(1 << 20) == 16384); // ceil(2^21 / 255) = 8225

    CHECK(expected_collisions(0.5) == 2.5);
    CHECK(expected_collisions(0.0) == 1.0);
    CHECK(std::abs(expected_collisions(1.0 - 1.0 / std::sqrt(509.0)) - 255.0) < 1e-9);
    CHECK(collision_threshold() == doctest::Approx(0.9557).epsilon(1e-4));
    CHECK(std::abs(expected_collisions(collision_threshold()) - 255.0) < 1e-9);
    CHECK_THROWS_AS(expected_collisions(1.0), DomainError);
    CHECK_THROWS_AS(expected_collisions(-0.1), DomainError);
}
