#pragma once

#include "sepchain/bucket.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sepchain::bench {

enum class BenchOp { insert, query_hit, query_miss, erase, distinct, reserved };

std::string_view to_string(BenchOp op) noexcept;
//! accepts insert|query-hit|query-miss|erase|distinct|reserved
BenchOp parse_op(std::string_view name);

//! number of absent keys probed by query_miss and of present keys removed by erase
inline constexpr std::size_t kProbeCount = 256;

struct BenchConfig {
    BenchOp op = BenchOp::insert;
    BucketVariant variant = BucketVariant::cht;
    GrowthPolicy policy = GrowthPolicy::incremental;
    std::uint64_t n = 1 << 16;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> reserve_buckets;
    unsigned value_bytes = 4;
    std::string output_path;
    unsigned repetitions = 3; //! timed runs; the median is reported
    unsigned warmup = 1;      //! untimed runs before the timed ones
};

struct BenchRecord {
    BenchConfig config;
    double seconds_total = 0;
    double ns_per_op = 0;
    std::uint64_t bytes_allocated = 0;
    double bytes_per_element = 0; //! bytes_allocated / n
    std::uint64_t bucket_count = 0;
    std::uint64_t max_bucket_size = 0;
    std::uint64_t element_count = 0;
    std::uint64_t found_count = 0; //! hits of query runs, removed keys of erase runs
    std::uint64_t counter_total = 0; //! sum of all counters of a distinct run
    unsigned quotient_width = 0;
};

/// The workload generator: std::mt19937_64 seeded with the config seed,
/// 32-bit keys taken from the upper and 32-bit values from the lower half of
/// each draw, values truncated to value_bytes.
struct KeyValue {
    std::uint32_t key;
    std::uint64_t value;
};
std::vector<KeyValue> random_pairs(std::uint64_t n, std::uint64_t seed, unsigned value_bytes);

/// Multiset of n 32-bit keys drawn uniformly from n/4 distinct keys, so that
/// roughly a quarter of the stream is distinct.
std::vector<std::uint32_t> distinct_stream(std::uint64_t n, std::uint64_t seed);

BenchRecord run_random_insert(const BenchConfig& config);
BenchRecord run_query_hit(const BenchConfig& config);
BenchRecord run_query_miss(const BenchConfig& config);
BenchRecord run_erase(const BenchConfig& config);
BenchRecord run_distinct(const BenchConfig& config);
BenchRecord run_reserved(const BenchConfig& config);
//! dispatches on config.op; throws CorrectnessError on a wrong answer
BenchRecord run(const BenchConfig& config);

//! `variant,policy,op,n,seed,seconds_total,ns_per_op,bytes_allocated,bytes_per_element,bucket_count,max_bucket_size`
std::string_view csv_header() noexcept;
std::string csv_row(const BenchRecord& record);
//! appends a row, writing the header first if the file is new or empty; "-" writes to stdout
void write_csv(const std::string& path, const BenchRecord& record);

// --- closed-form space and collision model -----------------------------------------

//! 18|H| + n*m: headers of 18 bytes per bucket plus m bytes per element
double predicted_space(std::uint64_t n, double bytes_per_element, std::uint64_t bucket_count) noexcept;

//! average collisions of a linear-probing insertion at load factor alpha: (1 + (1/(1-alpha))^2) / 2
double expected_collisions(double alpha);

//! largest load factor at which expected_collisions stays below bmax: 1 - 1/sqrt(2 bmax - 1)
double collision_threshold(std::size_t bmax = kMaxBucketSize) noexcept;

//! smallest power of two that is at least ceil(2n / bmax)
std::uint64_t uniform_bucket_bound(std::uint64_t n, std::size_t bmax = kMaxBucketSize) noexcept;

} // namespace sepchain::bench
