#include "sepchain/bench.hpp"

#include "sepchain/errors.hpp"
#include "sepchain/table.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace sepchain::bench {

std::string_view to_string(BenchOp op) noexcept {
    switch (op) {
        case BenchOp::insert: return "insert";
        case BenchOp::query_hit: return "query-hit";
        case BenchOp::query_miss: return "query-miss";
        case BenchOp::erase: return "erase";
        case BenchOp::distinct: return "distinct";
        case BenchOp::reserved: return "reserved";
    }
    return "?";
}

BenchOp parse_op(std::string_view name) {
    for (auto op : {BenchOp::insert, BenchOp::query_hit, BenchOp::query_miss, BenchOp::erase, BenchOp::distinct,
                    BenchOp::reserved}) {
        if (to_string(op) == name) return op;
    }
    throw ConfigError("unknown benchmark operation '" + std::string(name) + "'");
}

namespace {

//! murmur3 fmix32, a bijection on 32-bit integers
constexpr std::uint32_t fmix32(std::uint32_t h) noexcept {
    h ^= h >> 16;
    h *= 0x85ebca6bU;
    h ^= h >> 13;
    h *= 0xc2b2ae35U;
    h ^= h >> 16;
    return h;
}

using Clock = std::chrono::steady_clock;

struct Measurement {
    double seconds = 0;
    std::uint64_t found = 0;
    std::uint64_t counter_total = 0;
    TableStats stats{};
    unsigned quotient_width = 0;
};

void validate(const BenchConfig& config) {
    if (config.n < 1) throw ConfigError("n must be at least 1");
    if (config.value_bytes > 8) throw ConfigError("values are at most 8 bytes wide");
    if (config.repetitions < 1) throw ConfigError("at least one timed repetition is required");
    if (config.reserve_buckets && !std::has_single_bit(*config.reserve_buckets)) {
        throw ConfigError("reserve must be a power of two");
    }
}

CompactTable make_table(const BenchConfig& config) {
    TableConfig table_config;
    table_config.key_bits = 32;
    table_config.variant = config.variant;
    table_config.policy = config.policy;
    table_config.value_bytes = config.value_bytes;
    CompactTable table(table_config);
    if (config.reserve_buckets) table.reserve(*config.reserve_buckets);
    return table;
}

void fill(CompactTable& table, const std::vector<KeyValue>& pairs) {
    for (const auto& [key, value] : pairs) table.insert(key, value);
}

std::size_t distinct_keys(const std::vector<KeyValue>& pairs) {
    std::unordered_set<std::uint32_t> keys;
    keys.reserve(pairs.size());
    for (const auto& pair : pairs) keys.insert(pair.key);
    return keys.size();
}

void require(bool condition, const BenchConfig& config, const std::string& what) {
    if (!condition) {
        throw CorrectnessError(std::string(to_string(config.op)) + " on " + std::string(to_string(config.variant)) + "/" +
                               std::string(to_string(config.policy)) + ": " + what);
    }
}

/// Runs warm-up and timed repetitions of `once` and reports the median time
/// together with the table state of the last repetition.
template <class Once>
BenchRecord repeat(const BenchConfig& config, std::uint64_t operations, Once&& once) {
    validate(config);
    std::vector<double> times;
    Measurement last;
    for (unsigned rep = 0; rep < config.warmup + config.repetitions; ++rep) {
        last = once();
        if (rep >= config.warmup) times.push_back(last.seconds);
    }
    std::sort(times.begin(), times.end());

    BenchRecord record;
    record.config = config;
    record.seconds_total = times[times.size() / 2];
    record.ns_per_op = operations == 0 ? 0.0 : record.seconds_total * 1e9 / static_cast<double>(operations);
    record.bytes_allocated = last.stats.allocated_bytes;
    record.bytes_per_element = static_cast<double>(last.stats.allocated_bytes) / static_cast<double>(config.n);
    record.bucket_count = last.stats.bucket_count;
    record.max_bucket_size = last.stats.max_bucket_size;
    record.element_count = last.stats.element_count;
    record.found_count = last.found;
    record.counter_total = last.counter_total;
    record.quotient_width = last.quotient_width;
    return record;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

BenchRecord timed_build(const BenchConfig& config) {
    const auto pairs = random_pairs(config.n, config.seed, config.value_bytes);
    const std::size_t expected = distinct_keys(pairs);
    return repeat(config, config.n, [&] {
        CompactTable table = make_table(config);
        Measurement m;
        const auto start = Clock::now();
        fill(table, pairs);
        m.seconds = seconds_since(start);
        require(table.size() == expected, config, "element count differs from the number of distinct keys");
        m.stats = table.stats();
        m.quotient_width = table.quotient_width();
        return m;
    });
}

} // namespace

std::vector<KeyValue> random_pairs(std::uint64_t n, std::uint64_t seed, unsigned value_bytes) {
    std::mt19937_64 rng(seed);
    const std::uint64_t value_mask = low_mask(8 * std::min(value_bytes, 4u));
    std::vector<KeyValue> pairs;
    pairs.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t draw = rng();
        pairs.push_back({static_cast<std::uint32_t>(draw >> 32), draw & value_mask});
    }
    return pairs;
}

std::vector<std::uint32_t> distinct_stream(std::uint64_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::uint64_t pool = std::max<std::uint64_t>(1, n / 4);
    const auto salt = static_cast<std::uint32_t>(mix64(seed));
    std::vector<std::uint32_t> stream;
    stream.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        stream.push_back(fmix32(static_cast<std::uint32_t>(rng() % pool) ^ salt));
    }
    return stream;
}

BenchRecord run_random_insert(const BenchConfig& config) { return timed_build(config); }

BenchRecord run_reserved(const BenchConfig& config) {
    if (!config.reserve_buckets) throw ConfigError("the reserved benchmark needs a bucket count to reserve");
    return timed_build(config);
}

BenchRecord run_query_hit(const BenchConfig& config) {
    const auto pairs = random_pairs(config.n, config.seed, config.value_bytes);
    std::unordered_map<std::uint32_t, std::uint64_t> reference;
    for (const auto& [key, value] : pairs) reference[key] = value;
    return repeat(config, config.n, [&] {
        CompactTable table = make_table(config);
        fill(table, pairs);
        Measurement m;
        std::uint64_t checksum = 0;
        const auto start = Clock::now();
        for (const auto& pair : pairs) {
            if (const auto value = table.get(pair.key)) {
                ++m.found;
                checksum += *value;
            }
        }
        m.seconds = seconds_since(start);
        require(m.found == pairs.size(), config, "an inserted key was not found");
        std::uint64_t expected = 0;
        for (const auto& pair : pairs) expected += reference[pair.key];
        require(checksum == expected, config, "a query returned a wrong value");
        m.stats = table.stats();
        m.quotient_width = table.quotient_width();
        return m;
    });
}

BenchRecord run_query_miss(const BenchConfig& config) {
    const auto pairs = random_pairs(config.n, config.seed, config.value_bytes);
    std::unordered_set<std::uint32_t> present;
    for (const auto& pair : pairs) present.insert(pair.key);
    std::vector<std::uint32_t> absent;
    std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
    while (absent.size() < kProbeCount) {
        const auto key = static_cast<std::uint32_t>(rng() >> 32);
        if (!present.contains(key)) absent.push_back(key);
    }
    return repeat(config, absent.size(), [&] {
        CompactTable table = make_table(config);
        fill(table, pairs);
        Measurement m;
        const auto start = Clock::now();
        for (const auto key : absent) {
            if (table.contains(key)) ++m.found;
        }
        m.seconds = seconds_since(start);
        require(m.found == 0, config, "a key that was never inserted was found");
        m.stats = table.stats();
        m.quotient_width = table.quotient_width();
        return m;
    });
}

BenchRecord run_erase(const BenchConfig& config) {
    const auto pairs = random_pairs(config.n, config.seed, config.value_bytes);
    const std::size_t distinct = distinct_keys(pairs);
    std::vector<std::uint32_t> victims;
    {
        std::unordered_set<std::uint32_t> chosen;
        std::mt19937_64 rng(config.seed ^ 0xe7037ed1a0b428dbULL);
        const std::size_t wanted = std::min(kProbeCount, distinct);
        while (victims.size() < wanted) {
            const auto key = pairs[rng() % pairs.size()].key;
            if (chosen.insert(key).second) victims.push_back(key);
        }
    }
    return repeat(config, victims.size(), [&] {
        CompactTable table = make_table(config);
        fill(table, pairs);
        const std::uint64_t before = table.size();
        Measurement m;
        const auto start = Clock::now();
        for (const auto key : victims) {
            if (table.erase(key)) ++m.found;
        }
        m.seconds = seconds_since(start);
        require(m.found == victims.size(), config, "erasing a present key reported absence");
        require(table.size() == before - victims.size(), config, "element count did not drop by the erased keys");
        for (const auto key : victims) require(!table.contains(key), config, "an erased key is still present");
        m.stats = table.stats();
        m.quotient_width = table.quotient_width();
        return m;
    });
}

BenchRecord run_distinct(const BenchConfig& config) {
    if (config.value_bytes < 4 && config.n > low_mask(8 * config.value_bytes)) {
        throw ConfigError("counters of " + std::to_string(config.value_bytes) + " bytes may overflow for n=" +
                          std::to_string(config.n));
    }
    const auto stream = distinct_stream(config.n, config.seed);
    const std::size_t expected = std::unordered_set<std::uint32_t>(stream.begin(), stream.end()).size();
    return repeat(config, config.n, [&] {
        CompactTable table = make_table(config);
        Measurement m;
        const auto start = Clock::now();
        for (const auto key : stream) {
            if (!table.add_to(key, 1)) throw CorrectnessError("counter overflow in distinct run");
        }
        m.seconds = seconds_since(start);
        table.for_each([&](std::uint64_t, std::uint64_t count) { m.counter_total += count; });
        require(m.counter_total == config.n, config, "counters do not add up to n");
        require(table.size() == expected, config, "distinct key count differs from a set-based dedup");
        m.stats = table.stats();
        m.quotient_width = table.quotient_width();
        return m;
    });
}

BenchRecord run(const BenchConfig& config) {
    switch (config.op) {
        case BenchOp::insert: return run_random_insert(config);
        case BenchOp::query_hit: return run_query_hit(config);
        case BenchOp::query_miss: return run_query_miss(config);
        case BenchOp::erase: return run_erase(config);
        case BenchOp::distinct: return run_distinct(config);
        case BenchOp::reserved: return run_reserved(config);
    }
    throw ConfigError("unknown benchmark operation");
}

std::string_view csv_header() noexcept {
    return "variant,policy,op,n,seed,seconds_total,ns_per_op,bytes_allocated,bytes_per_element,bucket_count,max_bucket_size";
}

std::string csv_row(const BenchRecord& record) {
    const auto& c = record.config;
    char numbers[128];
    std::snprintf(numbers, sizeof(numbers), "%.6f,%.2f,%llu,%.4f", record.seconds_total, record.ns_per_op,
                  static_cast<unsigned long long>(record.bytes_allocated), record.bytes_per_element);
    std::ostringstream row;
    row << to_string(c.variant) << ',' << to_string(c.policy) << ',' << to_string(c.op) << ',' << c.n << ',' << c.seed
        << ',' << numbers << ',' << record.bucket_count << ',' << record.max_bucket_size;
    return row.str();
}

void write_csv(const std::string& path, const BenchRecord& record) {
    if (path == "-") {
        std::cout << csv_header() << '\n' << csv_row(record) << '\n';
        return;
    }
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    if (fresh) out << csv_header() << '\n';
    out << csv_row(record) << '\n';
    if (!out) throw std::runtime_error("failed writing to '" + path + "'");
}

double predicted_space(std::uint64_t n, double bytes_per_element, std::uint64_t bucket_count) noexcept {
    return 18.0 * static_cast<double>(bucket_count) + static_cast<double>(n) * bytes_per_element;
}

double expected_collisions(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("load factor must lie in [0, 1)");
    const double inverse = 1.0 / (1.0 - alpha);
    return 0.5 * (1.0 + inverse * inverse);
}

double collision_threshold(std::size_t bmax) noexcept {
    return 1.0 - 1.0 / std::sqrt(2.0 * static_cast<double>(bmax) - 1.0);
}

std::uint64_t uniform_bucket_bound(std::uint64_t n, std::size_t bmax) noexcept {
    const std::uint64_t buckets = (2 * n + bmax - 1) / bmax;
    return std::bit_ceil(std::max<std::uint64_t>(1, buckets));
}

} // namespace sepchain::bench
