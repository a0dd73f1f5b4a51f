#include "sepchain/kmer.hpp"

#include "sepchain/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace sepchain {

namespace {

unsigned key_bits_for(unsigned bytes) { return 8 * bytes <= 32 ? 32 : 64; }

TableConfig table_config(unsigned key_bits, unsigned value_bytes, const TableOptions& options) {
    TableConfig config;
    config.key_bits = key_bits;
    config.variant = options.variant;
    config.policy = options.policy;
    config.value_bytes = value_bytes;
    config.ledger = options.ledger;
    return config;
}

double x_lg_x(std::uint64_t x) {
    const double v = static_cast<double>(x);
    return v * std::log2(v);
}

double sum_x_lg_x(const std::map<std::uint64_t, std::uint64_t>& histogram) {
    double sum = 0;
    for (const auto& [value, multiplicity] : histogram) sum += static_cast<double>(multiplicity) * x_lg_x(value);
    return sum;
}

} // namespace

KmerCounter::KmerCounter(unsigned order, TableOptions options)
    : m_order(order), m_table(table_config(key_bits_for(order), 1, options)) {
    if (order > kMaxOrder) throw ConfigError("k-mer order " + std::to_string(order) + " exceeds " + std::to_string(kMaxOrder));
    // the empty window before the first byte
    if (order == 0) add(0, 1);
}

void KmerCounter::promote_counter_width() {
    const unsigned width = counter_width();
    if (width >= kMaxCounterBytes) {
        throw CapacityError("k-mer counters would need more than " + std::to_string(kMaxCounterBytes) + " bytes");
    }
    m_table.set_value_bytes(width + 1);
}

void KmerCounter::add(std::uint64_t kmer, std::uint64_t count) {
    while (!m_table.add_to(kmer, count)) promote_counter_width();
    m_total += count;
}

void KmerCounter::feed(std::span<const std::uint8_t> bytes) {
    if (m_order == 0) {
        if (!bytes.empty()) add(0, bytes.size());
        m_bytes_seen += bytes.size();
        return;
    }
    const unsigned top = 8 * (m_order - 1);
    for (const std::uint8_t byte : bytes) {
        m_window = (m_order == 8 ? m_window >> 8 : (m_window >> 8) & low_mask(top)) | (std::uint64_t{byte} << top);
        if (++m_bytes_seen >= m_order) add(m_window);
    }
}

KmerCounter count_kmers(std::span<const std::uint8_t> stream, unsigned k, TableOptions options) {
    KmerCounter counter(k, std::move(options));
    counter.feed(stream);
    return counter;
}

double entropy_h0(std::span<const std::uint64_t> counts, std::uint64_t n) {
    if (n == 0) throw DomainError("entropy of an empty text is undefined");
    std::uint64_t sum = 0;
    double weighted = 0;
    for (const std::uint64_t c : counts) {
        sum += c;
        if (c != 0) weighted += static_cast<double>(c) * std::log2(static_cast<double>(n) / static_cast<double>(c));
    }
    if (sum != n) throw DomainError("counts add up to " + std::to_string(sum) + ", expected " + std::to_string(n));
    return weighted / static_cast<double>(n);
}

EntropyReport entropy_from_counter(const KmerCounter& windows, unsigned k, std::uint64_t n, TableOptions options) {
    if (windows.order() != k + 1) throw ConfigError("order-k entropy needs a counter of (k+1)-grams");
    if (n == 0) throw DomainError("entropy of an empty text is undefined");

    // n H_k = sum_S |T_S| lg |T_S| - sum_{S,c} n_Sc lg n_Sc, with |T_S| = sum_c n_Sc
    std::map<std::uint64_t, std::uint64_t> window_histogram;
    windows.for_each([&](std::uint64_t, std::uint64_t count) { ++window_histogram[count]; });

    std::map<std::uint64_t, std::uint64_t> context_histogram;
    std::uint64_t contexts = 0;
    if (k == 0) {
        context_histogram[windows.total()] = 1;
        contexts = 1;
    } else {
        CompactTable totals(table_config(key_bits_for(k), 8, options));
        const std::uint64_t context_mask = low_mask(8 * k);
        windows.for_each([&](std::uint64_t window, std::uint64_t count) { totals.add_to(window & context_mask, count); });
        totals.for_each([&](std::uint64_t, std::uint64_t total) { ++context_histogram[total]; });
        contexts = totals.size();
    }

    // the difference of two sums can round slightly below zero
    const double weighted = std::max(0.0, sum_x_lg_x(context_histogram) - sum_x_lg_x(window_histogram));
    return {weighted / static_cast<double>(n), windows.distinct(), contexts};
}

double entropy_hk(std::span<const std::uint8_t> stream, unsigned k, TableOptions options) {
    if (stream.size() <= k) {
        throw DomainError("order-" + std::to_string(k) + " entropy needs more than " + std::to_string(k) + " bytes");
    }
    const KmerCounter windows = count_kmers(stream, k + 1, options);
    return entropy_from_counter(windows, k, stream.size(), std::move(options)).bits_per_symbol;
}

} // namespace sepchain
