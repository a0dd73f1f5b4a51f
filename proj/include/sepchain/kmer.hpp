#pragma once

#include "sepchain/table.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace sepchain {

/**
 * Frequencies of all length-`order` windows of a byte stream.
 *
 * A window w[0..order) is packed little-endian into the key
 * w[0] + 256 w[1] + ... . Counters start one byte wide; when an increment
 * would overflow, every counter is rewritten one byte wider, up to
 * kMaxCounterBytes. Bytes can be fed in arbitrary chunks.
 */
class KmerCounter {
   public:
    //! orders up to 8 so that order-7 entropy can count its 8-byte windows
    static constexpr unsigned kMaxOrder = 8;
    static constexpr unsigned kMaxCounterBytes = 3;

    explicit KmerCounter(unsigned order, TableOptions options = {});

    void feed(std::span<const std::uint8_t> bytes);
    //! adds `count` occurrences of `kmer`, widening counters as needed
    void add(std::uint64_t kmer, std::uint64_t count = 1);
    //! rewrites every counter one byte wider; CapacityError beyond kMaxCounterBytes
    void promote_counter_width();

    std::uint64_t count(std::uint64_t kmer) const { return m_table.get(kmer).value_or(0); }
    //! occurrences counted so far: n - order + 1 after feeding n >= order bytes
    std::uint64_t total() const noexcept { return m_total; }
    std::uint64_t distinct() const noexcept { return m_table.size(); }
    std::uint64_t bytes_seen() const noexcept { return m_bytes_seen; }
    unsigned counter_width() const noexcept { return m_table.value_bytes(); }
    unsigned order() const noexcept { return m_order; }
    //! true while fewer than `order` bytes were fed, i.e. no window was counted
    bool short_input() const noexcept { return m_bytes_seen < m_order; }

    template <class Fn>
    void for_each(Fn&& fn) const {
        m_table.for_each(fn);
    }
    const CompactTable& table() const noexcept { return m_table; }

   private:
    unsigned m_order;
    CompactTable m_table;
    std::uint64_t m_window = 0;
    std::uint64_t m_total = 0;
    std::uint64_t m_bytes_seen = 0;
};

//! counts every length-k window of `stream`; an input shorter than k yields an empty counter
KmerCounter count_kmers(std::span<const std::uint8_t> stream, unsigned k, TableOptions options = {});

//! (1/n) sum_j n_j lg(n / n_j); DomainError if n = 0 or the counts do not add up to n
double entropy_h0(std::span<const std::uint64_t> counts, std::uint64_t n);

struct EntropyReport {
    double bits_per_symbol;
    std::uint64_t distinct_windows; //! distinct (k+1)-grams, or distinct symbols for k = 0
    std::uint64_t contexts;         //! distinct length-k contexts with a successor
};

/// Order-k empirical entropy of a stream of n bytes from the counts of its
/// (k+1)-grams (1-grams for k = 0). Only occurrences of a context that are
/// followed by a character contribute to that context. The sums run over
/// histograms of counter values, so the result does not depend on the
/// iteration order of the backing tables.
EntropyReport entropy_from_counter(const KmerCounter& windows, unsigned k, std::uint64_t n, TableOptions options = {});

//! H_k of `stream`; k = 0 gives H_0. DomainError if the stream has at most k bytes (or none for k = 0).
double entropy_hk(std::span<const std::uint8_t> stream, unsigned k, TableOptions options = {});

} // namespace sepchain
