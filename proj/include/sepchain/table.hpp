#pragma once

#include "sepchain/bucket.hpp"
#include "sepchain/memtrack.hpp"
#include "sepchain/transform.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <utility>

namespace sepchain {

struct TableStats {
    std::uint64_t bucket_count;
    std::uint64_t element_count;
    std::size_t max_bucket_size;
    std::size_t allocated_bytes; //! current balance of the table's ledger
    double bytes_per_element;    //! allocated_bytes / element_count, 0 when empty
    std::uint64_t resize_count;
};

struct TableConfig {
    unsigned key_bits = 32; //! 32 or 64
    BucketVariant variant = BucketVariant::cht;
    GrowthPolicy policy = GrowthPolicy::incremental;
    std::uint64_t initial_buckets = 1;
    unsigned value_bytes = 4; //! 0..8; 0 turns the map into a set
    std::uint64_t transform_seed = 0;
    std::shared_ptr<AllocLedger> ledger; //! a private ledger is created when empty
};

//! backing-table choice of the applications built on CompactTable
struct TableOptions {
    BucketVariant variant = BucketVariant::cht;
    GrowthPolicy policy = GrowthPolicy::incremental;
    std::shared_ptr<AllocLedger> ledger;
};

/**
 * Separate chaining hash map with compact hashing.
 *
 * A key K is transformed by a bijection f into a k-bit code; the lowest
 * lg|H| bits (the remainder) select the bucket, and only the remaining
 * k - lg|H| bits (the quotient) are stored. Buckets hold at most 255
 * elements; inserting into a full bucket doubles the bucket count, moving
 * elements bucket by bucket without inverting f. The plain variant stores
 * whole keys and picks buckets with mix64 instead.
 *
 * Keys are integers below 2^k; values are unsigned integers of `value_bytes` bytes.
 */
class CompactTable {
   public:
    using key_type = std::uint64_t;
    using mapped_type = std::uint64_t;

    explicit CompactTable(TableConfig config);
    CompactTable(unsigned key_bits, BucketVariant variant, GrowthPolicy policy, std::uint64_t initial_buckets = 1,
                 unsigned value_bytes = 4);
    ~CompactTable();

    CompactTable(CompactTable&& other) noexcept;
    CompactTable& operator=(CompactTable&& other) noexcept;
    CompactTable(const CompactTable&) = delete;
    CompactTable& operator=(const CompactTable&) = delete;

    //! stores value under key; returns the replaced value if the key was present
    std::optional<mapped_type> insert(key_type key, mapped_type value = 0);
    std::optional<mapped_type> get(key_type key) const;
    bool contains(key_type key) const { return get(key).has_value(); }
    bool erase(key_type key);

    /// Adds delta to the value of key, inserting delta for a new key. Returns
    /// false and leaves the table untouched if the result exceeds max_value().
    bool add_to(key_type key, mapped_type delta);

    //! doubles the bucket count; throws CapacityError beyond 2^k buckets
    void resize_double();
    //! sets the bucket count to `buckets` (a power of two, not below the current count unless empty)
    void reserve(std::uint64_t buckets);
    //! rewrites all values with a new width in bytes; every stored value has to fit
    void set_value_bytes(unsigned value_bytes);

    //! called right before an insert-triggered doubling
    void set_resize_observer(std::function<void(const CompactTable&)> observer) { m_on_resize = std::move(observer); }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::uint64_t b = 0; b < bucket_count(); ++b) {
            const BucketGroup& group = m_buckets[b];
            for (std::size_t i = 0; i < group.size; ++i) {
                fn(key_at(b, i), bucket_value(group, m_shape, i));
            }
        }
    }

    class const_iterator {
       public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = std::pair<key_type, mapped_type>;
        using difference_type = std::ptrdiff_t;
        using pointer = void;
        using reference = value_type;

        const_iterator() = default;
        value_type operator*() const {
            return {m_table->key_at(m_bucket, m_position), bucket_value(m_table->m_buckets[m_bucket], m_table->m_shape, m_position)};
        }
        const_iterator& operator++() {
            ++m_position;
            skip_empty();
            return *this;
        }
        const_iterator operator++(int) {
            auto old = *this;
            ++*this;
            return old;
        }
        friend bool operator==(const const_iterator& a, const const_iterator& b) {
            return a.m_bucket == b.m_bucket && a.m_position == b.m_position;
        }

       private:
        friend class CompactTable;
        const_iterator(const CompactTable* table, std::uint64_t bucket) : m_table(table), m_bucket(bucket) { skip_empty(); }
        void skip_empty() {
            while (m_bucket < m_table->bucket_count() && m_position >= m_table->m_buckets[m_bucket].size) {
                ++m_bucket;
                m_position = 0;
            }
        }
        const CompactTable* m_table = nullptr;
        std::uint64_t m_bucket = 0;
        std::size_t m_position = 0;
    };

    const_iterator begin() const { return const_iterator(this, 0); }
    const_iterator end() const { return const_iterator(this, bucket_count()); }

    TableStats stats() const;

    std::uint64_t size() const noexcept { return m_size; }
    bool empty() const noexcept { return m_size == 0; }
    std::uint64_t bucket_count() const noexcept { return std::uint64_t{1} << m_bucket_bits; }
    unsigned bucket_bits() const noexcept { return m_bucket_bits; }
    //! k - lg|H| for compact variants, k for plain
    unsigned quotient_width() const noexcept;
    //! bits per stored quotient slot (differs from quotient_width for vec)
    unsigned storage_width() const noexcept { return m_shape.quotient_width; }
    unsigned key_bits() const noexcept { return m_key_bits; }
    unsigned value_bytes() const noexcept { return m_shape.value_bytes; }
    BucketVariant variant() const noexcept { return m_shape.variant; }
    GrowthPolicy policy() const noexcept { return m_shape.policy; }
    key_type max_key() const noexcept { return low_mask(m_key_bits); }
    mapped_type max_value() const noexcept { return low_mask(8 * m_shape.value_bytes); }
    const TransformSpec& transform() const noexcept { return m_transform; }
    const std::shared_ptr<AllocLedger>& ledger() const noexcept { return m_ledger; }
    const BucketGroup& bucket(std::uint64_t index) const { return m_buckets[index]; }
    const BucketShape& shape() const noexcept { return m_shape; }

   private:
    struct Slot {
        std::uint64_t bucket;
        std::uint64_t quotient;
    };

    Slot locate(key_type key) const;
    key_type key_at(std::uint64_t bucket, std::size_t position) const;
    BucketShape shape_for(unsigned bucket_bits) const noexcept;
    void check_key(key_type key) const;
    void check_value(mapped_type value) const;
    void rehash(unsigned bucket_bits);
    void release() noexcept;

    unsigned m_key_bits;
    unsigned m_bucket_bits = 0;
    std::uint64_t m_size = 0;
    std::uint64_t m_resizes = 0;
    BucketShape m_shape;
    TransformSpec m_transform;
    std::shared_ptr<AllocLedger> m_ledger;
    BucketGroup* m_buckets = nullptr;
    std::function<void(const CompactTable&)> m_on_resize;
};

} // namespace sepchain
