#include "sepchain/table.hpp"

#include "sepchain/errors.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <string>

namespace sepchain {

namespace {

BucketGroup* allocate_headers(AllocLedger& ledger, std::uint64_t count) {
    auto* raw = tracked::allocate(ledger, count * sizeof(BucketGroup));
    auto* headers = reinterpret_cast<BucketGroup*>(raw);
    std::uninitialized_default_construct_n(headers, count);
    return headers;
}

void free_headers(AllocLedger& ledger, BucketGroup* headers, std::uint64_t count) {
    tracked::deallocate(ledger, reinterpret_cast<std::byte*>(headers), count * sizeof(BucketGroup));
}

unsigned checked_bucket_bits(std::uint64_t buckets, unsigned key_bits) {
    if (!std::has_single_bit(buckets)) {
        throw ConfigError("bucket count must be a power of two, got " + std::to_string(buckets));
    }
    const auto bits = static_cast<unsigned>(std::countr_zero(buckets));
    if (bits > key_bits) {
        throw ConfigError("bucket count 2^" + std::to_string(bits) + " exceeds the key space 2^" + std::to_string(key_bits));
    }
    return bits;
}

TableConfig make_config(unsigned key_bits, BucketVariant variant, GrowthPolicy policy, std::uint64_t initial_buckets,
                        unsigned value_bytes) {
    TableConfig config;
    config.key_bits = key_bits;
    config.variant = variant;
    config.policy = policy;
    config.initial_buckets = initial_buckets;
    config.value_bytes = value_bytes;
    return config;
}

unsigned checked_key_bits(unsigned key_bits) {
    if (key_bits != 32 && key_bits != 64) {
        throw ConfigError("tables support 32- or 64-bit keys, got " + std::to_string(key_bits));
    }
    return key_bits;
}

} // namespace

CompactTable::CompactTable(TableConfig config)
    : m_key_bits(checked_key_bits(config.key_bits)),
      m_transform(config.variant == BucketVariant::plain ? TransformSpec::identity(config.key_bits)
                                                          : TransformSpec::standard(config.key_bits, config.transform_seed)),
      m_ledger(config.ledger ? std::move(config.ledger) : std::make_shared<AllocLedger>()) {
    if (config.value_bytes > 8) throw ConfigError("values are at most 8 bytes wide");
    m_bucket_bits = checked_bucket_bits(config.initial_buckets, m_key_bits);
    m_shape.variant = config.variant;
    m_shape.policy = config.policy;
    m_shape.value_bytes = config.value_bytes;
    m_shape = shape_for(m_bucket_bits);
    m_buckets = allocate_headers(*m_ledger, bucket_count());
}

CompactTable::CompactTable(unsigned key_bits, BucketVariant variant, GrowthPolicy policy, std::uint64_t initial_buckets,
                           unsigned value_bytes)
    : CompactTable(make_config(key_bits, variant, policy, initial_buckets, value_bytes)) {}

CompactTable::~CompactTable() { release(); }

CompactTable::CompactTable(CompactTable&& other) noexcept
    : m_key_bits(other.m_key_bits),
      m_bucket_bits(other.m_bucket_bits),
      m_size(other.m_size),
      m_resizes(other.m_resizes),
      m_shape(other.m_shape),
      m_transform(std::move(other.m_transform)),
      m_ledger(std::move(other.m_ledger)),
      m_buckets(std::exchange(other.m_buckets, nullptr)),
      m_on_resize(std::move(other.m_on_resize)) {
    other.m_size = 0;
}

CompactTable& CompactTable::operator=(CompactTable&& other) noexcept {
    if (this != &other) {
        release();
        m_key_bits = other.m_key_bits;
        m_bucket_bits = other.m_bucket_bits;
        m_size = std::exchange(other.m_size, 0);
        m_resizes = other.m_resizes;
        m_shape = other.m_shape;
        m_transform = std::move(other.m_transform);
        m_ledger = std::move(other.m_ledger);
        m_buckets = std::exchange(other.m_buckets, nullptr);
        m_on_resize = std::move(other.m_on_resize);
    }
    return *this;
}

void CompactTable::release() noexcept {
    if (m_buckets == nullptr) return;
    const std::uint64_t count = bucket_count();
    for (std::uint64_t b = 0; b < count; ++b) bucket_release(m_buckets[b], m_shape, *m_ledger);
    free_headers(*m_ledger, m_buckets, count);
    m_buckets = nullptr;
}

unsigned CompactTable::quotient_width() const noexcept {
    return m_shape.variant == BucketVariant::plain ? m_key_bits : m_key_bits - m_bucket_bits;
}

BucketShape CompactTable::shape_for(unsigned bucket_bits) const noexcept {
    BucketShape shape = m_shape;
    shape.quotient_width = sepchain::storage_width(m_shape.variant, m_key_bits - bucket_bits, m_key_bits);
    return shape;
}

void CompactTable::check_key(key_type key) const {
    if (key > max_key()) {
        throw DomainError("key " + std::to_string(key) + " exceeds " + std::to_string(m_key_bits) + " bits");
    }
}

void CompactTable::check_value(mapped_type value) const {
    if (value > max_value()) {
        throw DomainError("value " + std::to_string(value) + " exceeds " + std::to_string(m_shape.value_bytes) + " bytes");
    }
}

CompactTable::Slot CompactTable::locate(key_type key) const {
    if (m_shape.variant == BucketVariant::plain) {
        return {mix64(key) & low_mask(m_bucket_bits), key};
    }
    const CodePair pair = split_bits(m_transform.forward(key), m_bucket_bits);
    return {pair.remainder, pair.quotient};
}

CompactTable::key_type CompactTable::key_at(std::uint64_t bucket, std::size_t position) const {
    const std::uint64_t quotient = bucket_quotient(m_buckets[bucket], m_shape, position);
    if (m_shape.variant == BucketVariant::plain) return quotient;
    return m_transform.backward(compose_bits({quotient, bucket}, m_bucket_bits));
}

std::optional<CompactTable::mapped_type> CompactTable::insert(key_type key, mapped_type value) {
    check_key(key);
    check_value(value);
    for (;;) {
        const Slot slot = locate(key);
        BucketGroup& group = m_buckets[slot.bucket];
        if (const auto found = bucket_find(group, m_shape, slot.quotient)) {
            const mapped_type old = bucket_value(group, m_shape, *found);
            bucket_set_value(group, m_shape, *found, value);
            return old;
        }
        if (bucket_insert(group, m_shape, *m_ledger, slot.quotient, value)) {
            ++m_size;
            return std::nullopt;
        }
        if (m_on_resize) m_on_resize(*this);
        resize_double();
    }
}

bool CompactTable::add_to(key_type key, mapped_type delta) {
    check_key(key);
    for (;;) {
        const Slot slot = locate(key);
        BucketGroup& group = m_buckets[slot.bucket];
        if (const auto found = bucket_find(group, m_shape, slot.quotient)) {
            const mapped_type old = bucket_value(group, m_shape, *found);
            if (delta > max_value() - old) return false;
            bucket_set_value(group, m_shape, *found, old + delta);
            return true;
        }
        if (delta > max_value()) return false;
        if (bucket_insert(group, m_shape, *m_ledger, slot.quotient, delta)) {
            ++m_size;
            return true;
        }
        if (m_on_resize) m_on_resize(*this);
        resize_double();
    }
}

std::optional<CompactTable::mapped_type> CompactTable::get(key_type key) const {
    if (key > max_key()) return std::nullopt;
    const Slot slot = locate(key);
    const BucketGroup& group = m_buckets[slot.bucket];
    if (const auto found = bucket_find(group, m_shape, slot.quotient)) return bucket_value(group, m_shape, *found);
    return std::nullopt;
}

bool CompactTable::erase(key_type key) {
    if (key > max_key()) return false;
    const Slot slot = locate(key);
    BucketGroup& group = m_buckets[slot.bucket];
    const auto found = bucket_find(group, m_shape, slot.quotient);
    if (!found) return false;
    bucket_remove(group, m_shape, *found);
    --m_size;
    return true;
}

void CompactTable::resize_double() {
    if (m_bucket_bits + 1 > m_key_bits || m_bucket_bits + 1 >= 64) {
        throw CapacityError("cannot grow beyond 2^" + std::to_string(m_key_bits) + " buckets");
    }
    rehash(m_bucket_bits + 1);
    ++m_resizes;
}

void CompactTable::rehash(unsigned new_bits) {
    const std::uint64_t old_count = bucket_count();
    const std::uint64_t new_count = std::uint64_t{1} << new_bits;
    const BucketShape old_shape = m_shape;
    const BucketShape new_shape = shape_for(new_bits);
    const bool plain = m_shape.variant == BucketVariant::plain;
    AllocLedger& ledger = *m_ledger;

    BucketGroup* fresh = allocate_headers(ledger, new_count);

    const auto target = [&](std::uint64_t bucket, std::uint64_t quotient) -> Slot {
        if (plain) return {mix64(quotient) & low_mask(new_bits), quotient};
        const CodePair pair = split_bits(compose_bits({quotient, bucket}, m_bucket_bits), new_bits);
        return {pair.remainder, pair.quotient};
    };

    // old bucket b only feeds new buckets b and b + old_count; each old bucket
    // is released as soon as it is drained
    for (std::uint64_t b = 0; b < old_count; ++b) {
        BucketGroup& old = m_buckets[b];
        if (old.size > 0) {
            std::size_t upper = 0;
            for (std::size_t i = 0; i < old.size; ++i) {
                if (target(b, bucket_quotient(old, old_shape, i)).bucket != b) ++upper;
            }
            bucket_reserve(fresh[b], new_shape, ledger, old.size - upper);
            bucket_reserve(fresh[b + old_count], new_shape, ledger, upper);
            for (std::size_t i = 0; i < old.size; ++i) {
                const Slot slot = target(b, bucket_quotient(old, old_shape, i));
                [[maybe_unused]] const bool ok =
                    bucket_insert(fresh[slot.bucket], new_shape, ledger, slot.quotient, bucket_value(old, old_shape, i));
            }
        }
        bucket_release(old, old_shape, ledger);
    }

    free_headers(ledger, m_buckets, old_count);
    m_buckets = fresh;
    m_bucket_bits = new_bits;
    m_shape = new_shape;
}

void CompactTable::reserve(std::uint64_t buckets) {
    const unsigned bits = checked_bucket_bits(buckets, m_key_bits);
    if (bits == m_bucket_bits) return;
    if (m_size == 0) {
        release();
        m_bucket_bits = bits;
        m_shape = shape_for(bits);
        m_buckets = allocate_headers(*m_ledger, bucket_count());
        return;
    }
    if (bits < m_bucket_bits) {
        throw ConfigError("cannot reserve " + std::to_string(buckets) + " buckets in a non-empty table with " +
                          std::to_string(bucket_count()) + " buckets");
    }
    while (m_bucket_bits < bits) resize_double();
}

void CompactTable::set_value_bytes(unsigned value_bytes) {
    if (value_bytes > 8) throw ConfigError("values are at most 8 bytes wide");
    if (value_bytes == m_shape.value_bytes) return;
    if (value_bytes < m_shape.value_bytes) {
        const std::uint64_t limit = low_mask(8 * value_bytes);
        for_each([&](key_type, mapped_type value) {
            if (value > limit) throw DomainError("a stored value does not fit into " + std::to_string(value_bytes) + " bytes");
        });
    }
    for (std::uint64_t b = 0; b < bucket_count(); ++b) {
        bucket_rewrite_values(m_buckets[b], m_shape, *m_ledger, value_bytes);
    }
    m_shape.value_bytes = value_bytes;
}

TableStats CompactTable::stats() const {
    TableStats stats{};
    stats.bucket_count = bucket_count();
    stats.element_count = m_size;
    for (std::uint64_t b = 0; b < bucket_count(); ++b) {
        stats.max_bucket_size = std::max<std::size_t>(stats.max_bucket_size, m_buckets[b].size);
    }
    stats.allocated_bytes = m_ledger->current();
    stats.bytes_per_element = m_size == 0 ? 0.0 : static_cast<double>(stats.allocated_bytes) / static_cast<double>(m_size);
    stats.resize_count = m_resizes;
    return stats;
}

} // namespace sepchain
