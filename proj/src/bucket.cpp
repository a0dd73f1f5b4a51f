#include "sepchain/bucket.hpp"

#include "sepchain/errors.hpp"
#include "sepchain/transform.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#if defined(__x86_64__) || defined(__i386__)
#define SEPCHAIN_X86 1
#include <immintrin.h>
#endif

namespace sepchain {

std::string_view to_string(BucketVariant variant) noexcept {
    switch (variant) {
        case BucketVariant::cht: return "cht";
        case BucketVariant::vec: return "vec";
        case BucketVariant::single: return "single";
        case BucketVariant::plain: return "plain";
    }
    return "?";
}

std::string_view to_string(GrowthPolicy policy) noexcept {
    return policy == GrowthPolicy::incremental ? "inc" : "half";
}

BucketVariant parse_variant(std::string_view name) {
    if (name == "cht") return BucketVariant::cht;
    if (name == "vec") return BucketVariant::vec;
    if (name == "single") return BucketVariant::single;
    if (name == "plain") return BucketVariant::plain;
    throw ConfigError("unknown bucket variant '" + std::string(name) + "'");
}

GrowthPolicy parse_policy(std::string_view name) {
    if (name == "inc") return GrowthPolicy::incremental;
    if (name == "half") return GrowthPolicy::half_increase;
    throw ConfigError("unknown growth policy '" + std::string(name) + "'");
}

unsigned storage_width(BucketVariant variant, unsigned logical_width, unsigned key_bits) noexcept {
    switch (variant) {
        case BucketVariant::plain: return key_bits;
        case BucketVariant::vec:
            if (logical_width == 0) return 0;
            return std::max(8u, std::bit_ceil(logical_width));
        default: return logical_width;
    }
}

// ---------------------------------------------------------------------------
// quotient codec

namespace {

inline std::uint64_t load_le64(const std::byte* p) noexcept {
    std::uint64_t word;
    std::memcpy(&word, p, sizeof(word));
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap64(word);
    return word;
}

//! up to 8 bytes starting at `byte`; bytes past the end read as zero
inline std::uint64_t load_word(std::span<const std::byte> storage, std::size_t byte) noexcept {
    if (byte + 8 <= storage.size()) return load_le64(storage.data() + byte);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < 8 && byte + i < storage.size(); ++i) {
        word |= static_cast<std::uint64_t>(storage[byte + i]) << (8 * i);
    }
    return word;
}

//! the 64 bits starting at bit offset `bit`
inline std::uint64_t load_bits(std::span<const std::byte> storage, std::size_t bit) noexcept {
    const std::size_t byte = bit / 8;
    const unsigned shift = bit % 8;
    std::uint64_t word = load_word(storage, byte) >> shift;
    if (shift != 0 && byte + 8 < storage.size()) {
        word |= static_cast<std::uint64_t>(storage[byte + 8]) << (64 - shift);
    }
    return word;
}

} // namespace

std::uint64_t quotient_get(std::span<const std::byte> storage, std::size_t index, unsigned width) noexcept {
    if (width == 0) return 0;
    return load_bits(storage, index * width) & low_mask(width);
}

void quotient_set(std::span<std::byte> storage, std::size_t index, unsigned width, std::uint64_t value) {
    if (value > low_mask(width)) {
        throw DomainError("quotient " + std::to_string(value) + " does not fit into " + std::to_string(width) + " bits");
    }
    std::size_t bit = index * width;
    unsigned remaining = width;
    while (remaining > 0) {
        const std::size_t byte = bit / 8;
        const unsigned offset = bit % 8;
        const unsigned take = std::min(8 - offset, remaining);
        const unsigned mask = ((1u << take) - 1) << offset;
        const unsigned old = std::to_integer<unsigned>(storage[byte]);
        const unsigned fresh = (static_cast<unsigned>(value) << offset) & mask;
        storage[byte] = static_cast<std::byte>((old & ~mask) | fresh);
        value >>= take;
        bit += take;
        remaining -= take;
    }
}

// ---------------------------------------------------------------------------
// scans

std::optional<std::size_t> scan_scalar(std::span<const std::byte> storage, std::size_t size, std::uint64_t quotient,
                                       unsigned width) noexcept {
    for (std::size_t i = 0; i < size; ++i) {
        if (quotient_get(storage, i, width) == quotient) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> scan_packed(std::span<const std::byte> storage, std::size_t size, std::uint64_t quotient,
                                       unsigned width) {
    if (width < 1 || width > 32) {
        throw ConfigError("packed scan needs a quotient width in 1..32, got " + std::to_string(width));
    }
    if (quotient > low_mask(width)) return std::nullopt;

    const unsigned per_word = 64 / width;
    std::uint64_t ones = 0; // lowest bit of every field
    for (unsigned i = 0; i < per_word; ++i) ones |= std::uint64_t{1} << (i * width);
    const std::uint64_t high = ones << (width - 1);
    const std::uint64_t fields = ones * low_mask(width);
    const std::uint64_t low = fields ^ high;
    const std::uint64_t probe = ones * quotient;

    const auto zero_fields = [&](std::uint64_t word) {
        const std::uint64_t diff = word ^ probe;
        // a field's high bit survives iff the whole field of diff is zero
        return ~(((diff & low) + low) | diff | low) & high;
    };

    const std::byte* data = storage.data();
    const std::size_t word_bits = per_word * width;
    // whether the fields of a word can reach into a ninth byte
    const bool spill = word_bits + 7 > 64;
    const std::size_t full_words = size / per_word;
    std::size_t bit = 0;
    for (std::size_t w = 0; w < full_words; ++w, bit += word_bits) {
        const std::size_t byte = bit / 8;
        const unsigned shift = bit % 8;
        std::uint64_t word;
        if (byte + 9 <= storage.size()) {
            word = load_le64(data + byte) >> shift;
            if (spill && shift != 0) word |= std::to_integer<std::uint64_t>(data[byte + 8]) << (64 - shift);
        } else {
            word = load_bits(storage, bit);
        }
        if (const std::uint64_t zero = zero_fields(word); zero != 0) {
            return w * per_word + static_cast<std::size_t>(std::countr_zero(zero)) / width;
        }
    }
    const std::size_t rest = size - full_words * per_word;
    if (rest > 0) {
        const std::uint64_t zero = zero_fields(load_bits(storage, bit)) & low_mask(static_cast<unsigned>(rest) * width);
        if (zero != 0) return full_words * per_word + static_cast<std::size_t>(std::countr_zero(zero)) / width;
    }
    return std::nullopt;
}

namespace {

#ifdef SEPCHAIN_X86

__attribute__((target("avx2"))) std::optional<std::size_t> scan_avx2(const std::byte* data, std::size_t size,
                                                                      std::uint64_t quotient, unsigned width) {
    const std::size_t slot = width / 8;
    const std::size_t per_vector = 32 / slot;
    __m256i probe;
    switch (width) {
        case 8: probe = _mm256_set1_epi8(static_cast<char>(quotient)); break;
        case 16: probe = _mm256_set1_epi16(static_cast<short>(quotient)); break;
        case 32: probe = _mm256_set1_epi32(static_cast<int>(quotient)); break;
        default: probe = _mm256_set1_epi64x(static_cast<long long>(quotient)); break;
    }
    std::size_t i = 0;
    for (; i + per_vector <= size; i += per_vector) {
        const __m256i chunk = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i * slot));
        __m256i eq;
        switch (width) {
            case 8: eq = _mm256_cmpeq_epi8(chunk, probe); break;
            case 16: eq = _mm256_cmpeq_epi16(chunk, probe); break;
            case 32: eq = _mm256_cmpeq_epi32(chunk, probe); break;
            default: eq = _mm256_cmpeq_epi64(chunk, probe); break;
        }
        const auto mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(eq));
        if (mask != 0) return i + static_cast<std::size_t>(std::countr_zero(mask)) / slot;
    }
    for (; i < size; ++i) {
        if (quotient_get({data, size * slot}, i, width) == quotient) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> scan_sse2(const std::byte* data, std::size_t size, std::uint64_t quotient,
                                     unsigned width) {
    const std::size_t slot = width / 8;
    const std::size_t per_vector = 16 / slot;
    __m128i probe;
    switch (width) {
        case 8: probe = _mm_set1_epi8(static_cast<char>(quotient)); break;
        case 16: probe = _mm_set1_epi16(static_cast<short>(quotient)); break;
        case 32: probe = _mm_set1_epi32(static_cast<int>(quotient)); break;
        default: probe = _mm_set1_epi64x(static_cast<long long>(quotient)); break;
    }
    std::size_t i = 0;
    for (; i + per_vector <= size; i += per_vector) {
        const __m128i chunk = _mm_loadu_si128(reinterpret_cast<const __m128i*>(data + i * slot));
        __m128i eq;
        switch (width) {
            case 8: eq = _mm_cmpeq_epi8(chunk, probe); break;
            case 16: eq = _mm_cmpeq_epi16(chunk, probe); break;
            default: eq = _mm_cmpeq_epi32(chunk, probe); break;
        }
        auto mask = static_cast<std::uint32_t>(_mm_movemask_epi8(eq));
        if (width == 64) {
            // SSE2 has no 64-bit compare: both 32-bit halves have to match
            mask = ((mask & 0x00FFu) == 0x00FFu ? 0x00FFu : 0u) | ((mask & 0xFF00u) == 0xFF00u ? 0xFF00u : 0u);
        }
        if (mask != 0) return i + static_cast<std::size_t>(std::countr_zero(mask)) / slot;
    }
    for (; i < size; ++i) {
        if (quotient_get({data, size * slot}, i, width) == quotient) return i;
    }
    return std::nullopt;
}

#endif

VectorBackend detect_backend() noexcept {
#ifdef SEPCHAIN_X86
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) return VectorBackend::avx2;
    return VectorBackend::sse2;
#else
    return VectorBackend::scalar;
#endif
}

} // namespace

std::string_view to_string(VectorBackend backend) noexcept {
    switch (backend) {
        case VectorBackend::avx2: return "avx2";
        case VectorBackend::sse2: return "sse2";
        default: return "scalar";
    }
}

VectorBackend active_vector_backend() noexcept {
    static const VectorBackend backend = detect_backend();
    return backend;
}

bool vector_backend_supported(VectorBackend backend) noexcept {
    return static_cast<int>(backend) <= static_cast<int>(active_vector_backend());
}

std::optional<std::size_t> scan_vector(VectorBackend backend, std::span<const std::byte> storage, std::size_t size,
                                       std::uint64_t quotient, unsigned width) {
    if (width != 8 && width != 16 && width != 32 && width != 64) {
        throw ConfigError("vector scan needs a quotient width of 8, 16, 32 or 64 bits, got " + std::to_string(width));
    }
    if (!vector_backend_supported(backend)) {
        throw ConfigError("vector backend " + std::string(to_string(backend)) + " is not supported by this CPU");
    }
    if (quotient > low_mask(width)) return std::nullopt;
    const std::size_t used = std::min(storage.size(), size * (width / 8));
    size = used / (width / 8);
    switch (backend) {
#ifdef SEPCHAIN_X86
        case VectorBackend::avx2: return scan_avx2(storage.data(), size, quotient, width);
        case VectorBackend::sse2: return scan_sse2(storage.data(), size, quotient, width);
#endif
        default: return scan_scalar(storage, size, quotient, width);
    }
}

std::optional<std::size_t> scan_vector(std::span<const std::byte> storage, std::size_t size, std::uint64_t quotient,
                                       unsigned width) {
    return scan_vector(active_vector_backend(), storage, size, quotient, width);
}

// ---------------------------------------------------------------------------
// growth

std::optional<std::size_t> grow_capacity(std::size_t current, std::size_t needed, GrowthPolicy policy) noexcept {
    if (needed > kMaxBucketSize) return std::nullopt;
    if (policy == GrowthPolicy::incremental) return needed;
    return std::min(kMaxBucketSize, std::max({needed, current * 3 / 2, current + 1}));
}

// ---------------------------------------------------------------------------
// bucket operations

namespace {

std::size_t quotient_alloc_bytes(const BucketShape& shape, std::size_t capacity) noexcept {
    const std::size_t bytes = quotient_bytes(capacity, shape.quotient_width);
    if (shape.variant == BucketVariant::vec && bytes != 0) return tracked::aligned_size(bytes, kVecAlignment);
    return bytes;
}

std::size_t value_alloc_bytes(const BucketShape& shape, std::size_t capacity) noexcept {
    return capacity * shape.value_bytes;
}

std::byte* value_base(const BucketGroup& group, const BucketShape& shape) noexcept {
    if (shape.variant == BucketVariant::single) {
        return group.quotients + quotient_bytes(group.capacity, shape.quotient_width);
    }
    return group.values;
}

std::uint64_t read_value(const std::byte* base, std::size_t index, unsigned value_bytes) noexcept {
    std::uint64_t value = 0;
    const std::byte* p = base + index * value_bytes;
    for (unsigned i = 0; i < value_bytes; ++i) value |= std::to_integer<std::uint64_t>(p[i]) << (8 * i);
    return value;
}

void write_value(std::byte* base, std::size_t index, unsigned value_bytes, std::uint64_t value) noexcept {
    std::byte* p = base + index * value_bytes;
    for (unsigned i = 0; i < value_bytes; ++i) p[i] = static_cast<std::byte>(value >> (8 * i));
}

std::span<std::byte> quotient_span_mut(BucketGroup& group, const BucketShape& shape) noexcept {
    return {group.quotients, quotient_bytes(group.capacity, shape.quotient_width)};
}

//! moves the bucket to storage for `capacity` elements (capacity >= size)
void change_capacity(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger, std::size_t capacity) {
    const std::size_t old_capacity = group.capacity;
    switch (shape.variant) {
        case BucketVariant::single: {
            const std::size_t old_q = quotient_bytes(old_capacity, shape.quotient_width);
            const std::size_t new_q = quotient_bytes(capacity, shape.quotient_width);
            std::byte* block = tracked::reallocate(ledger, group.quotients, old_q + value_alloc_bytes(shape, old_capacity),
                                                   new_q + value_alloc_bytes(shape, capacity));
            if (block != nullptr && group.size > 0 && shape.value_bytes > 0) {
                std::memmove(block + new_q, block + old_q, group.size * shape.value_bytes);
            }
            group.quotients = block;
            break;
        }
        case BucketVariant::vec: {
            // aligned storage cannot be realloc'ed: allocate, copy, release
            std::byte* fresh = tracked::allocate_aligned(ledger, quotient_bytes(capacity, shape.quotient_width), kVecAlignment);
            const std::size_t used = quotient_bytes(group.size, shape.quotient_width);
            if (used > 0) std::memcpy(fresh, group.quotients, used);
            tracked::deallocate(ledger, group.quotients, quotient_alloc_bytes(shape, old_capacity));
            group.quotients = fresh;
            group.values = tracked::reallocate(ledger, group.values, value_alloc_bytes(shape, old_capacity),
                                               value_alloc_bytes(shape, capacity));
            break;
        }
        default:
            group.quotients = tracked::reallocate(ledger, group.quotients, quotient_alloc_bytes(shape, old_capacity),
                                                  quotient_alloc_bytes(shape, capacity));
            group.values = tracked::reallocate(ledger, group.values, value_alloc_bytes(shape, old_capacity),
                                               value_alloc_bytes(shape, capacity));
            break;
    }
    group.capacity = static_cast<std::uint8_t>(capacity);
}

} // namespace

std::span<const std::byte> quotient_span(const BucketGroup& group, const BucketShape& shape) noexcept {
    return {group.quotients, quotient_bytes(group.capacity, shape.quotient_width)};
}

std::uint64_t bucket_quotient(const BucketGroup& group, const BucketShape& shape, std::size_t index) noexcept {
    return quotient_get(quotient_span(group, shape), index, shape.quotient_width);
}

std::uint64_t bucket_value(const BucketGroup& group, const BucketShape& shape, std::size_t index) noexcept {
    return read_value(value_base(group, shape), index, shape.value_bytes);
}

void bucket_set_value(BucketGroup& group, const BucketShape& shape, std::size_t index, std::uint64_t value) noexcept {
    write_value(value_base(group, shape), index, shape.value_bytes, value);
}

std::optional<std::size_t> bucket_find(const BucketGroup& group, const BucketShape& shape, std::uint64_t quotient) {
    if (group.size == 0) return std::nullopt;
    const unsigned width = shape.quotient_width;
    const auto storage = quotient_span(group, shape);
    switch (shape.variant) {
        case BucketVariant::vec:
        case BucketVariant::plain:
            if (width == 8 || width == 16 || width == 32 || width == 64) {
                return scan_vector(storage, group.size, quotient, width);
            }
            break;
        default:
            if (width >= 1 && width <= 32) return scan_packed(storage, group.size, quotient, width);
            break;
    }
    return scan_scalar(storage, group.size, quotient, width);
}

bool bucket_insert(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger, std::uint64_t quotient,
                   std::uint64_t value) {
    if (group.size >= kMaxBucketSize) return false;
    if (quotient > low_mask(shape.quotient_width)) {
        throw DomainError("quotient " + std::to_string(quotient) + " does not fit into " +
                          std::to_string(shape.quotient_width) + " bits");
    }
    if (group.size == group.capacity) {
        change_capacity(group, shape, ledger, *grow_capacity(group.capacity, group.size + 1u, shape.policy));
    }
    quotient_set(quotient_span_mut(group, shape), group.size, shape.quotient_width, quotient);
    write_value(value_base(group, shape), group.size, shape.value_bytes, value);
    ++group.size;
    return true;
}

void bucket_remove(BucketGroup& group, const BucketShape& shape, std::size_t index) {
    if (index >= group.size) {
        throw DomainError("bucket index " + std::to_string(index) + " out of range for size " + std::to_string(group.size));
    }
    const std::size_t last = group.size - 1u;
    if (index != last) {
        quotient_set(quotient_span_mut(group, shape), index, shape.quotient_width, bucket_quotient(group, shape, last));
        write_value(value_base(group, shape), index, shape.value_bytes, bucket_value(group, shape, last));
    }
    --group.size;
}

void bucket_reserve(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger, std::size_t capacity) {
    if (capacity > kMaxBucketSize) {
        throw CapacityError("a bucket holds at most " + std::to_string(kMaxBucketSize) + " elements");
    }
    if (capacity < group.size) throw DomainError("cannot reserve below the current bucket size");
    if (capacity != group.capacity) change_capacity(group, shape, ledger, capacity);
}

void bucket_release(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger) noexcept {
    if (shape.variant == BucketVariant::single) {
        tracked::deallocate(ledger, group.quotients,
                            quotient_bytes(group.capacity, shape.quotient_width) + value_alloc_bytes(shape, group.capacity));
    } else {
        tracked::deallocate(ledger, group.quotients, quotient_alloc_bytes(shape, group.capacity));
        tracked::deallocate(ledger, group.values, value_alloc_bytes(shape, group.capacity));
    }
    group = BucketGroup{};
}

void bucket_rewrite_values(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger, unsigned new_value_bytes) {
    if (new_value_bytes > 8) throw ConfigError("values are at most 8 bytes wide");
    const std::size_t capacity = group.capacity;
    if (capacity == 0) return;

    if (shape.variant == BucketVariant::single) {
        const std::size_t q = quotient_bytes(capacity, shape.quotient_width);
        std::byte* block = tracked::allocate(ledger, q + capacity * new_value_bytes);
        if (q > 0) std::memcpy(block, group.quotients, q);
        for (std::size_t i = 0; i < group.size; ++i) {
            write_value(block + q, i, new_value_bytes, bucket_value(group, shape, i));
        }
        tracked::deallocate(ledger, group.quotients, q + value_alloc_bytes(shape, capacity));
        group.quotients = block;
    } else {
        std::byte* values = tracked::allocate(ledger, capacity * new_value_bytes);
        for (std::size_t i = 0; i < group.size; ++i) {
            write_value(values, i, new_value_bytes, bucket_value(group, shape, i));
        }
        tracked::deallocate(ledger, group.values, value_alloc_bytes(shape, capacity));
        group.values = values;
    }
}

std::size_t bucket_allocated_bytes(const BucketGroup& group, const BucketShape& shape) noexcept {
    if (group.quotients == nullptr && group.values == nullptr) return 0;
    if (shape.variant == BucketVariant::single) {
        return quotient_bytes(group.capacity, shape.quotient_width) + value_alloc_bytes(shape, group.capacity);
    }
    return quotient_alloc_bytes(shape, group.capacity) + value_alloc_bytes(shape, group.capacity);
}

} // namespace sepchain
