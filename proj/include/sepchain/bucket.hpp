#pragma once

#include "sepchain/memtrack.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace sepchain {

//! largest number of elements a bucket holds; its size fits in one byte
inline constexpr std::size_t kMaxBucketSize = 255;

//! alignment of vec quotient storage, matching 256-bit vector loads
inline constexpr std::size_t kVecAlignment = 32;

enum class BucketVariant {
    cht,    //! quotients bit-compact in k - lg|H| bits
    vec,    //! quotients quantized to 8/16/32/64 bits in aligned storage, SIMD scan
    single, //! bit-compact quotients followed by all values in one allocation
    plain,  //! full keys, no quotienting
};

enum class GrowthPolicy {
    incremental,   //! grow to exactly the needed size
    half_increase, //! grow by 50%
};

std::string_view to_string(BucketVariant variant) noexcept;
std::string_view to_string(GrowthPolicy policy) noexcept;
//! accepts cht|vec|single|plain; throws ConfigError otherwise
BucketVariant parse_variant(std::string_view name);
//! accepts inc|half; throws ConfigError otherwise
GrowthPolicy parse_policy(std::string_view name);

/**
 * Header of one chain. The quotient and value storages are separate
 * allocations (except for the single variant, which keeps everything behind
 * `quotients`). Packed so that a header costs 18 bytes: the size byte and the
 * two handles, plus one byte for the capacity.
 */
#pragma pack(push, 1)
struct BucketGroup {
    std::uint8_t size = 0;
    std::uint8_t capacity = 0;
    std::byte* quotients = nullptr;
    std::byte* values = nullptr;
};
#pragma pack(pop)
static_assert(sizeof(BucketGroup) == 18);

//! layout parameters shared by all buckets of a table
struct BucketShape {
    BucketVariant variant = BucketVariant::cht;
    GrowthPolicy policy = GrowthPolicy::incremental;
    unsigned quotient_width = 0; //! bits per stored quotient slot
    unsigned value_bytes = 0;    //! bytes per value, 0..8
};

/// Slot width a variant uses to store quotients of `logical_width` bits:
/// cht/single store them as is, vec rounds up to 8/16/32/64, plain stores
/// whole keys (`key_bits`).
unsigned storage_width(BucketVariant variant, unsigned logical_width, unsigned key_bits) noexcept;

//! bytes of quotient storage for `capacity` slots, quantized at whole bytes
constexpr std::size_t quotient_bytes(std::size_t capacity, unsigned width) noexcept {
    return (capacity * width + 7) / 8;
}

// --- quotient codec: slot i occupies bits [i*w, (i+1)*w), little-endian -----

std::uint64_t quotient_get(std::span<const std::byte> storage, std::size_t index, unsigned width) noexcept;
//! throws DomainError if value >= 2^width
void quotient_set(std::span<std::byte> storage, std::size_t index, unsigned width, std::uint64_t value);

// --- scans -------------------------------------------------------------------

//! slot-by-slot comparison; any width 0..64
std::optional<std::size_t> scan_scalar(std::span<const std::byte> storage, std::size_t size, std::uint64_t quotient,
                                       unsigned width) noexcept;

/// Compares floor(64/width) quotients per 64-bit word with a broadcast copy
/// of the probe and a SWAR zero-field test. Requires 1 <= width <= 32.
std::optional<std::size_t> scan_packed(std::span<const std::byte> storage, std::size_t size, std::uint64_t quotient,
                                       unsigned width);

enum class VectorBackend { scalar, sse2, avx2 };

std::string_view to_string(VectorBackend backend) noexcept;
//! best backend supported by the running CPU
VectorBackend active_vector_backend() noexcept;
bool vector_backend_supported(VectorBackend backend) noexcept;

/// Hardware compare of byte-quantized quotients (width 8, 16, 32 or 64) with
/// the best backend available; falls back to a scalar loop without SIMD.
std::optional<std::size_t> scan_vector(std::span<const std::byte> storage, std::size_t size, std::uint64_t quotient,
                                       unsigned width);
//! same with an explicit backend; throws ConfigError if the CPU lacks it
std::optional<std::size_t> scan_vector(VectorBackend backend, std::span<const std::byte> storage, std::size_t size,
                                       std::uint64_t quotient, unsigned width);

// --- growth ------------------------------------------------------------------

/// Capacity to grow to for holding `needed` elements: exactly `needed` for
/// incremental, min(bmax, max(needed, current*3/2, current+1)) for half_increase.
/// Returns nullopt if needed > bmax (the caller has to enlarge the table).
std::optional<std::size_t> grow_capacity(std::size_t current, std::size_t needed, GrowthPolicy policy) noexcept;

// --- bucket operations ---------------------------------------------------------

std::span<const std::byte> quotient_span(const BucketGroup& group, const BucketShape& shape) noexcept;
std::uint64_t bucket_quotient(const BucketGroup& group, const BucketShape& shape, std::size_t index) noexcept;
std::uint64_t bucket_value(const BucketGroup& group, const BucketShape& shape, std::size_t index) noexcept;
void bucket_set_value(BucketGroup& group, const BucketShape& shape, std::size_t index, std::uint64_t value) noexcept;

//! position of `quotient` using the fastest scan the variant supports
std::optional<std::size_t> bucket_find(const BucketGroup& group, const BucketShape& shape, std::uint64_t quotient);

/// Appends (quotient, value), growing the storage per the policy. Returns
/// false (and changes nothing) if the bucket already holds bmax elements.
[[nodiscard]] bool bucket_insert(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger,
                                 std::uint64_t quotient, std::uint64_t value);

//! moves the last element into `index` and shrinks the size by one; capacity is kept
void bucket_remove(BucketGroup& group, const BucketShape& shape, std::size_t index);

//! allocates room for exactly `capacity` elements in an empty bucket
void bucket_reserve(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger, std::size_t capacity);

//! frees all storage and resets the header
void bucket_release(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger) noexcept;

//! rewrites the value storage with `new_value_bytes` per value, preserving all values
void bucket_rewrite_values(BucketGroup& group, const BucketShape& shape, AllocLedger& ledger, unsigned new_value_bytes);

//! bytes the bucket has requested from its ledger
std::size_t bucket_allocated_bytes(const BucketGroup& group, const BucketShape& shape) noexcept;

} // namespace sepchain
