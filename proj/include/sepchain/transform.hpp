#pragma once

#include <cstdint>
#include <variant>
#include <vector>

namespace sepchain {

//! mask with the lowest `bits` bits set (bits in 0..64)
constexpr std::uint64_t low_mask(unsigned bits) noexcept {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

/// x -> x XOR (x * 2^shift mod 2^k). A positive shift moves bits to the left,
/// a negative one to the right. Self-inverse whenever |shift| > floor(k/2).
std::uint64_t xorshift_apply(std::uint64_t x, int shift, unsigned key_bits) noexcept;

//! x -> c*x mod 2^k
std::uint64_t mul_apply(std::uint64_t x, std::uint64_t c, unsigned key_bits) noexcept;

/// Inverse of the odd constant `c` modulo 2^k, found with the extended
/// Euclidean algorithm. Throws ConfigError for even or out-of-range `c`.
std::uint64_t mul_inverse_constant(std::uint64_t c, unsigned key_bits);

//! true iff `shift` makes xorshift_apply self-inverse on k-bit integers
bool valid_xorshift(int shift, unsigned key_bits) noexcept;

struct Xorshift {
    int shift;
};

struct Multiply {
    std::uint64_t constant;
    std::uint64_t inverse = 0; //! filled in by TransformSpec
};

using TransformStage = std::variant<Xorshift, Multiply>;

/**
 * A bijection on [0, 2^k) composed of self-inverse xorshifts and odd multiplications.
 * Immutable after construction.
 */
class TransformSpec {
   public:
    /// Validates every stage and precomputes the inverse of every multiplier.
    TransformSpec(unsigned key_bits, std::vector<TransformStage> stages);

    //! zero stages: forward and backward are the identity
    static TransformSpec identity(unsigned key_bits);

    /// Three (xorshift, multiply) pairs with right shifts of just over k/2 bits.
    /// Seed 0 selects the frozen constants kDefaultMultipliers; any other seed
    /// derives odd constants from splitmix64(seed).
    static TransformSpec standard(unsigned key_bits, std::uint64_t seed = 0);

    static constexpr std::uint64_t kDefaultMultipliers[3] = {
        0x975661c369c1754dULL,
        0x527e995125ccca75ULL,
        0x0bfed3d0e34e5e85ULL,
    };

    std::uint64_t forward(std::uint64_t key) const;
    std::uint64_t backward(std::uint64_t code) const;

    unsigned key_bits() const noexcept { return m_key_bits; }
    //! bits needed to represent every code; equals key_bits for a bijection
    unsigned code_bits() const noexcept { return m_key_bits; }
    std::uint64_t max_key() const noexcept { return low_mask(m_key_bits); }
    const std::vector<TransformStage>& stages() const noexcept { return m_stages; }

   private:
    unsigned m_key_bits;
    std::vector<TransformStage> m_stages;
};

//! a transformed code split into the bucket index (remainder) and the stored part (quotient)
struct CodePair {
    std::uint64_t quotient;
    std::uint64_t remainder;

    friend bool operator==(const CodePair&, const CodePair&) = default;
};

/// remainder = code mod bucket_count, quotient = code div bucket_count.
/// Throws ConfigError unless bucket_count is a power of two.
CodePair split(std::uint64_t code, std::uint64_t bucket_count);

/// Inverse of split. Throws DomainError if pair.remainder >= bucket_count.
std::uint64_t compose(const CodePair& pair, std::uint64_t bucket_count);

//! split/compose with the bucket count given as its logarithm (0..64)
constexpr CodePair split_bits(std::uint64_t code, unsigned bucket_bits) noexcept {
    return {bucket_bits >= 64 ? 0 : code >> bucket_bits, code & low_mask(bucket_bits)};
}
constexpr std::uint64_t compose_bits(const CodePair& pair, unsigned bucket_bits) noexcept {
    return (bucket_bits >= 64 ? 0 : pair.quotient << bucket_bits) | pair.remainder;
}

//! the splitmix64 finalizer; the mixing hash h of the plain variant
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace sepchain
