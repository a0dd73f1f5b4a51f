#include "sepchain/transform.hpp"

#include "sepchain/errors.hpp"

#include <bit>
#include <cstdlib>
#include <string>

namespace sepchain {

namespace {

void check_key_bits(unsigned key_bits) {
    if (key_bits < 1 || key_bits > 64) {
        throw ConfigError("key width must be within 1..64 bits, got " + std::to_string(key_bits));
    }
}

} // namespace

std::uint64_t xorshift_apply(std::uint64_t x, int shift, unsigned key_bits) noexcept {
    const std::uint64_t mask = low_mask(key_bits);
    const unsigned amount = static_cast<unsigned>(std::abs(shift));
    if (amount >= 64) return x & mask;
    const std::uint64_t moved = shift > 0 ? (x << amount) : (x >> amount);
    return (x ^ moved) & mask;
}

std::uint64_t mul_apply(std::uint64_t x, std::uint64_t c, unsigned key_bits) noexcept {
    return (c * x) & low_mask(key_bits);
}

bool valid_xorshift(int shift, unsigned key_bits) noexcept {
    const int k = static_cast<int>(key_bits);
    const int half = k / 2;
    return (shift > half && shift <= k) || (shift < -half && shift >= -k);
}

std::uint64_t mul_inverse_constant(std::uint64_t c, unsigned key_bits) {
    check_key_bits(key_bits);
    if ((c & 1) == 0 || c > low_mask(key_bits)) {
        throw ConfigError("multiplier must be odd and below 2^" + std::to_string(key_bits) + ", got " + std::to_string(c));
    }
    // invariant: old_r == old_s * c (mod 2^k) and r == s * c (mod 2^k)
    using wide = __int128;
    const wide modulus = wide{1} << key_bits;
    wide old_r = modulus, r = c;
    wide old_s = 0, s = 1;
    while (r != 0) {
        const wide q = old_r / r;
        const wide next_r = old_r - q * r;
        old_r = r;
        r = next_r;
        const wide next_s = old_s - q * s;
        old_s = s;
        s = next_s;
    }
    // old_r is gcd(2^k, c) = 1
    wide inverse = old_s % modulus;
    if (inverse < 0) inverse += modulus;
    return static_cast<std::uint64_t>(inverse);
}

TransformSpec::TransformSpec(unsigned key_bits, std::vector<TransformStage> stages)
    : m_key_bits(key_bits), m_stages(std::move(stages)) {
    check_key_bits(key_bits);
    for (auto& stage : m_stages) {
        if (auto* xs = std::get_if<Xorshift>(&stage)) {
            if (!valid_xorshift(xs->shift, key_bits)) {
                throw ConfigError("xorshift by " + std::to_string(xs->shift) + " is not self-inverse on " +
                                  std::to_string(key_bits) + "-bit keys");
            }
        } else {
            auto& mul = std::get<Multiply>(stage);
            mul.inverse = mul_inverse_constant(mul.constant, key_bits);
        }
    }
}

TransformSpec TransformSpec::identity(unsigned key_bits) { return TransformSpec(key_bits, {}); }

TransformSpec TransformSpec::standard(unsigned key_bits, std::uint64_t seed) {
    check_key_bits(key_bits);
    const int k = static_cast<int>(key_bits);
    const int half = k / 2;
    const int offsets[3] = {1, 3, 2};

    std::vector<TransformStage> stages;
    for (int i = 0; i < 3; ++i) {
        const int amount = std::min(k, half + offsets[i]);
        std::uint64_t c = kDefaultMultipliers[i];
        if (seed != 0) c = mix64(seed + static_cast<std::uint64_t>(i + 1) * 0x9e3779b97f4a7c15ULL);
        c = (c | 1) & low_mask(key_bits);
        stages.emplace_back(Xorshift{-amount});
        stages.emplace_back(Multiply{c});
    }
    return TransformSpec(key_bits, std::move(stages));
}

std::uint64_t TransformSpec::forward(std::uint64_t key) const {
    if (key > max_key()) {
        throw DomainError("key " + std::to_string(key) + " exceeds " + std::to_string(m_key_bits) + " bits");
    }
    std::uint64_t x = key;
    for (const auto& stage : m_stages) {
        if (const auto* xs = std::get_if<Xorshift>(&stage)) {
            x = xorshift_apply(x, xs->shift, m_key_bits);
        } else {
            x = mul_apply(x, std::get<Multiply>(stage).constant, m_key_bits);
        }
    }
    return x;
}

std::uint64_t TransformSpec::backward(std::uint64_t code) const {
    if (code > max_key()) {
        throw DomainError("code " + std::to_string(code) + " exceeds " + std::to_string(m_key_bits) + " bits");
    }
    std::uint64_t x = code;
    for (auto it = m_stages.rbegin(); it != m_stages.rend(); ++it) {
        if (const auto* xs = std::get_if<Xorshift>(&*it)) {
            x = xorshift_apply(x, xs->shift, m_key_bits);
        } else {
            x = mul_apply(x, std::get<Multiply>(*it).inverse, m_key_bits);
        }
    }
    return x;
}

CodePair split(std::uint64_t code, std::uint64_t bucket_count) {
    if (!std::has_single_bit(bucket_count)) {
        throw ConfigError("bucket count must be a power of two, got " + std::to_string(bucket_count));
    }
    return split_bits(code, static_cast<unsigned>(std::countr_zero(bucket_count)));
}

std::uint64_t compose(const CodePair& pair, std::uint64_t bucket_count) {
    if (!std::has_single_bit(bucket_count)) {
        throw ConfigError("bucket count must be a power of two, got " + std::to_string(bucket_count));
    }
    if (pair.remainder >= bucket_count) {
        throw DomainError("remainder " + std::to_string(pair.remainder) + " does not address one of " +
                          std::to_string(bucket_count) + " buckets");
    }
    return compose_bits(pair, static_cast<unsigned>(std::countr_zero(bucket_count)));
}

} // namespace sepchain
