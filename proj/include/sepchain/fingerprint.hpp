#pragma once

#include "sepchain/table.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sepchain {

//! MurmurHash64A of Austin Appleby, little-endian reads
std::uint64_t murmur_hash64a(std::string_view data, std::uint64_t seed = 0x8445d61a4e774912ULL);

/**
 * Set of words stored as their fingerprints: the lowest `fingerprint_bits`
 * bits of murmur_hash64a. Never reports an inserted word as absent; reports
 * another word as present iff its fingerprint collides with an inserted one.
 * Widths below 64 make collisions easy to construct.
 */
class FingerprintDict {
   public:
    explicit FingerprintDict(unsigned fingerprint_bits = 64, TableOptions options = {});

    std::uint64_t fingerprint(std::string_view word) const noexcept;
    //! returns true if the fingerprint was new
    bool insert(std::string_view word);
    bool contains(std::string_view word) const;

    std::uint64_t size() const noexcept { return m_table.size(); }
    unsigned fingerprint_bits() const noexcept { return m_bits; }
    const CompactTable& table() const noexcept { return m_table; }

   private:
    unsigned m_bits;
    CompactTable m_table;
};

FingerprintDict fingerprint_build(const std::vector<std::string>& words, unsigned fingerprint_bits = 64,
                                  TableOptions options = {});
inline bool fingerprint_query(const FingerprintDict& dict, std::string_view word) { return dict.contains(word); }

enum class Delimiter { newline, space };
//! accepts newline|space
Delimiter parse_delimiter(std::string_view name);

/// Splits text into non-empty words. newline: one word per line, a trailing
/// carriage return is dropped. space: words separated by any whitespace.
std::vector<std::string> split_words(std::string_view text, Delimiter delimiter);
//! reads a whole file and splits it; throws std::runtime_error on I/O errors
std::vector<std::string> read_words(const std::string& path, Delimiter delimiter);

} // namespace sepchain
