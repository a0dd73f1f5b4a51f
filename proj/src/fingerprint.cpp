#include "sepchain/fingerprint.hpp"

#include "sepchain/errors.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sepchain {

std::uint64_t murmur_hash64a(std::string_view data, std::uint64_t seed) {
    constexpr std::uint64_t m = 0xc6a4a7935bd1e995ULL;
    constexpr int r = 47;
    const std::size_t len = data.size();
    std::uint64_t h = seed ^ (len * m);

    const char* p = data.data();
    const char* const end = p + len / 8 * 8;
    for (; p != end; p += 8) {
        std::uint64_t k;
        std::memcpy(&k, p, 8);
        k *= m;
        k ^= k >> r;
        k *= m;
        h ^= k;
        h *= m;
    }

    const auto byte = [&](int i) { return std::uint64_t{static_cast<unsigned char>(p[i])}; };
    switch (len & 7) {
        case 7: h ^= byte(6) << 48; [[fallthrough]];
        case 6: h ^= byte(5) << 40; [[fallthrough]];
        case 5: h ^= byte(4) << 32; [[fallthrough]];
        case 4: h ^= byte(3) << 24; [[fallthrough]];
        case 3: h ^= byte(2) << 16; [[fallthrough]];
        case 2: h ^= byte(1) << 8; [[fallthrough]];
        case 1:
            h ^= byte(0);
            h *= m;
    }

    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
}

namespace {

TableConfig dict_config(unsigned bits, const TableOptions& options) {
    if (bits < 1 || bits > 64) throw ConfigError("fingerprints have 1 to 64 bits, got " + std::to_string(bits));
    TableConfig config;
    config.key_bits = bits <= 32 ? 32 : 64;
    config.variant = options.variant;
    config.policy = options.policy;
    config.value_bytes = 0;
    config.ledger = options.ledger;
    return config;
}

} // namespace

FingerprintDict::FingerprintDict(unsigned fingerprint_bits, TableOptions options)
    : m_bits(fingerprint_bits), m_table(dict_config(fingerprint_bits, options)) {}

std::uint64_t FingerprintDict::fingerprint(std::string_view word) const noexcept {
    return murmur_hash64a(word) & low_mask(m_bits);
}

bool FingerprintDict::insert(std::string_view word) { return !m_table.insert(fingerprint(word)).has_value(); }

bool FingerprintDict::contains(std::string_view word) const { return m_table.contains(fingerprint(word)); }

FingerprintDict fingerprint_build(const std::vector<std::string>& words, unsigned fingerprint_bits, TableOptions options) {
    FingerprintDict dict(fingerprint_bits, std::move(options));
    for (const auto& word : words) dict.insert(word);
    return dict;
}

Delimiter parse_delimiter(std::string_view name) {
    if (name == "newline") return Delimiter::newline;
    if (name == "space") return Delimiter::space;
    throw ConfigError("unknown delimiter '" + std::string(name) + "', expected newline or space");
}

std::vector<std::string> split_words(std::string_view text, Delimiter delimiter) {
    std::vector<std::string> words;
    if (delimiter == Delimiter::newline) {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t stop = text.find('\n', start);
            if (stop == std::string_view::npos) stop = text.size();
            std::string_view line = text.substr(start, stop - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty()) words.emplace_back(line);
            start = stop + 1;
        }
    } else {
        std::istringstream in{std::string(text)};
        for (std::string word; in >> word;) words.push_back(std::move(word));
    }
    return words;
}

std::vector<std::string> read_words(const std::string& path, Delimiter delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open word list '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw std::runtime_error("failed reading word list '" + path + "'");
    return split_words(buffer.str(), delimiter);
}

} // namespace sepchain
