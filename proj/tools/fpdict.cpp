// Keyword dictionary of 64-bit fingerprints.
//
//   fpdict build --wordlist words.txt
//   fpdict query --wordlist words.txt [--queries probes.txt]
//
// The dictionary is not persisted; query rebuilds it from the word list and
// probes every query word (the word list itself by default). Exits with 3 if
// an inserted word is reported missing.

#include "sepchain/fingerprint.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <string>
#include <unordered_set>

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

int main(int argc, char** argv) {
    using namespace sepchain;

    CLI::App app{"keyword fingerprint dictionary"};
    app.require_subcommand(1);
    std::string wordlist;
    std::string queries;
    std::string delimiter = "newline";
    std::string variant = "cht";
    unsigned bits = 64;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--wordlist", wordlist, "words to insert")->required()->check(CLI::ExistingFile);
        sub->add_option("--delimiter", delimiter, "newline|space")->capture_default_str();
        sub->add_option("--variant", variant, "cht|vec|single|plain")->capture_default_str();
        sub->add_option("--bits", bits, "fingerprint width")->capture_default_str()->check(CLI::Range(1, 64));
    };
    CLI::App* build = app.add_subcommand("build", "build the dictionary and verify every word");
    add_common(build);
    CLI::App* query = app.add_subcommand("query", "build the dictionary and probe a query list");
    add_common(query);
    query->add_option("--queries", queries, "words to look up (default: the word list)")->check(CLI::ExistingFile);
    CLI11_PARSE(app, argc, argv);

    try {
        const Delimiter delim = parse_delimiter(delimiter);
        TableOptions options;
        options.variant = parse_variant(variant);
        options.ledger = std::make_shared<AllocLedger>();

        const auto words = read_words(wordlist, delim);
        auto start = std::chrono::steady_clock::now();
        const FingerprintDict dict = fingerprint_build(words, bits, options);
        const double build_seconds = seconds_since(start);
        std::cout << "words " << words.size() << " fingerprints " << dict.size() << " bytes "
                  << options.ledger->current() << " build_seconds " << build_seconds << '\n';

        const std::unordered_set<std::string> members(words.begin(), words.end());
        const auto probes = queries.empty() ? words : read_words(queries, delim);
        std::uint64_t hits = 0;
        std::uint64_t false_negatives = 0;
        std::uint64_t false_positives = 0;
        start = std::chrono::steady_clock::now();
        for (const auto& word : probes) {
            const bool found = dict.contains(word);
            hits += found;
            const bool member = members.contains(word);
            false_negatives += member && !found;
            false_positives += !member && found;
        }
        const double query_seconds = seconds_since(start);
        std::cout << "queries " << probes.size() << " hits " << hits << " false_negatives " << false_negatives
                  << " false_positives " << false_positives << " query_seconds " << query_seconds << '\n';
        if (false_negatives != 0) {
            std::cerr << "error: " << false_negatives << " inserted words were not found\n";
            return 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
