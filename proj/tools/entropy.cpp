// Order-k empirical entropy of a file, streamed in chunks.

#include "sepchain/errors.hpp"
#include "sepchain/kmer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    using namespace sepchain;

    CLI::App app{"order-k empirical entropy with variable-width k-mer counters"};
    std::string input;
    std::string csv_path;
    unsigned order = 0;
    std::uint64_t max_bytes = std::numeric_limits<std::uint64_t>::max();
    std::string variant = "cht";
    std::string policy = "inc";
    app.add_option("--input", input, "file to analyse")->required()->check(CLI::ExistingFile);
    app.add_option("--order", order, "context length k")->required()->check(CLI::Range(0, 7));
    app.add_option("--max-bytes", max_bytes, "read at most this many bytes");
    app.add_option("--csv", csv_path, "CSV file to append to, - for stdout")->required();
    app.add_option("--variant", variant, "cht|vec|single|plain")->capture_default_str();
    app.add_option("--policy", policy, "inc|half")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        TableOptions options;
        options.variant = parse_variant(variant);
        options.policy = parse_policy(policy);
        options.ledger = std::make_shared<AllocLedger>();

        const auto start = std::chrono::steady_clock::now();
        std::ifstream in(input, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open '" + input + "'");

        KmerCounter windows(order + 1, options);
        std::vector<char> chunk(std::size_t{1} << 20);
        std::uint64_t read_total = 0;
        while (read_total < max_bytes && in) {
            const auto wanted = static_cast<std::streamsize>(std::min<std::uint64_t>(chunk.size(), max_bytes - read_total));
            in.read(chunk.data(), wanted);
            const auto got = static_cast<std::size_t>(in.gcount());
            if (got == 0) break;
            windows.feed({reinterpret_cast<const std::uint8_t*>(chunk.data()), got});
            read_total += got;
        }
        if (in.bad()) throw std::runtime_error("failed reading '" + input + "'");
        if (read_total <= order) {
            std::cerr << "warning: input has " << read_total << " bytes, too short for order " << order << '\n';
            throw DomainError("input too short");
        }

        const EntropyReport report = entropy_from_counter(windows, order, read_total, options);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        char row[256];
        std::snprintf(row, sizeof(row), "%u,%llu,%llu,%.12f,%zu,%.6f", order, static_cast<unsigned long long>(read_total),
                      static_cast<unsigned long long>(report.distinct_windows), report.bits_per_symbol,
                      options.ledger->peak(), seconds);
        const char* header = "order,input_bytes,distinct_kmers,entropy_bits_per_symbol,bytes_allocated,seconds_total";
        if (csv_path == "-") {
            std::cout << header << '\n' << row << '\n';
        } else {
            std::error_code ec;
            const bool fresh = !std::filesystem::exists(csv_path, ec) || std::filesystem::file_size(csv_path, ec) == 0;
            std::ofstream out(csv_path, std::ios::app);
            if (!out) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
            if (fresh) out << header << '\n';
            out << row << '\n';
            std::cerr << row << '\n';
        }
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << " (limit the input with --max-bytes)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
