// Self-verifying micro-benchmark of CompactTable. Appends one CSV row per run.

#include "sepchain/bench.hpp"
#include "sepchain/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    using namespace sepchain;

    CLI::App app{"hash table micro-benchmark with allocation accounting"};
    std::string op = "insert";
    std::string variant = "cht";
    std::string policy = "inc";
    std::uint64_t reserve = 0;
    bench::BenchConfig config;

    app.add_option("--op", op, "insert|query-hit|query-miss|erase|distinct|reserved")->capture_default_str();
    app.add_option("--variant", variant, "cht|vec|single|plain")->capture_default_str();
    app.add_option("--policy", policy, "inc|half")->capture_default_str();
    app.add_option("--n", config.n, "number of operations")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seed", config.seed, "workload seed")->capture_default_str();
    app.add_option("--reserve", reserve, "buckets to reserve before inserting (power of two)");
    app.add_option("--value-bytes", config.value_bytes, "bytes per value")->capture_default_str()->check(CLI::Range(0, 8));
    app.add_option("--reps", config.repetitions, "timed repetitions, the median is reported")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--warmup", config.warmup, "untimed repetitions")->capture_default_str();
    app.add_option("--csv", config.output_path, "CSV file to append to, - for stdout")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        config.op = bench::parse_op(op);
        config.variant = parse_variant(variant);
        config.policy = parse_policy(policy);
        if (app.count("--reserve") > 0) config.reserve_buckets = reserve;

        const bench::BenchRecord record = bench::run(config);
        bench::write_csv(config.output_path, record);
        if (config.output_path != "-") std::cerr << bench::csv_row(record) << '\n';
    } catch (const CorrectnessError& e) {
        std::cerr << "correctness failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
