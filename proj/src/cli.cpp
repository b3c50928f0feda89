// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/driver.hpp"
#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>

namespace wsopt
{
namespace
{
bytes read_binary(const std::string& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw std::runtime_error("cannot read " + path);
    return bytes{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

void write_binary(const std::string& path, const bytes& data)
{
    std::ofstream out{path, std::ios::binary};
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw std::runtime_error("cannot write " + path);
}

void write_text(const std::string& path, const std::string& text)
{
    if (path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream out{path};
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + path);
}

struct common_options
{
    std::vector<std::string> modes{"enumerative"};
    bool all_modes = false;
    double timeout_s = 5;
    std::string solver;
    unsigned solver_timeout_ms = 2000;
    bool probabilistic = false;
    uint64_t fuel = default_fold_fuel;
    uint64_t seed = 1;
    std::string report;

    void add_to(CLI::App& app)
    {
        app.add_option("--mode", modes,
               "synthesis mode(s): constants, max2, cegis, enumerative or all")
            ->delimiter(',');
        app.add_flag("--all-modes", all_modes, "run every synthesis mode and keep the best");
        app.add_option("--timeout", timeout_s, "synthesis timeout per candidate in seconds")
            ->check(CLI::NonNegativeNumber);
        app.add_option("--solver", solver,
            "SMT solver command reading SMT-LIB2 on stdin ({timeout} expands to seconds)");
        app.add_option("--solver-timeout", solver_timeout_ms, "per-query solver timeout in ms");
        app.add_flag("--probabilistic", probabilistic,
            "accept replacements that pass testing when no proof is available");
        app.add_option("--fuel", fuel, "instruction budget for constant folding");
        app.add_option("--seed", seed, "random seed");
        app.add_option("--report", report, "write a JSON report to this path ('-' for stdout)");
    }

    PipelineConfig config() const
    {
        PipelineConfig cfg;
        cfg.modes.clear();
        if (all_modes || std::find(modes.begin(), modes.end(), "all") != modes.end())
            cfg.modes = {synth_mode::constants, synth_mode::bounded2, synth_mode::cegis,
                synth_mode::enumerative};
        else
        {
            for (const auto& m : modes)
            {
                const auto parsed = parse_synth_mode(m);
                if (!parsed)
                    throw config_error("unknown mode: " + m);
                cfg.modes.push_back(*parsed);
            }
        }
        cfg.timeout = std::chrono::milliseconds{static_cast<int64_t>(timeout_s * 1000)};
        cfg.probabilistic = probabilistic;
        cfg.fold_fuel = fuel;
        cfg.seed = seed;
        if (!solver.empty())
        {
            SolverConfig sc;
            sc.command = solver;
            sc.timeout = std::chrono::milliseconds{solver_timeout_ms};
            cfg.solver = sc;
        }
        else if (auto env = solver_from_env())
        {
            env->timeout = std::chrono::milliseconds{solver_timeout_ms};
            cfg.solver = env;
        }
        cfg.validate();
        return cfg;
    }
};

int run_opt(const std::string& input, const std::string& output, const common_options& opts,
    const std::string& dump_path)
{
    const auto cfg = opts.config();
    const auto m = decode_module(read_binary(input));
    auto res = superoptimize_module(m, cfg);
    res.report.module = input;
    if (!output.empty())
        write_binary(output, encode_module(res.module));
    if (!opts.report.empty())
        write_text(opts.report, res.report.to_json().dump(2) + "\n");
    if (!dump_path.empty())
        write_text(dump_path, dump_module_ir(m));
    std::cerr << input << ": " << res.report.instructions_before << " -> "
              << res.report.instructions_after << " instructions, "
              << res.report.applied() << " replacement(s) applied\n";
    return 0;
}

int run_bench(const std::string& dir, const common_options& opts)
{
    const auto cfg = opts.config();
    const auto rep = run_corpus(dir, cfg);
    std::cout << rep.table();
    if (!opts.report.empty())
        write_text(opts.report, rep.to_json().dump(2) + "\n");
    for (const auto& row : rep.rows)
        if (row.tests_failed > 0)
            return 2;
    return rep.errors.empty() ? 0 : 1;
}

int run_diff(const std::string& a, const std::string& b, const std::string& tests_path,
    uint64_t fuel)
{
    const auto ma = decode_module(read_binary(a));
    const auto mb = decode_module(read_binary(b));
    std::ifstream in{tests_path};
    if (!in)
        throw std::runtime_error("cannot read " + tests_path);
    const auto tests = parse_tests(nlohmann::json::parse(in));
    int failed = 0;
    for (const auto& r : differential_check(ma, mb, tests, fuel))
    {
        std::cout << to_string(r.s) << ' ' << r.name << ": " << r.detail << '\n';
        if (r.s == TestResult::status::fail)
            ++failed;
    }
    return failed ? 2 : 0;
}
}  // namespace

int cli_main(int argc, char** argv)
{
    CLI::App app{"wsopt: a superoptimizer for WebAssembly bytecode"};
    app.require_subcommand(1);

    common_options opt_opts;
    std::string input, output, dump_path;
    auto* opt = app.add_subcommand("opt", "superoptimize a module");
    opt->add_option("input", input, "input .wasm file")->required();
    opt->add_option("-o,--output", output, "output .wasm file");
    opt->add_option("--dump-ir", dump_path, "print the lifted IR (to stdout, or to a path)")
        ->expected(0, 1)
        ->default_str("-");
    opt_opts.add_to(*opt);

    common_options bench_opts;
    std::string corpus_dir;
    auto* bench = app.add_subcommand("bench", "run the corpus benchmark");
    bench->add_option("dir", corpus_dir, "corpus directory")->required();
    bench_opts.add_to(*bench);

    std::string diff_a, diff_b, diff_tests;
    uint64_t diff_fuel = default_fold_fuel;
    auto* diff = app.add_subcommand("diff", "differentially test two modules");
    diff->add_option("original", diff_a)->required();
    diff->add_option("optimized", diff_b)->required();
    diff->add_option("--tests", diff_tests, "JSON test file")->required();
    diff->add_option("--fuel", diff_fuel, "instruction budget per test");

    std::string dump_input;
    auto* dump_cmd = app.add_subcommand("dump-ir", "print the lifted IR of a module");
    dump_cmd->add_option("input", dump_input)->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const auto code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try
    {
        if (*opt)
            return run_opt(input, output, opt_opts, dump_path);
        if (*bench)
            return run_bench(corpus_dir, bench_opts);
        if (*diff)
            return run_diff(diff_a, diff_b, diff_tests, diff_fuel);
        if (*dump_cmd)
        {
            std::cout << dump_module_ir(decode_module(read_binary(dump_input)));
            return 0;
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "wsopt: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
}  // namespace wsopt
