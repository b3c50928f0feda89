// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "interp.hpp"
#include "synth.hpp"
#include "wasm_binary.hpp"
#include <chrono>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace wsopt
{
class config_error : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct PipelineConfig
{
    std::vector<synth_mode> modes{synth_mode::enumerative};
    std::chrono::milliseconds timeout{5000};
    std::optional<SolverConfig> solver;
    uint64_t fold_fuel = default_fold_fuel;
    bool probabilistic = false;
    uint64_t seed = 1;
    uint64_t work_budget = SynthConfig{}.work_budget;

    /// Throws config_error when neither a solver nor probabilistic mode is set.
    void validate() const;
    SynthConfig synth_config(synth_mode mode) const;
    /// Short identifier such as "enumerative" or "constants+max2".
    std::string id() const;
};

struct ReplacementRecord
{
    uint32_t function = 0;
    size_t region_begin = 0;
    NodeId root = 0;
    std::string lhs;
    std::string rhs;
    uint64_t lhs_cost = 0;
    uint64_t rhs_cost = 0;
    std::string engine;
    std::string verdict;
    bool applied = false;
    bool discarded = false;
    double elapsed_ms = 0;
};

struct FunctionReport
{
    uint32_t index = 0;
    std::string name;
    uint64_t instructions_before = 0;
    uint64_t instructions_after = 0;
    uint64_t candidates_found = 0;
    uint64_t replacements_proven = 0;
    uint64_t replacements_applied = 0;
    uint64_t replacements_discarded = 0;
    bool folded = false;
    /// Why lifting skipped the function, empty when it did not.
    std::string skipped;
    double elapsed_ms = 0;
};

struct Report
{
    std::string config;
    uint64_t seed = 0;
    std::string solver;
    bool probabilistic = false;

    std::string module;
    uint64_t code_section_bytes_before = 0;
    uint64_t code_section_bytes_after = 0;
    uint64_t instructions_before = 0;
    uint64_t instructions_after = 0;
    double relative_size = 1.0;
    double elapsed_ms = 0;

    std::vector<FunctionReport> functions;
    std::vector<ReplacementRecord> replacements;

    uint64_t applied() const noexcept;
    uint64_t proven() const noexcept;
    uint64_t discarded() const noexcept;
    uint64_t candidates() const noexcept;

    /// `with_timing = false` drops every elapsed_ms field.
    nlohmann::json to_json(bool with_timing = true) const;
};

struct OptimizeResult
{
    WasmModule module;
    Report report;
};

/// Runs the pipeline once per configured mode and keeps the smallest result
/// (ties: fewer applied replacements, then mode order).
OptimizeResult superoptimize_module(const WasmModule& m, const PipelineConfig& cfg,
    SynthCache* cache = nullptr);

/// Runs the pipeline with one synthesis mode.
OptimizeResult superoptimize_module(const WasmModule& m, const PipelineConfig& cfg,
    synth_mode mode, SynthCache* cache = nullptr);

struct CorpusTest
{
    std::string export_name;
    std::vector<uint64_t> args;
    /// Expected results, or the expected trap cause.
    std::optional<std::vector<uint64_t>> expect;
    std::optional<std::string> trap;
};

struct CorpusEntry
{
    std::string name;
    std::string description;
    bytes wasm;
    std::vector<CorpusTest> tests;
};

/// Reads `<name>.wasm` with an optional `<name>.json` test file for every wasm
/// file in `dir`, sorted by name. Unreadable entries are reported in `errors`.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir,
    std::vector<std::string>* errors = nullptr);
std::vector<CorpusTest> parse_tests(const nlohmann::json& j);

struct TestResult
{
    enum class status
    {
        pass,
        fail,
        skipped,
    };
    std::string name;
    status s = status::pass;
    std::string detail;
};

std::string_view to_string(TestResult::status s) noexcept;

/// Executes every test on both modules. A test passes iff both outcomes are
/// identical and match its expectation; Unsupported on either side skips it.
std::vector<TestResult> differential_check(const WasmModule& original,
    const WasmModule& optimized, const std::vector<CorpusTest>& tests,
    uint64_t fuel = default_fold_fuel);

struct CorpusRow
{
    std::string name;
    std::string best_config;
    uint64_t instructions_before = 0;
    uint64_t instructions_after = 0;
    double relative_size = 1.0;
    uint64_t applied = 0;
    bool folded = false;
    /// Differential results summed over every configuration.
    uint64_t tests_passed = 0;
    uint64_t tests_failed = 0;
    uint64_t tests_skipped = 0;
    /// Function-level guard violations (after > before) over every configuration.
    uint64_t regressions = 0;
    std::vector<Report> per_config;
};

struct CorpusReport
{
    std::vector<CorpusRow> rows;
    std::vector<std::string> errors;
    double median_relative_reduction = 0;
    uint64_t improved = 0;
    uint64_t regressed = 0;

    nlohmann::json to_json(bool with_timing = true) const;
    std::string table() const;
};

/// Runs every mode of `cfg` separately on every entry and keeps the best per entry.
CorpusReport run_corpus(const std::filesystem::path& dir, const PipelineConfig& cfg);
CorpusReport run_corpus(const std::vector<CorpusEntry>& entries, const PipelineConfig& cfg);

/// Text dump of every lifted region of every function.
std::string dump_module_ir(const WasmModule& m);

/// Command-line entry point.
int cli_main(int argc, char** argv);
}  // namespace wsopt
