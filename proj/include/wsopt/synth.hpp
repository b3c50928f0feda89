// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dataflow.hpp"
#include "verify.hpp"
#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace wsopt
{
enum class synth_mode
{
    constants,
    bounded2,
    cegis,
    enumerative,
};

std::string_view to_string(synth_mode m) noexcept;
std::optional<synth_mode> parse_synth_mode(std::string_view s) noexcept;

struct SynthConfig
{
    synth_mode mode = synth_mode::enumerative;
    std::chrono::milliseconds timeout{5000};
    /// Upper bound on the lowered RHS length; 2 for bounded2.
    std::optional<unsigned> max_rhs_instructions;
    uint64_t seed = 1;
    /// Accept PassedTests verdicts when no solver is configured.
    bool probabilistic = false;
    std::optional<SolverConfig> solver;
    /// Random vectors used by the testing verifier on top of the corner set.
    size_t test_vectors = 4096;
    /// Deterministic search bound: operation evaluations per candidate. The
    /// search stops with a timeout when either this or `timeout` runs out.
    uint64_t work_budget = 1'500'000;

    static SynthConfig for_mode(synth_mode m);
};

/// A harvested LHS: the cone of `root` in a host graph.
struct Candidate
{
    NodeId root = 0;
    /// The cone as an expression graph over params 0..k-1.
    DfGraph lhs;
    /// Host leaves bound to params, in first-use order.
    std::vector<NodeId> input_vars;
    std::vector<unsigned> widths;
    uint64_t lhs_cost = 0;
    /// Host nodes in the cone, leaves included.
    std::vector<NodeId> cone;
};

/// One candidate per non-leaf, non-constant node of width 32/64 whose cone has
/// between 2 and `max_cone_nodes` nodes. Ordered by descending cost, then id.
std::vector<Candidate> harvest_candidates(const DfGraph& g, size_t max_cone_nodes = 20);

struct Replacement
{
    Candidate candidate;
    DfGraph rhs;
    uint64_t rhs_cost = 0;
    Verdict verdict;
    synth_mode engine = synth_mode::enumerative;
    std::chrono::milliseconds elapsed{0};
    /// Number of verifier invocations that produced a counterexample.
    unsigned iterations = 0;
};

struct SynthResult
{
    std::optional<Replacement> replacement;
    /// Why there is no replacement: "timeout", "no_rhs", "not_constant",
    /// "not_cheaper" or a verifier message.
    std::string reason;
};

class verifier_unavailable : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Decides an equivalence with the configured solver, or with the testing oracle
/// in probabilistic mode. Throws verifier_unavailable otherwise.
Verdict check_equivalence(const DfGraph& lhs, const DfGraph& rhs, const SynthConfig& cfg);

SynthResult synth_constant(const Candidate& c, const SynthConfig& cfg);
SynthResult synth_enumerative(const Candidate& c, const SynthConfig& cfg);
SynthResult synth_cegis(const Candidate& c, const SynthConfig& cfg);

/// Memoizes engine results by mode and LHS text within one run.
class SynthCache
{
public:
    std::optional<SynthResult> find(synth_mode m, const std::string& key) const;
    void store(synth_mode m, const std::string& key, const SynthResult& r);

private:
    mutable std::mutex m_mutex;
    std::map<std::pair<synth_mode, std::string>, SynthResult> m_entries;
};

/// Dispatches on `cfg.mode`.
SynthResult best_replacement(const Candidate& c, const SynthConfig& cfg,
    SynthCache* cache = nullptr);

/// Every grammar program over the inputs of `lhs` with lowered cost <= `max_cost`
/// and the width of its result, without observational pruning or budget.
/// Intended as an exhaustive reference for small costs.
std::vector<DfGraph> enumerate_grammar(const DfGraph& lhs, unsigned max_cost);

/// Constants available to enumeration for a given LHS at `width`.
std::vector<uint64_t> constant_pool(const DfGraph& lhs, unsigned width);
}  // namespace wsopt
