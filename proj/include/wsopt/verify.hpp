// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dataflow.hpp"
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsopt
{
/// Values for the evaluation inputs of a graph (see `eval_inputs`), in order.
struct TestVector
{
    std::vector<uint64_t> values;

    friend bool operator==(const TestVector&, const TestVector&) = default;
};

struct Verdict
{
    enum class tag
    {
        proven,
        refuted,
        passed_tests,
        unknown,
    };

    tag t = tag::unknown;
    /// Distinguishing input (refuted only).
    TestVector counterexample;
    /// Number of vectors checked (passed_tests only).
    uint64_t tests = 0;
    std::string reason;

    static Verdict proven() { return {tag::proven, {}, 0, {}}; }
    static Verdict refuted(TestVector tv) { return {tag::refuted, std::move(tv), 0, {}}; }
    static Verdict passed(uint64_t n) { return {tag::passed_tests, {}, n, {}}; }
    static Verdict unknown(std::string why) { return {tag::unknown, {}, 0, std::move(why)}; }

    bool accepted(bool probabilistic) const noexcept
    {
        return t == tag::proven || (probabilistic && t == tag::passed_tests);
    }
};

std::string to_string(const Verdict& v);

struct SolverConfig
{
    /// Shell command reading SMT-LIB2 on stdin. `{timeout}` is replaced by the
    /// per-query timeout in whole seconds.
    std::string command = "z3 -in -T:{timeout}";
    std::chrono::milliseconds timeout{2000};
    /// Receives every query and answer verbatim when set.
    std::function<void(std::string_view)> debug_log;
};

/// Solver template from WSOPT_SOLVER, if set and non-empty.
std::optional<SolverConfig> solver_from_env();

class eval_error : public std::runtime_error
{
public:
    enum class kind
    {
        uncovered_input,
        trap,
    };
    eval_error(kind k, const std::string& what) : std::runtime_error{what}, m_kind{k} {}
    kind error_kind() const noexcept { return m_kind; }

private:
    kind m_kind;
};

/// Input nodes that take their value from a TestVector: Var nodes and Opaque
/// nodes without operands. Pinned producers are evaluated from their operands.
std::vector<NodeId> eval_inputs(const DfGraph& g);
std::vector<unsigned> input_widths(const DfGraph& g);

/// Applies one operation to operands of `operand_width`; `c` is the select
/// condition. Throws eval_error for a trapping div/rem.
uint64_t eval_op(op_tag op, unsigned operand_width, uint64_t a, uint64_t b, uint64_t c,
    unsigned out_width);

/// Value of `root` under `tv`, masked to the node's width. Throws eval_error on
/// an uncovered input or when a pinned div/rem traps.
uint64_t eval_node(const DfGraph& g, NodeId root, const TestVector& tv);
/// Values of every node reachable from the outputs (others are 0).
std::vector<uint64_t> eval_graph(const DfGraph& g, const TestVector& tv);

/// Interesting values at `width`: 0, 1, -1, min, max, 0x55.., 0xAA.., 1<<0..7
/// and +-2^k for k in {8, 15, 16, 30, 31} below the width. Deduplicated.
std::vector<uint64_t> corner_values(unsigned width);
/// Cartesian product of per-input corner values; evenly subsampled when it
/// exceeds `cap`.
std::vector<TestVector> corner_vectors(std::span<const unsigned> widths, size_t cap = 4096);
std::vector<TestVector> random_vectors(std::span<const unsigned> widths, size_t n, uint64_t seed);

/// Checks two expression graphs over the same inputs on the corner set plus
/// `n_random` seeded vectors.
Verdict verify_testing(const DfGraph& lhs, const DfGraph& rhs, size_t n_random, uint64_t seed);

class smt_error : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// SMT-LIB2 QF_BV query that is satisfiable iff the two graphs differ.
/// Throws smt_error (UnsupportedNode) for an opaque node in `rhs`.
std::string emit_smt(const DfGraph& lhs, const DfGraph& rhs);

/// Runs the external solver. Spawn failures, protocol errors and timeouts map to
/// Unknown; sat models are re-checked with eval_node before Refuted is returned.
Verdict verify_smt(const DfGraph& lhs, const DfGraph& rhs, const SolverConfig& sc);

/// Same graph at another bit width, for exhaustive narrow checks. Constants 0, 1,
/// -1, min, max and width-1 map to their counterparts; other constants are
/// truncated. Absent for graphs using extend or wrap.
std::optional<DfGraph> reparameterize(const DfGraph& g, unsigned width);
}  // namespace wsopt
