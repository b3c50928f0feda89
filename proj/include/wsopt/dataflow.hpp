// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "module_info.hpp"
#include "wasm_binary.hpp"
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsopt
{
using NodeId = uint32_t;

enum class node_kind : uint8_t
{
    var,
    constant,
    unop,
    binop,
    select,
    opaque,
};

/// Operation tags. The declaration order is the lexicographic order used for
/// tie-breaking between equal-cost replacements.
enum class op_tag : uint8_t
{
    none,
    add,
    sub,
    mul,
    and_,
    or_,
    xor_,
    shl,
    shr_s,
    shr_u,
    rotl,
    rotr,
    eq,
    ne,
    lt_s,
    lt_u,
    gt_s,
    gt_u,
    le_s,
    le_u,
    ge_s,
    ge_u,
    eqz,
    extend_s,
    extend_u,
    wrap,
    select,
    div_s,
    div_u,
    rem_s,
    rem_u,
};

std::string_view to_string(op_tag op) noexcept;
bool is_comparison(op_tag op) noexcept;
bool is_commutative(op_tag op) noexcept;
bool is_trapping(op_tag op) noexcept;

/// Width of the value produced by `op` applied to operands of `operand_width`.
/// Comparisons and eqz produce i32 for the WASM widths; narrower widths (used for
/// exhaustive checking) stay uniform.
unsigned result_width(op_tag op, unsigned operand_width) noexcept;

/// Where a leaf or pinned node comes from.
struct Source
{
    enum class kind : uint8_t
    {
        none,
        local,        ///< value of a local at region entry
        stack_slot,   ///< operand-stack value at region entry, 0 = top
        instruction,  ///< pinned producer, index into the function body
        param,        ///< k-th input of a standalone expression graph
    };
    kind k = kind::none;
    uint32_t index = 0;

    friend bool operator==(const Source&, const Source&) = default;
};

struct DfNode
{
    NodeId id = 0;
    node_kind kind = node_kind::var;
    op_tag op = op_tag::none;
    uint8_t width = 32;
    std::vector<NodeId> operands;
    /// Constant value, masked to `width` (Const only).
    uint64_t value = 0;
    Source origin;

    /// Var and Opaque nodes are inputs as far as synthesis is concerned.
    bool is_leaf() const noexcept { return kind == node_kind::var || kind == node_kind::opaque; }
    bool is_pinned() const noexcept { return kind == node_kind::opaque && is_trapping(op); }

    friend bool operator==(const DfNode&, const DfNode&) = default;
};

struct Sink
{
    enum class kind : uint8_t
    {
        stack,  ///< operand-stack slot at region exit, 0 = bottom-most region value
        local,
    };
    kind k = kind::stack;
    uint32_t index = 0;

    friend bool operator==(const Sink&, const Sink&) = default;
};

struct Output
{
    Sink sink;
    NodeId node = 0;

    friend bool operator==(const Output&, const Output&) = default;
};

/// Pure dataflow DAG over bit-vector values. Node ids equal their index in
/// `nodes` and operands always precede their users.
struct DfGraph
{
    std::vector<DfNode> nodes;
    /// Var and Opaque input leaves in creation order.
    std::vector<NodeId> inputs;
    /// Stack outputs in slot order, then local outputs by local index.
    std::vector<Output> outputs;
    /// Trapping producers in original execution order.
    std::vector<NodeId> pinned;
    /// Number of operand-stack values consumed from below the region.
    uint32_t stack_inputs = 0;

    const DfNode& node(NodeId id) const { return nodes.at(id); }

    NodeId add_var(unsigned width, Source origin);
    NodeId add_opaque_input(unsigned width, Source origin);
    NodeId add_const(unsigned width, uint64_t value);
    NodeId add_op(op_tag op, std::vector<NodeId> operands, unsigned width);
    NodeId add_pinned(op_tag op, std::vector<NodeId> operands, unsigned width, Source origin);

    /// The single stack output of an expression graph.
    NodeId result() const;

    friend bool operator==(const DfGraph&, const DfGraph&) = default;
};

/// Builds a standalone expression graph whose first `widths.size()` nodes are
/// param inputs 0..k-1.
DfGraph make_expression_graph(std::span<const unsigned> widths);

class lift_error : public std::runtime_error
{
public:
    enum class kind
    {
        stack_underflow,
        type_mismatch,
        unsupported,
    };

    lift_error(kind k, size_t instr_index, const std::string& detail);
    kind error_kind() const noexcept { return m_kind; }
    size_t instr_index() const noexcept { return m_index; }

private:
    kind m_kind;
    size_t m_index;
};

std::string_view to_string(lift_error::kind k) noexcept;

/// A maximal straight-line slice [begin, end) of a function body and its graph.
struct Region
{
    size_t begin = 0;
    size_t end = 0;
    DfGraph graph;
};

/// Splits a function body at control flow, calls and unsupported instructions and
/// lifts each straight-line slice. `info` types calls, globals and block types; it
/// may be null for bodies that use none of these. Throws lift_error.
std::vector<Region> lift_function(const FunctionBody& body,
    std::span<const valtype> local_types, std::span<const valtype> result_types,
    const ModuleInfo* info);

/// Lifts an instruction slice (a function body, with or without its final end).
std::vector<DfGraph> lift_region(std::span<const Instruction> instrs,
    std::span<const valtype> local_types);

class lower_error : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Hands out scratch locals appended after a function's existing locals.
/// Scratch locals are dead at region boundaries, so they are reused per region.
class LocalAllocator
{
public:
    static constexpr uint32_t max_locals = 50'000;

    explicit LocalAllocator(uint32_t existing_locals) : m_base{existing_locals} {}

    uint32_t acquire(valtype type);
    void begin_region() noexcept;

    /// Declarations to append to the function's locals.
    std::vector<LocalDecl> extra_locals() const;
    uint32_t total_locals() const noexcept
    {
        return m_base + static_cast<uint32_t>(m_types.size());
    }

private:
    uint32_t m_base;
    std::vector<valtype> m_types;
    std::vector<bool> m_in_use;
};

/// Emits a stack sequence computing every output of `g`. Throws lower_error
/// (LocalOverflow) when more scratch locals are needed than allowed.
std::vector<Instruction> lower_graph(const DfGraph& g, LocalAllocator& locals);
std::vector<Instruction> lower_graph(const DfGraph& g);

/// Lowered instruction count.
uint64_t graph_cost(const DfGraph& g);

class substitute_error : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Rewrite
{
    NodeId root = 0;
    /// Expression graph over params 0..k-1.
    DfGraph rhs;
    /// Host node bound to each param of `rhs`.
    std::vector<NodeId> bindings;
};

/// Redirects all uses of `root` to `rhs` and removes dead nodes. Throws
/// substitute_error (InputNotFound) when a binding is not a node of `g` or
/// `root` is an input.
DfGraph substitute(const DfGraph& g, NodeId root, const DfGraph& rhs,
    std::span<const NodeId> bindings);

/// Applies several rewrites with disjoint cones in one pass.
DfGraph substitute_all(const DfGraph& g, std::span<const Rewrite> rewrites);

/// Removes nodes unreachable from outputs; pinned producers and stack inputs stay.
DfGraph eliminate_dead_nodes(const DfGraph& g);

/// Nodes reachable from `root` through operands, stopping at Var/Opaque leaves
/// (which are included). Sorted by id.
std::vector<NodeId> cone_of(const DfGraph& g, NodeId root);

/// Extracts the cone of `root` as an expression graph. `leaves` receives the host
/// ids of the cone's Var/Opaque leaves in first-use order (param k <-> leaves[k]).
DfGraph extract_cone(const DfGraph& g, NodeId root, std::vector<NodeId>& leaves);

/// Souper-like text, one node per line (`%1:i32 = and %0, 1`).
std::string dump(const DfGraph& g);
/// Compact single-expression rendering of the cone of `root`.
std::string expression_text(const DfGraph& g, NodeId root);
}  // namespace wsopt
