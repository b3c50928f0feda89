// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/dataflow.hpp"
#include "wsopt/opcode_info.hpp"
#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

namespace wsopt
{
namespace
{
uint64_t mask_for(unsigned width) noexcept
{
    return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

valtype type_of_width(unsigned width) noexcept
{
    return width == 64 ? valtype::i64 : valtype::i32;
}

unsigned width_of(valtype t) noexcept
{
    return t == valtype::i64 ? 64 : 32;
}

struct numeric_desc
{
    op_tag op = op_tag::none;
    unsigned operand_width = 0;
    unsigned arity = 0;
};

numeric_desc describe_numeric(opcode op) noexcept
{
    const auto b = static_cast<uint8_t>(op);
    constexpr op_tag bin_ops[] = {op_tag::add, op_tag::sub, op_tag::mul, op_tag::div_s,
        op_tag::div_u, op_tag::rem_s, op_tag::rem_u, op_tag::and_, op_tag::or_, op_tag::xor_,
        op_tag::shl, op_tag::shr_s, op_tag::shr_u, op_tag::rotl, op_tag::rotr};
    constexpr op_tag cmp_ops[] = {op_tag::eq, op_tag::ne, op_tag::lt_s, op_tag::lt_u,
        op_tag::gt_s, op_tag::gt_u, op_tag::le_s, op_tag::le_u, op_tag::ge_s, op_tag::ge_u};
    if (b >= 0x6a && b <= 0x78)
        return {bin_ops[b - 0x6a], 32, 2};
    if (b >= 0x7c && b <= 0x8a)
        return {bin_ops[b - 0x7c], 64, 2};
    if (b >= 0x46 && b <= 0x4f)
        return {cmp_ops[b - 0x46], 32, 2};
    if (b >= 0x51 && b <= 0x5a)
        return {cmp_ops[b - 0x51], 64, 2};
    switch (op)
    {
    case opcode::i32_eqz:
        return {op_tag::eqz, 32, 1};
    case opcode::i64_eqz:
        return {op_tag::eqz, 64, 1};
    case opcode::i32_wrap_i64:
        return {op_tag::wrap, 64, 1};
    case opcode::i64_extend_i32_s:
        return {op_tag::extend_s, 32, 1};
    case opcode::i64_extend_i32_u:
        return {op_tag::extend_u, 32, 1};
    default:
        return {};
    }
}

opcode opcode_for(op_tag op, unsigned operand_width)
{
    const bool wide = operand_width == 64;
    auto bin = [&](uint8_t i32_base_offset) {
        return static_cast<opcode>((wide ? 0x7c : 0x6a) + i32_base_offset);
    };
    auto cmp = [&](uint8_t off) { return static_cast<opcode>((wide ? 0x51 : 0x46) + off); };
    switch (op)
    {
    case op_tag::add:
        return bin(0);
    case op_tag::sub:
        return bin(1);
    case op_tag::mul:
        return bin(2);
    case op_tag::div_s:
        return bin(3);
    case op_tag::div_u:
        return bin(4);
    case op_tag::rem_s:
        return bin(5);
    case op_tag::rem_u:
        return bin(6);
    case op_tag::and_:
        return bin(7);
    case op_tag::or_:
        return bin(8);
    case op_tag::xor_:
        return bin(9);
    case op_tag::shl:
        return bin(10);
    case op_tag::shr_s:
        return bin(11);
    case op_tag::shr_u:
        return bin(12);
    case op_tag::rotl:
        return bin(13);
    case op_tag::rotr:
        return bin(14);
    case op_tag::eq:
        return cmp(0);
    case op_tag::ne:
        return cmp(1);
    case op_tag::lt_s:
        return cmp(2);
    case op_tag::lt_u:
        return cmp(3);
    case op_tag::gt_s:
        return cmp(4);
    case op_tag::gt_u:
        return cmp(5);
    case op_tag::le_s:
        return cmp(6);
    case op_tag::le_u:
        return cmp(7);
    case op_tag::ge_s:
        return cmp(8);
    case op_tag::ge_u:
        return cmp(9);
    case op_tag::eqz:
        return wide ? opcode::i64_eqz : opcode::i32_eqz;
    case op_tag::extend_s:
        return opcode::i64_extend_i32_s;
    case op_tag::extend_u:
        return opcode::i64_extend_i32_u;
    case op_tag::wrap:
        return opcode::i32_wrap_i64;
    case op_tag::select:
        return opcode::select;
    case op_tag::none:
        break;
    }
    throw lower_error("no opcode for operation");
}

Instruction make_instr(opcode op, int64_t imm = 0)
{
    Instruction ins;
    ins.op = op;
    ins.imm = imm;
    return ins;
}

int64_t signed_const(unsigned width, uint64_t value) noexcept
{
    if (width >= 64)
        return static_cast<int64_t>(value);
    const uint64_t sign = uint64_t{1} << (width - 1);
    return static_cast<int64_t>((value ^ sign) - sign);
}

// ---------------------------------------------------------------------------
// Lifting

constexpr valtype unknown_type = static_cast<valtype>(0);

class lifter
{
public:
    lifter(const FunctionBody& body, std::span<const valtype> locals,
        std::optional<std::span<const valtype>> results, const ModuleInfo* info)
      : m_body{body}, m_locals{locals}, m_info{info}
    {
        if (results)
            m_results.assign(results->begin(), results->end());
        else
            m_infer_results = true;
    }

    std::vector<Region> run()
    {
        m_frames.push_back({opcode::block, {{}, m_results}, 0, false});
        for (m_pc = 0; m_pc < m_body.instrs.size(); ++m_pc)
        {
            if (m_frames.empty())
                fail(lift_error::kind::type_mismatch, "instructions after final end");
            const auto& ins = m_body.instrs[m_pc];
            if (liftable(ins))
            {
                if (!m_open)
                    open_region();
                build(ins);
            }
            else
            {
                close_region();
                apply_types(ins);
            }
        }
        close_region();
        if (!m_frames.empty())
        {
            if (!m_infer_results)
                fail(lift_error::kind::type_mismatch, "function body is not terminated");
        }
        return std::move(m_regions);
    }

private:
    struct frame
    {
        opcode kind;
        FuncType sig;
        size_t height;
        bool unreachable;
    };

    [[noreturn]] void fail(lift_error::kind k, const std::string& what) const
    {
        throw lift_error(k, m_pc, what);
    }

    valtype local_type(int64_t index) const
    {
        if (index < 0 || static_cast<size_t>(index) >= m_locals.size())
            fail(lift_error::kind::type_mismatch, "local index out of range");
        return m_locals[static_cast<size_t>(index)];
    }

    // --- validator stack ---------------------------------------------------

    valtype vpop(valtype expected)
    {
        auto& f = m_frames.back();
        if (m_vals.size() == f.height)
        {
            if (f.unreachable)
                return expected;
            fail(lift_error::kind::stack_underflow, "operand stack underflow");
        }
        const auto actual = m_vals.back();
        m_vals.pop_back();
        if (expected != unknown_type && actual != unknown_type && actual != expected)
            fail(lift_error::kind::type_mismatch, "operand type mismatch");
        return actual == unknown_type ? expected : actual;
    }

    void vpush(valtype t) { m_vals.push_back(t); }

    void vpop_all(std::span<const valtype> types)
    {
        for (auto it = types.rbegin(); it != types.rend(); ++it)
            vpop(*it);
    }

    void mark_unreachable()
    {
        auto& f = m_frames.back();
        m_vals.resize(f.height);
        f.unreachable = true;
    }

    std::span<const valtype> label_types(int64_t depth) const
    {
        if (depth < 0 || static_cast<size_t>(depth) >= m_frames.size())
            fail(lift_error::kind::type_mismatch, "branch depth out of range");
        const auto& f = m_frames[m_frames.size() - 1 - static_cast<size_t>(depth)];
        return f.kind == opcode::loop ? std::span{f.sig.params} : std::span{f.sig.results};
    }

    FuncType block_sig(int64_t bt) const
    {
        if (bt >= 0 && (!m_info || static_cast<size_t>(bt) >= m_info->types.size()))
            fail(lift_error::kind::unsupported, "block type index without type section");
        if (bt < 0 && bt != blocktype_empty && bt != blocktype_i32 && bt != blocktype_i64 &&
            bt != -3 && bt != -4)
            fail(lift_error::kind::unsupported, "unsupported block type");
        return m_info ? block_signature(*m_info, bt) : block_signature(ModuleInfo{}, bt);
    }

    static valtype letter_type(char c) noexcept
    {
        switch (c)
        {
        case 'i':
            return valtype::i32;
        case 'l':
            return valtype::i64;
        case 'f':
            return valtype::f32;
        case 'd':
            return valtype::f64;
        default:
            return unknown_type;
        }
    }

    void apply_signature(std::string_view sig)
    {
        const auto colon = sig.find(':');
        const auto pops = sig.substr(0, colon);
        const auto pushes = sig.substr(colon + 1);
        for (auto it = pops.rbegin(); it != pops.rend(); ++it)
            vpop(letter_type(*it));
        for (const char c : pushes)
            vpush(letter_type(c));
    }

    uint32_t raw_u32_at(bytes_view raw, size_t pos) const
    {
        leb_result<uint32_t> r{};
        if (pos >= raw.size() || read_uleb<uint32_t>(raw.subspan(pos), r) != leb_status::ok)
            fail(lift_error::kind::unsupported, "malformed immediate");
        return r.value;
    }

    void apply_unsupported(const Instruction& ins)
    {
        const auto info = describe_raw(ins.raw);
        switch (info.effect)
        {
        case stack_effect::fixed:
            apply_signature(info.signature);
            return;
        case stack_effect::unreachable:
            mark_unreachable();
            return;
        case stack_effect::br_table:
            vpop(valtype::i32);
            mark_unreachable();
            return;
        case stack_effect::call_indirect:
        {
            if (!m_info)
                fail(lift_error::kind::unsupported, "call_indirect without module info");
            const auto type_index = raw_u32_at(ins.raw, 1);
            if (type_index >= m_info->types.size())
                fail(lift_error::kind::type_mismatch, "type index out of range");
            const auto& ft = m_info->types[type_index];
            vpop(valtype::i32);
            vpop_all(ft.params);
            for (const auto t : ft.results)
                vpush(t);
            return;
        }
        case stack_effect::global_get:
        case stack_effect::global_set:
        {
            if (!m_info)
                fail(lift_error::kind::unsupported, "global access without module info");
            const auto index = raw_u32_at(ins.raw, 1);
            if (index >= m_info->globals.size())
                fail(lift_error::kind::type_mismatch, "global index out of range");
            if (info.effect == stack_effect::global_get)
                vpush(m_info->globals[index]);
            else
                vpop(m_info->globals[index]);
            return;
        }
        case stack_effect::select_typed:
        {
            vpop(valtype::i32);
            const auto t = vpop(unknown_type);
            vpush(vpop(t));
            return;
        }
        case stack_effect::unknown:
        case stack_effect::structured:
            break;
        }
        fail(lift_error::kind::unsupported,
            "instruction with unknown stack effect: " + std::string{info.name});
    }

    void apply_types(const Instruction& ins)
    {
        switch (ins.op)
        {
        case opcode::unsupported:
            apply_unsupported(ins);
            return;
        case opcode::nop:
            return;
        case opcode::block:
        case opcode::loop:
        case opcode::if_:
        {
            auto sig = block_sig(ins.imm);
            if (ins.op == opcode::if_)
                vpop(valtype::i32);
            vpop_all(sig.params);
            m_frames.push_back({ins.op, sig, m_vals.size(), false});
            for (const auto t : m_frames.back().sig.params)
                vpush(t);
            return;
        }
        case opcode::else_:
        {
            auto& f = m_frames.back();
            if (f.kind != opcode::if_)
                fail(lift_error::kind::type_mismatch, "else without if");
            vpop_all(f.sig.results);
            if (m_vals.size() != f.height)
                fail(lift_error::kind::type_mismatch, "values left on stack at else");
            f.kind = opcode::else_;
            f.unreachable = false;
            for (const auto t : f.sig.params)
                vpush(t);
            return;
        }
        case opcode::end:
        {
            if (m_infer_results && m_frames.size() == 1)
            {
                // Standalone slice: whatever is left on the stack is its result.
                m_frames.pop_back();
                return;
            }
            auto f = m_frames.back();
            vpop_all(f.sig.results);
            if (m_vals.size() != f.height)
                fail(lift_error::kind::type_mismatch, "values left on stack at end");
            m_frames.pop_back();
            for (const auto t : f.sig.results)
                vpush(t);
            return;
        }
        case opcode::br:
            vpop_all(label_types(ins.imm));
            mark_unreachable();
            return;
        case opcode::br_if:
        {
            vpop(valtype::i32);
            const auto types = label_types(ins.imm);
            const std::vector<valtype> copy(types.begin(), types.end());
            vpop_all(copy);
            for (const auto t : copy)
                vpush(t);
            return;
        }
        case opcode::return_:
            vpop_all(m_results);
            mark_unreachable();
            return;
        case opcode::call:
        {
            if (!m_info || ins.imm < 0 || static_cast<size_t>(ins.imm) >= m_info->func_types.size())
                fail(lift_error::kind::unsupported, "call target cannot be typed");
            const auto& ft = m_info->func_type(static_cast<uint32_t>(ins.imm));
            vpop_all(ft.params);
            for (const auto t : ft.results)
                vpush(t);
            return;
        }
        case opcode::drop:
            vpop(unknown_type);
            return;
        case opcode::select:
        {
            vpop(valtype::i32);
            const auto t = vpop(unknown_type);
            vpush(vpop(t));
            return;
        }
        case opcode::local_get:
            vpush(local_type(ins.imm));
            return;
        case opcode::local_set:
            vpop(local_type(ins.imm));
            return;
        case opcode::local_tee:
            vpush(vpop(local_type(ins.imm)));
            return;
        default:
            apply_signature(info_for(static_cast<uint8_t>(ins.op)).signature);
            return;
        }
    }

    // --- region building ---------------------------------------------------

    /// Type of the stack value `depth` positions below the top, if it lies
    /// within the current frame.
    std::optional<valtype> peek(size_t depth) const
    {
        const auto& f = m_frames.back();
        if (m_vals.size() < f.height + depth + 1)
            return std::nullopt;
        return m_vals[m_vals.size() - 1 - depth];
    }

    bool top_is_pure() const
    {
        if (!m_open || m_rstack.empty())
            return false;
        return m_graph.node(m_rstack.back()).kind != node_kind::opaque;
    }

    bool liftable(const Instruction& ins) const
    {
        if (m_frames.empty() || m_frames.back().unreachable)
            return false;
        switch (ins.op)
        {
        case opcode::nop:
            return true;
        case opcode::i32_const:
        case opcode::i64_const:
            return true;
        case opcode::local_get:
        case opcode::local_set:
        case opcode::local_tee:
            return is_integer(local_type(ins.imm));
        case opcode::drop:
        {
            const auto t = peek(0);
            return t && is_integer(*t) && top_is_pure();
        }
        case opcode::select:
        {
            const auto a = peek(1);
            const auto b = peek(2);
            return a && b && is_integer(*a) && *a == *b;
        }
        default:
            return describe_numeric(ins.op).op != op_tag::none;
        }
    }

    void open_region()
    {
        m_open = true;
        m_region_begin = m_pc;
        m_graph = DfGraph{};
        m_rstack.clear();
        m_local_val.assign(m_locals.size(), std::nullopt);
        m_var_of.assign(m_locals.size(), std::nullopt);
        m_written.clear();
    }

    void close_region()
    {
        if (!m_open)
            return;
        m_open = false;
        for (uint32_t k = 0; k < m_rstack.size(); ++k)
            m_graph.outputs.push_back({{Sink::kind::stack, k}, m_rstack[k]});
        std::sort(m_written.begin(), m_written.end());
        m_written.erase(std::unique(m_written.begin(), m_written.end()), m_written.end());
        for (const auto l : m_written)
        {
            const auto v = *m_local_val[l];
            if (m_var_of[l] && *m_var_of[l] == v)
                continue;
            m_graph.outputs.push_back({{Sink::kind::local, l}, v});
        }
        m_regions.push_back({m_region_begin, m_pc, std::move(m_graph)});
        m_graph = DfGraph{};
    }

    /// Pops a value for the graph, creating a boundary input when the region
    /// reaches below its entry height.
    NodeId take(valtype expected)
    {
        const auto t = vpop(expected);
        if (!m_rstack.empty())
        {
            const auto id = m_rstack.back();
            m_rstack.pop_back();
            return id;
        }
        const auto depth = m_graph.stack_inputs++;
        return m_graph.add_opaque_input(width_of(t), {Source::kind::stack_slot, depth});
    }

    void give(NodeId id)
    {
        vpush(type_of_width(m_graph.node(id).width));
        m_rstack.push_back(id);
    }

    void build(const Instruction& ins)
    {
        switch (ins.op)
        {
        case opcode::nop:
            return;
        case opcode::i32_const:
            give(m_graph.add_const(32, static_cast<uint64_t>(ins.imm)));
            return;
        case opcode::i64_const:
            give(m_graph.add_const(64, static_cast<uint64_t>(ins.imm)));
            return;
        case opcode::local_get:
        {
            const auto l = static_cast<uint32_t>(ins.imm);
            if (!m_local_val[l])
            {
                const auto v = m_graph.add_var(width_of(m_locals[l]), {Source::kind::local, l});
                m_var_of[l] = v;
                m_local_val[l] = v;
            }
            give(*m_local_val[l]);
            return;
        }
        case opcode::local_set:
        case opcode::local_tee:
        {
            const auto l = static_cast<uint32_t>(ins.imm);
            const auto v = take(m_locals[l]);
            m_local_val[l] = v;
            m_written.push_back(l);
            if (ins.op == opcode::local_tee)
                give(v);
            return;
        }
        case opcode::drop:
            take(unknown_type);
            return;
        case opcode::select:
        {
            const auto c = take(valtype::i32);
            const auto t = *peek(0);
            const auto b = take(t);
            const auto a = take(t);
            give(m_graph.add_op(op_tag::select, {a, b, c}, width_of(t)));
            return;
        }
        default:
            break;
        }

        const auto d = describe_numeric(ins.op);
        const auto t = type_of_width(d.operand_width);
        if (d.arity == 1)
        {
            const auto a = take(t);
            give(m_graph.add_op(d.op, {a}, result_width(d.op, d.operand_width)));
            return;
        }
        const auto b = take(t);
        const auto a = take(t);
        if (is_trapping(d.op))
            give(m_graph.add_pinned(d.op, {a, b}, d.operand_width,
                {Source::kind::instruction, static_cast<uint32_t>(m_pc)}));
        else
            give(m_graph.add_op(d.op, {a, b}, result_width(d.op, d.operand_width)));
    }

    const FunctionBody& m_body;
    std::span<const valtype> m_locals;
    std::vector<valtype> m_results;
    bool m_infer_results = false;
    const ModuleInfo* m_info;

    size_t m_pc = 0;
    std::vector<valtype> m_vals;
    std::vector<frame> m_frames;

    bool m_open = false;
    size_t m_region_begin = 0;
    DfGraph m_graph;
    std::vector<NodeId> m_rstack;
    std::vector<std::optional<NodeId>> m_local_val;
    std::vector<std::optional<NodeId>> m_var_of;
    std::vector<uint32_t> m_written;
    std::vector<Region> m_regions;
};

// ---------------------------------------------------------------------------
// Lowering

std::vector<bool> live_nodes(const DfGraph& g)
{
    std::vector<bool> live(g.nodes.size(), false);
    std::vector<NodeId> work;
    auto mark = [&](NodeId id) {
        if (!live[id])
        {
            live[id] = true;
            work.push_back(id);
        }
    };
    for (const auto& o : g.outputs)
        mark(o.node);
    for (const auto p : g.pinned)
        mark(p);
    for (const auto& n : g.nodes)
        if (n.kind == node_kind::opaque && n.origin.k == Source::kind::stack_slot)
            mark(n.id);
    while (!work.empty())
    {
        const auto id = work.back();
        work.pop_back();
        for (const auto op : g.nodes[id].operands)
            mark(op);
    }
    return live;
}

class lowerer
{
public:
    lowerer(const DfGraph& g, LocalAllocator& alloc) : m_g{g}, m_alloc{alloc}
    {
        const auto n = g.nodes.size();
        m_live = live_nodes(g);
        m_uses.assign(n, 0);
        m_home.assign(n, std::nullopt);
        m_done.assign(n, false);
        m_out_locals.resize(n);
        for (const auto& node : g.nodes)
        {
            if (!m_live[node.id])
                continue;
            for (const auto op : node.operands)
                ++m_uses[op];
            if (node.kind == node_kind::var && node.origin.k == Source::kind::local)
                m_var_locals.push_back(node.origin.index);
        }
        for (const auto& o : g.outputs)
        {
            ++m_uses[o.node];
            if (o.sink.k == Sink::kind::local)
                m_out_locals[o.node].push_back(o.sink.index);
        }
        std::sort(m_var_locals.begin(), m_var_locals.end());
    }

    std::vector<Instruction> run()
    {
        m_alloc.begin_region();

        std::vector<NodeId> stack_in;
        for (const auto& node : m_g.nodes)
            if (node.kind == node_kind::opaque && node.origin.k == Source::kind::stack_slot)
                stack_in.push_back(node.id);
        std::sort(stack_in.begin(), stack_in.end(), [&](NodeId a, NodeId b) {
            return m_g.nodes[a].origin.index < m_g.nodes[b].origin.index;
        });
        for (const auto id : stack_in)
        {
            if (m_uses[id] == 0)
            {
                m_out.push_back(make_instr(opcode::drop));
                continue;
            }
            const auto home = m_alloc.acquire(type_of_width(m_g.nodes[id].width));
            m_out.push_back(make_instr(opcode::local_set, home));
            m_home[id] = home;
        }

        for (const auto& o : m_g.outputs)
            if (o.sink.k == Sink::kind::stack)
                emit(o.node);

        std::vector<Output> pending;
        for (const auto& o : m_g.outputs)
        {
            if (o.sink.k != Sink::kind::local)
                continue;
            const auto& node = m_g.nodes[o.node];
            const auto l = o.sink.index;
            if (node.kind == node_kind::var && node.origin.k == Source::kind::local &&
                node.origin.index == l)
                continue;
            if (m_home[o.node] && *m_home[o.node] == l)
                continue;
            if (!m_home[o.node] && m_uses[o.node] > 1 && materializable(node) &&
                choose_home(o.node) == l)
            {
                compute(o.node);
                m_out.push_back(make_instr(opcode::local_set, l));
                m_home[o.node] = l;
                continue;
            }
            pending.push_back(o);
        }
        for (const auto& o : pending)
            emit(o.node);
        for (auto it = pending.rbegin(); it != pending.rend(); ++it)
            m_out.push_back(make_instr(opcode::local_set, it->sink.index));

        for (const auto p : m_g.pinned)
            if (!m_done[p])
                emit_standalone(p);

        return std::move(m_out);
    }

private:
    static bool materializable(const DfNode& n) noexcept
    {
        return n.kind != node_kind::var && n.kind != node_kind::constant;
    }

    bool reads_entry_value(uint32_t local) const
    {
        return std::binary_search(m_var_locals.begin(), m_var_locals.end(), local);
    }

    uint32_t choose_home(NodeId id)
    {
        auto locals = m_out_locals[id];
        std::sort(locals.begin(), locals.end());
        for (const auto l : locals)
            if (!reads_entry_value(l))
                return l;
        return m_alloc.acquire(type_of_width(m_g.nodes[id].width));
    }

    void flush_pinned_before(NodeId id)
    {
        for (const auto p : m_g.pinned)
        {
            if (p == id)
                break;
            if (!m_done[p])
                emit_standalone(p);
        }
    }

    void compute(NodeId id)
    {
        const auto& n = m_g.nodes[id];
        if (n.is_pinned())
            flush_pinned_before(id);
        for (const auto op : n.operands)
            emit(op);
        const unsigned operand_width =
            n.operands.empty() ? n.width : m_g.nodes[n.operands.front()].width;
        m_out.push_back(make_instr(opcode_for(n.op, operand_width)));
        m_done[id] = true;
    }

    void emit(NodeId id)
    {
        const auto& n = m_g.nodes[id];
        switch (n.kind)
        {
        case node_kind::var:
            m_out.push_back(make_instr(opcode::local_get, n.origin.index));
            return;
        case node_kind::constant:
            m_out.push_back(make_instr(n.width == 64 ? opcode::i64_const : opcode::i32_const,
                signed_const(n.width == 64 ? 64 : 32, n.value)));
            return;
        default:
            break;
        }
        if (m_home[id])
        {
            m_out.push_back(make_instr(opcode::local_get, *m_home[id]));
            return;
        }
        compute(id);
        if (m_uses[id] > 1)
        {
            const auto home = choose_home(id);
            m_out.push_back(make_instr(opcode::local_tee, home));
            m_home[id] = home;
        }
    }

    void emit_standalone(NodeId id)
    {
        compute(id);
        if (m_uses[id] == 0)
        {
            m_out.push_back(make_instr(opcode::drop));
            return;
        }
        const auto home = choose_home(id);
        m_out.push_back(make_instr(opcode::local_set, home));
        m_home[id] = home;
    }

    const DfGraph& m_g;
    LocalAllocator& m_alloc;
    std::vector<bool> m_live;
    std::vector<uint32_t> m_uses;
    std::vector<std::optional<uint32_t>> m_home;
    std::vector<bool> m_done;
    std::vector<std::vector<uint32_t>> m_out_locals;
    std::vector<uint32_t> m_var_locals;
    std::vector<Instruction> m_out;
};

void collect_cone(const DfGraph& g, NodeId root, std::vector<bool>& seen)
{
    std::vector<NodeId> work{root};
    seen[root] = true;
    while (!work.empty())
    {
        const auto id = work.back();
        work.pop_back();
        const auto& n = g.nodes[id];
        if (n.is_leaf())
            continue;
        for (const auto op : n.operands)
            if (!seen[op])
            {
                seen[op] = true;
                work.push_back(op);
            }
    }
}

std::string leaf_name(const DfNode& n)
{
    return "%" + std::to_string(n.id);
}

std::string operand_text(const DfGraph& g, NodeId id)
{
    const auto& n = g.nodes[id];
    if (n.kind == node_kind::constant)
        return std::to_string(signed_const(n.width, n.value));
    return "%" + std::to_string(id);
}

std::string source_text(const Source& s)
{
    switch (s.k)
    {
    case Source::kind::local:
        return "local " + std::to_string(s.index);
    case Source::kind::stack_slot:
        return "stack " + std::to_string(s.index);
    case Source::kind::instruction:
        return "pinned @" + std::to_string(s.index);
    case Source::kind::param:
        return "param " + std::to_string(s.index);
    case Source::kind::none:
        break;
    }
    return {};
}
}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(op_tag op) noexcept
{
    switch (op)
    {
    case op_tag::none:
        return "none";
    case op_tag::add:
        return "add";
    case op_tag::sub:
        return "sub";
    case op_tag::mul:
        return "mul";
    case op_tag::and_:
        return "and";
    case op_tag::or_:
        return "or";
    case op_tag::xor_:
        return "xor";
    case op_tag::shl:
        return "shl";
    case op_tag::shr_s:
        return "shr_s";
    case op_tag::shr_u:
        return "shr_u";
    case op_tag::rotl:
        return "rotl";
    case op_tag::rotr:
        return "rotr";
    case op_tag::eq:
        return "eq";
    case op_tag::ne:
        return "ne";
    case op_tag::lt_s:
        return "lt_s";
    case op_tag::lt_u:
        return "lt_u";
    case op_tag::gt_s:
        return "gt_s";
    case op_tag::gt_u:
        return "gt_u";
    case op_tag::le_s:
        return "le_s";
    case op_tag::le_u:
        return "le_u";
    case op_tag::ge_s:
        return "ge_s";
    case op_tag::ge_u:
        return "ge_u";
    case op_tag::eqz:
        return "eqz";
    case op_tag::extend_s:
        return "extend_s";
    case op_tag::extend_u:
        return "extend_u";
    case op_tag::wrap:
        return "wrap";
    case op_tag::select:
        return "select";
    case op_tag::div_s:
        return "div_s";
    case op_tag::div_u:
        return "div_u";
    case op_tag::rem_s:
        return "rem_s";
    case op_tag::rem_u:
        return "rem_u";
    }
    return "?";
}

bool is_comparison(op_tag op) noexcept
{
    return op >= op_tag::eq && op <= op_tag::ge_u;
}

bool is_commutative(op_tag op) noexcept
{
    switch (op)
    {
    case op_tag::add:
    case op_tag::mul:
    case op_tag::and_:
    case op_tag::or_:
    case op_tag::xor_:
    case op_tag::eq:
    case op_tag::ne:
        return true;
    default:
        return false;
    }
}

bool is_trapping(op_tag op) noexcept
{
    return op >= op_tag::div_s && op <= op_tag::rem_u;
}

unsigned result_width(op_tag op, unsigned operand_width) noexcept
{
    if (is_comparison(op) || op == op_tag::eqz)
        return operand_width < 32 ? operand_width : 32;
    switch (op)
    {
    case op_tag::extend_s:
    case op_tag::extend_u:
        return 64;
    case op_tag::wrap:
        return 32;
    default:
        return operand_width;
    }
}

NodeId DfGraph::add_var(unsigned width, Source origin)
{
    DfNode n;
    n.id = static_cast<NodeId>(nodes.size());
    n.kind = node_kind::var;
    n.width = static_cast<uint8_t>(width);
    n.origin = origin;
    nodes.push_back(std::move(n));
    inputs.push_back(nodes.back().id);
    return nodes.back().id;
}

NodeId DfGraph::add_opaque_input(unsigned width, Source origin)
{
    DfNode n;
    n.id = static_cast<NodeId>(nodes.size());
    n.kind = node_kind::opaque;
    n.width = static_cast<uint8_t>(width);
    n.origin = origin;
    nodes.push_back(std::move(n));
    inputs.push_back(nodes.back().id);
    return nodes.back().id;
}

NodeId DfGraph::add_const(unsigned width, uint64_t value)
{
    DfNode n;
    n.id = static_cast<NodeId>(nodes.size());
    n.kind = node_kind::constant;
    n.width = static_cast<uint8_t>(width);
    n.value = value & mask_for(width);
    nodes.push_back(std::move(n));
    return nodes.back().id;
}

NodeId DfGraph::add_op(op_tag op, std::vector<NodeId> operands, unsigned width)
{
    DfNode n;
    n.id = static_cast<NodeId>(nodes.size());
    n.op = op;
    n.width = static_cast<uint8_t>(width);
    n.kind = op == op_tag::select ? node_kind::select
             : operands.size() == 1 ? node_kind::unop
                                    : node_kind::binop;
    for (const auto o : operands)
        if (o >= n.id)
            throw std::logic_error("operand does not precede its user");
    n.operands = std::move(operands);
    nodes.push_back(std::move(n));
    return nodes.back().id;
}

NodeId DfGraph::add_pinned(op_tag op, std::vector<NodeId> operands, unsigned width, Source origin)
{
    DfNode n;
    n.id = static_cast<NodeId>(nodes.size());
    n.kind = node_kind::opaque;
    n.op = op;
    n.width = static_cast<uint8_t>(width);
    n.operands = std::move(operands);
    n.origin = origin;
    nodes.push_back(std::move(n));
    pinned.push_back(nodes.back().id);
    inputs.push_back(nodes.back().id);
    return nodes.back().id;
}

NodeId DfGraph::result() const
{
    for (const auto& o : outputs)
        if (o.sink.k == Sink::kind::stack && o.sink.index == 0)
            return o.node;
    throw std::logic_error("expression graph has no result");
}

DfGraph make_expression_graph(std::span<const unsigned> widths)
{
    DfGraph g;
    for (uint32_t k = 0; k < widths.size(); ++k)
        g.add_var(widths[k], {Source::kind::param, k});
    return g;
}

lift_error::lift_error(kind k, size_t instr_index, const std::string& detail)
  : std::runtime_error{std::string{to_string(k)} + " at instruction " +
                       std::to_string(instr_index) + ": " + detail},
    m_kind{k},
    m_index{instr_index}
{}

std::string_view to_string(lift_error::kind k) noexcept
{
    switch (k)
    {
    case lift_error::kind::stack_underflow:
        return "StackUnderflow";
    case lift_error::kind::type_mismatch:
        return "TypeMismatch";
    case lift_error::kind::unsupported:
        return "Unsupported";
    }
    return "?";
}

std::vector<Region> lift_function(const FunctionBody& body,
    std::span<const valtype> local_types, std::span<const valtype> result_types,
    const ModuleInfo* info)
{
    if (body.opaque)
        throw lift_error(lift_error::kind::unsupported, 0, "opaque function body");
    return lifter{body, local_types, result_types, info}.run();
}

std::vector<DfGraph> lift_region(std::span<const Instruction> instrs,
    std::span<const valtype> local_types)
{
    FunctionBody body;
    body.instrs.assign(instrs.begin(), instrs.end());
    auto regions = lifter{body, local_types, std::nullopt, nullptr}.run();
    std::vector<DfGraph> out;
    for (auto& r : regions)
        out.push_back(std::move(r.graph));
    return out;
}

uint32_t LocalAllocator::acquire(valtype type)
{
    for (size_t i = 0; i < m_types.size(); ++i)
    {
        if (!m_in_use[i] && m_types[i] == type)
        {
            m_in_use[i] = true;
            return m_base + static_cast<uint32_t>(i);
        }
    }
    if (total_locals() >= max_locals)
        throw lower_error("LocalOverflow: more than 50000 locals required");
    m_types.push_back(type);
    m_in_use.push_back(true);
    return m_base + static_cast<uint32_t>(m_types.size() - 1);
}

void LocalAllocator::begin_region() noexcept
{
    std::fill(m_in_use.begin(), m_in_use.end(), false);
}

std::vector<LocalDecl> LocalAllocator::extra_locals() const
{
    std::vector<LocalDecl> out;
    for (const auto t : m_types)
    {
        if (!out.empty() && out.back().type == t)
            ++out.back().count;
        else
            out.push_back({1, t});
    }
    return out;
}

std::vector<Instruction> lower_graph(const DfGraph& g, LocalAllocator& locals)
{
    return lowerer{g, locals}.run();
}

std::vector<Instruction> lower_graph(const DfGraph& g)
{
    uint32_t base = 0;
    for (const auto& n : g.nodes)
        if (n.kind == node_kind::var)
            base = std::max(base, n.origin.index + 1);
    LocalAllocator alloc{base};
    return lower_graph(g, alloc);
}

uint64_t graph_cost(const DfGraph& g)
{
    return lower_graph(g).size();
}

DfGraph eliminate_dead_nodes(const DfGraph& g)
{
    const auto live = live_nodes(g);
    std::vector<NodeId> remap(g.nodes.size(), 0);
    DfGraph out;
    out.stack_inputs = g.stack_inputs;
    for (const auto& n : g.nodes)
    {
        if (!live[n.id])
            continue;
        DfNode copy = n;
        copy.id = static_cast<NodeId>(out.nodes.size());
        for (auto& op : copy.operands)
            op = remap[op];
        remap[n.id] = copy.id;
        out.nodes.push_back(std::move(copy));
    }
    for (const auto i : g.inputs)
        if (live[i])
            out.inputs.push_back(remap[i]);
    for (const auto& o : g.outputs)
        out.outputs.push_back({o.sink, remap[o.node]});
    for (const auto p : g.pinned)
        out.pinned.push_back(remap[p]);
    return out;
}

std::vector<NodeId> cone_of(const DfGraph& g, NodeId root)
{
    std::vector<bool> seen(g.nodes.size(), false);
    collect_cone(g, root, seen);
    std::vector<NodeId> out;
    for (NodeId i = 0; i < seen.size(); ++i)
        if (seen[i])
            out.push_back(i);
    return out;
}

DfGraph extract_cone(const DfGraph& g, NodeId root, std::vector<NodeId>& leaves)
{
    leaves.clear();
    std::vector<bool> seen_leaf(g.nodes.size(), false);
    // First-use order: depth-first, operands left to right.
    std::vector<bool> visited(g.nodes.size(), false);
    auto visit = [&](auto&& self, NodeId id) -> void {
        const auto& n = g.nodes[id];
        if (n.is_leaf())
        {
            if (!seen_leaf[id])
            {
                seen_leaf[id] = true;
                leaves.push_back(id);
            }
            return;
        }
        if (visited[id])
            return;
        visited[id] = true;
        for (const auto op : n.operands)
            self(self, op);
    };
    visit(visit, root);

    std::vector<unsigned> widths;
    for (const auto l : leaves)
        widths.push_back(g.nodes[l].width);
    DfGraph out = make_expression_graph(widths);
    std::map<NodeId, NodeId> remap;
    for (uint32_t k = 0; k < leaves.size(); ++k)
        remap[leaves[k]] = k;

    for (const auto id : cone_of(g, root))
    {
        const auto& n = g.nodes[id];
        if (n.is_leaf())
            continue;
        if (n.kind == node_kind::constant)
        {
            remap[id] = out.add_const(n.width, n.value);
            continue;
        }
        std::vector<NodeId> ops;
        for (const auto op : n.operands)
            ops.push_back(remap.at(op));
        remap[id] = out.add_op(n.op, std::move(ops), n.width);
    }
    out.outputs.push_back({{Sink::kind::stack, 0}, remap.at(root)});
    return out;
}

DfGraph substitute_all(const DfGraph& g, std::span<const Rewrite> rewrites)
{
    std::map<NodeId, const Rewrite*> by_root;
    for (const auto& rw : rewrites)
    {
        if (rw.root >= g.nodes.size())
            throw substitute_error("InputNotFound: root is not a node of the graph");
        if (g.nodes[rw.root].is_leaf())
            throw substitute_error("InputNotFound: root is an input");
        for (const auto b : rw.bindings)
            if (b >= g.nodes.size() || b >= rw.root)
                throw substitute_error("InputNotFound: binding is not an operand-side node");
        by_root[rw.root] = &rw;
    }

    DfGraph out;
    out.stack_inputs = g.stack_inputs;
    std::vector<NodeId> remap(g.nodes.size(), 0);
    for (const auto& n : g.nodes)
    {
        const auto it = by_root.find(n.id);
        if (it == by_root.end())
        {
            DfNode copy = n;
            copy.id = static_cast<NodeId>(out.nodes.size());
            for (auto& op : copy.operands)
                op = remap[op];
            remap[n.id] = copy.id;
            out.nodes.push_back(std::move(copy));
            continue;
        }
        const auto& rw = *it->second;
        std::vector<NodeId> rhs_map(rw.rhs.nodes.size(), 0);
        for (const auto& r : rw.rhs.nodes)
        {
            if (r.kind == node_kind::var)
            {
                if (r.origin.k != Source::kind::param || r.origin.index >= rw.bindings.size())
                    throw substitute_error("InputNotFound: unbound replacement input");
                rhs_map[r.id] = remap[rw.bindings[r.origin.index]];
                continue;
            }
            if (r.kind == node_kind::opaque)
                throw substitute_error("replacement contains an opaque node");
            DfNode copy = r;
            copy.id = static_cast<NodeId>(out.nodes.size());
            for (auto& op : copy.operands)
                op = rhs_map[op];
            rhs_map[r.id] = copy.id;
            out.nodes.push_back(std::move(copy));
        }
        remap[n.id] = rhs_map[rw.rhs.result()];
    }
    for (const auto i : g.inputs)
        out.inputs.push_back(remap[i]);
    for (const auto& o : g.outputs)
        out.outputs.push_back({o.sink, remap[o.node]});
    for (const auto p : g.pinned)
        out.pinned.push_back(remap[p]);
    return eliminate_dead_nodes(out);
}

DfGraph substitute(const DfGraph& g, NodeId root, const DfGraph& rhs,
    std::span<const NodeId> bindings)
{
    if (root < g.nodes.size() && !g.nodes[root].is_leaf())
    {
        std::vector<NodeId> leaves;
        const auto cone = extract_cone(g, root, leaves);
        if (cone == rhs && std::equal(leaves.begin(), leaves.end(), bindings.begin(),
                               bindings.end()))
            return g;
    }
    const Rewrite rw{root, rhs, {bindings.begin(), bindings.end()}};
    return substitute_all(g, std::span{&rw, 1});
}

std::string dump(const DfGraph& g)
{
    std::ostringstream os;
    for (const auto& n : g.nodes)
    {
        if (n.kind == node_kind::constant)
            continue;
        os << '%' << n.id << ":i" << unsigned{n.width} << " = ";
        switch (n.kind)
        {
        case node_kind::var:
            os << "var";
            break;
        case node_kind::opaque:
            if (n.operands.empty())
            {
                os << "opaque";
                break;
            }
            [[fallthrough]];
        default:
        {
            os << to_string(n.op);
            const char* sep = " ";
            for (const auto op : n.operands)
            {
                os << sep << operand_text(g, op);
                sep = ", ";
            }
            break;
        }
        }
        const auto src = source_text(n.origin);
        if (!src.empty())
            os << " ; " << src;
        os << '\n';
    }
    for (const auto& o : g.outputs)
    {
        os << "out " << (o.sink.k == Sink::kind::stack ? "stack " : "local ") << o.sink.index
           << " <- " << operand_text(g, o.node) << '\n';
    }
    return os.str();
}

std::string expression_text(const DfGraph& g, NodeId root)
{
    const auto& n = g.nodes.at(root);
    switch (n.kind)
    {
    case node_kind::var:
    case node_kind::opaque:
        return leaf_name(n);
    case node_kind::constant:
        return std::to_string(signed_const(n.width, n.value));
    default:
        break;
    }
    std::string s{to_string(n.op)};
    s += '(';
    for (size_t i = 0; i < n.operands.size(); ++i)
    {
        if (i)
            s += ", ";
        s += expression_text(g, n.operands[i]);
    }
    s += ')';
    return s;
}
}  // namespace wsopt
