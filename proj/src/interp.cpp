// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/interp.hpp"
#include "wsopt/opcode_info.hpp"
#include <set>

namespace wsopt
{
namespace
{
struct stop
{
    Outcome::tag t;
    std::string detail;
};

[[noreturn]] void trap(const char* cause)
{
    throw stop{Outcome::tag::trapped, cause};
}

[[noreturn]] void unsupported(const Instruction& ins)
{
    std::string name = ins.op == opcode::unsupported ? std::string{describe_raw(ins.raw).name}
                                                     : std::string{mnemonic(ins.op)};
    throw stop{Outcome::tag::unsupported, name.empty() ? "unknown" : name};
}

Interpreter::control_map build_controls(const FunctionBody& body)
{
    Interpreter::control_map map;
    const auto n = body.instrs.size();
    map.end.assign(n, 0);
    map.else_.assign(n, 0);
    std::vector<uint32_t> open;
    for (uint32_t i = 0; i < n; ++i)
    {
        switch (body.instrs[i].op)
        {
        case opcode::block:
        case opcode::loop:
        case opcode::if_:
            open.push_back(i);
            break;
        case opcode::else_:
            if (!open.empty())
                map.else_[open.back()] = i;
            break;
        case opcode::end:
            if (!open.empty())
            {
                map.end[open.back()] = i;
                open.pop_back();
            }
            break;
        default:
            break;
        }
    }
    return map;
}

template <typename T>
T shift_count(T b) noexcept
{
    return b & (sizeof(T) * 8 - 1);
}

template <typename T>
T rotl(T a, T b) noexcept
{
    const T k = shift_count(b);
    return k == 0 ? a : static_cast<T>((a << k) | (a >> (sizeof(T) * 8 - k)));
}

template <typename T>
T rotr(T a, T b) noexcept
{
    const T k = shift_count(b);
    return k == 0 ? a : static_cast<T>((a >> k) | (a << (sizeof(T) * 8 - k)));
}

/// Binary integer op on the unsigned representation T (uint32_t / uint64_t).
template <typename T>
uint64_t binary(opcode op, uint8_t base, T a, T b)
{
    using S = std::make_signed_t<T>;
    const auto sa = static_cast<S>(a);
    const auto sb = static_cast<S>(b);
    switch (static_cast<uint8_t>(op) - base)
    {
    case 0:
        return static_cast<T>(a + b);
    case 1:
        return static_cast<T>(a - b);
    case 2:
        return static_cast<T>(a * b);
    case 3:
        if (b == 0)
            trap("DivZero");
        if (sa == std::numeric_limits<S>::min() && sb == -1)
            trap("Overflow");
        return static_cast<T>(sa / sb);
    case 4:
        if (b == 0)
            trap("DivZero");
        return a / b;
    case 5:
        if (b == 0)
            trap("DivZero");
        if (sb == -1)
            return 0;
        return static_cast<T>(sa % sb);
    case 6:
        if (b == 0)
            trap("DivZero");
        return a % b;
    case 7:
        return a & b;
    case 8:
        return a | b;
    case 9:
        return a ^ b;
    case 10:
        return static_cast<T>(a << shift_count(b));
    case 11:
        return static_cast<T>(sa >> shift_count(b));
    case 12:
        return static_cast<T>(a >> shift_count(b));
    case 13:
        return rotl(a, b);
    case 14:
        return rotr(a, b);
    default:
        break;
    }
    throw std::logic_error("not a binary integer opcode");
}

template <typename T>
uint64_t compare(opcode op, uint8_t base, T a, T b)
{
    using S = std::make_signed_t<T>;
    const auto sa = static_cast<S>(a);
    const auto sb = static_cast<S>(b);
    switch (static_cast<uint8_t>(op) - base)
    {
    case 0:
        return a == b;
    case 1:
        return a != b;
    case 2:
        return sa < sb;
    case 3:
        return a < b;
    case 4:
        return sa > sb;
    case 5:
        return a > b;
    case 6:
        return sa <= sb;
    case 7:
        return a <= b;
    case 8:
        return sa >= sb;
    case 9:
        return a >= b;
    default:
        break;
    }
    throw std::logic_error("not a comparison opcode");
}

struct label
{
    size_t height;
    size_t arity;
    uint32_t target;  ///< branch destination (loop start or end index)
    bool loop;
};
}  // namespace

class exec_context
{
public:
    exec_context(Interpreter* interp, uint64_t fuel) : m_interp{interp}, m_fuel{fuel} {}

    uint64_t fuel() const noexcept { return m_fuel; }

    std::vector<uint64_t> call(uint32_t func_index, std::vector<uint64_t> args, unsigned depth)
    {
        if (!m_interp)
            throw stop{Outcome::tag::unsupported, "call"};
        if (depth > max_call_depth)
            throw stop{Outcome::tag::fuel_exhausted, "call depth"};
        const auto& info = m_interp->m_info;
        if (func_index >= info.func_types.size())
            throw stop{Outcome::tag::unsupported, "call"};
        if (info.is_import(func_index))
            throw stop{Outcome::tag::unsupported, "import"};
        const auto defined = func_index - info.imported_funcs;
        const auto* code = m_interp->m_module.code();
        if (!code || defined >= code->size())
            throw stop{Outcome::tag::unsupported, "call"};
        const auto& body = (*code)[defined];
        if (body.opaque)
            throw stop{Outcome::tag::unsupported, "opaque body"};
        const auto& ft = info.func_type(func_index);
        return execute(body, m_interp->controls(defined), ft.params, ft.results, std::move(args),
            depth);
    }

    std::vector<uint64_t> execute(const FunctionBody& body, const Interpreter::control_map& ctl,
        std::span<const valtype> params, std::span<const valtype> results,
        std::vector<uint64_t> args, unsigned depth)
    {
        std::vector<uint64_t> locals = std::move(args);
        locals.resize(params.size(), 0);
        for (size_t i = 0; i < params.size(); ++i)
            if (params[i] == valtype::i32)
                locals[i] &= 0xffffffffu;
        for (const auto& d : body.locals)
        {
            if (!is_integer(d.type))
                throw stop{Outcome::tag::unsupported, "non-integer local"};
            locals.insert(locals.end(), d.count, 0);
        }
        for (const auto t : results)
            if (!is_integer(t))
                throw stop{Outcome::tag::unsupported, "non-integer result"};

        std::vector<uint64_t> st;
        std::vector<label> labels;
        auto pop = [&]() {
            if (st.empty())
                throw stop{Outcome::tag::unsupported, "stack underflow"};
            const auto v = st.back();
            st.pop_back();
            return v;
        };
        auto take_results = [&](size_t n) {
            if (st.size() < n)
                throw stop{Outcome::tag::unsupported, "stack underflow"};
            return std::vector<uint64_t>(st.end() - static_cast<std::ptrdiff_t>(n), st.end());
        };
        auto block_arity = [&](int64_t bt, bool loop) -> std::pair<size_t, size_t> {
            if (bt == blocktype_empty)
                return {0, 0};
            if (bt < 0)
                return {0, loop ? 0 : 1};
            if (!m_interp)
                throw stop{Outcome::tag::unsupported, "block type"};
            const auto& ft = m_interp->m_info.types.at(static_cast<size_t>(bt));
            return {ft.params.size(), loop ? ft.params.size() : ft.results.size()};
        };
        auto local_ref = [&](int64_t idx) -> uint64_t& {
            if (idx < 0 || static_cast<size_t>(idx) >= locals.size())
                throw stop{Outcome::tag::unsupported, "local index"};
            return locals[static_cast<size_t>(idx)];
        };
        auto branch = [&](int64_t depth_imm, uint32_t& pc) {
            if (depth_imm < 0 || static_cast<size_t>(depth_imm) > labels.size())
                throw stop{Outcome::tag::unsupported, "branch depth"};
            if (static_cast<size_t>(depth_imm) == labels.size())
                return true;  // branch to the function body: return
            const auto idx = labels.size() - 1 - static_cast<size_t>(depth_imm);
            const auto l = labels[idx];
            const auto vals = take_results(l.arity);
            st.resize(l.height);
            st.insert(st.end(), vals.begin(), vals.end());
            if (l.loop)
            {
                labels.resize(idx + 1);
                pc = l.target;
            }
            else
            {
                labels.resize(idx + 1);
                pc = l.target;  // the matching end pops the label
            }
            return false;
        };

        const auto& code = body.instrs;
        uint32_t pc = 0;
        while (pc < code.size())
        {
            if (m_fuel == 0)
                throw stop{Outcome::tag::fuel_exhausted, {}};
            --m_fuel;
            const auto& ins = code[pc];
            const auto b = static_cast<uint8_t>(ins.op);
            switch (ins.op)
            {
            case opcode::nop:
                break;
            case opcode::block:
            case opcode::loop:
            {
                const bool loop = ins.op == opcode::loop;
                const auto [nparams, arity] = block_arity(ins.imm, loop);
                labels.push_back({st.size() - nparams, arity, loop ? pc + 1 : ctl.end[pc], loop});
                break;
            }
            case opcode::if_:
            {
                const auto cond = pop();
                const auto [nparams, arity] = block_arity(ins.imm, false);
                labels.push_back({st.size() - nparams, arity, ctl.end[pc], false});
                if (cond == 0)
                {
                    if (ctl.else_[pc] != 0)
                        pc = ctl.else_[pc];
                    else
                    {
                        pc = ctl.end[pc];
                        continue;
                    }
                }
                break;
            }
            case opcode::else_:
                // End of the then-arm: continue at the matching end.
                pc = labels.back().target;
                continue;
            case opcode::end:
                if (labels.empty())
                    return take_results(results.size());
                labels.pop_back();
                break;
            case opcode::br:
                if (branch(ins.imm, pc))
                    return take_results(results.size());
                continue;
            case opcode::br_if:
                if (pop() != 0)
                {
                    if (branch(ins.imm, pc))
                        return take_results(results.size());
                    continue;
                }
                break;
            case opcode::return_:
                return take_results(results.size());
            case opcode::call:
            {
                if (!m_interp)
                    throw stop{Outcome::tag::unsupported, "call"};
                const auto f = static_cast<uint32_t>(ins.imm);
                if (f >= m_interp->m_info.func_types.size())
                    throw stop{Outcome::tag::unsupported, "call"};
                const auto& ft = m_interp->m_info.func_type(f);
                auto args_in = take_results(ft.params.size());
                st.resize(st.size() - ft.params.size());
                auto out = call(f, std::move(args_in), depth + 1);
                st.insert(st.end(), out.begin(), out.end());
                break;
            }
            case opcode::drop:
                pop();
                break;
            case opcode::select:
            {
                const auto c = pop();
                const auto y = pop();
                const auto x = pop();
                st.push_back(c != 0 ? x : y);
                break;
            }
            case opcode::local_get:
                st.push_back(local_ref(ins.imm));
                break;
            case opcode::local_set:
                local_ref(ins.imm) = pop();
                break;
            case opcode::local_tee:
            {
                const auto v = pop();
                local_ref(ins.imm) = v;
                st.push_back(v);
                break;
            }
            case opcode::i32_const:
                st.push_back(static_cast<uint32_t>(ins.imm));
                break;
            case opcode::i64_const:
                st.push_back(static_cast<uint64_t>(ins.imm));
                break;
            case opcode::i32_eqz:
                st.push_back(static_cast<uint32_t>(pop()) == 0);
                break;
            case opcode::i64_eqz:
                st.push_back(pop() == 0);
                break;
            case opcode::i32_wrap_i64:
                st.push_back(static_cast<uint32_t>(pop()));
                break;
            case opcode::i64_extend_i32_s:
                st.push_back(static_cast<uint64_t>(
                    static_cast<int64_t>(static_cast<int32_t>(static_cast<uint32_t>(pop())))));
                break;
            case opcode::i64_extend_i32_u:
                st.push_back(static_cast<uint32_t>(pop()));
                break;
            case opcode::unsupported:
                unsupported(ins);
            default:
            {
                const auto y = pop();
                const auto x = pop();
                if (b >= 0x46 && b <= 0x4f)
                    st.push_back(compare<uint32_t>(ins.op, 0x46, static_cast<uint32_t>(x),
                        static_cast<uint32_t>(y)));
                else if (b >= 0x51 && b <= 0x5a)
                    st.push_back(compare<uint64_t>(ins.op, 0x51, x, y));
                else if (b >= 0x6a && b <= 0x78)
                    st.push_back(binary<uint32_t>(ins.op, 0x6a, static_cast<uint32_t>(x),
                        static_cast<uint32_t>(y)));
                else if (b >= 0x7c && b <= 0x8a)
                    st.push_back(binary<uint64_t>(ins.op, 0x7c, x, y));
                else
                    unsupported(ins);
                break;
            }
            }
            ++pc;
        }
        return take_results(results.size());
    }

private:
    Interpreter* m_interp;
    uint64_t m_fuel;
};

std::string to_string(const Outcome& o)
{
    switch (o.t)
    {
    case Outcome::tag::returned:
    {
        std::string s = "Returned(";
        for (size_t i = 0; i < o.values.size(); ++i)
            s += (i ? ", " : "") + std::to_string(o.values[i]);
        return s + ")";
    }
    case Outcome::tag::trapped:
        return "Trapped(" + o.detail + ")";
    case Outcome::tag::fuel_exhausted:
        return "FuelExhausted";
    case Outcome::tag::unsupported:
        return "Unsupported(" + o.detail + ")";
    }
    return "?";
}

Interpreter::Interpreter(const WasmModule& m) : Interpreter{m, read_module_info(m)} {}

Interpreter::Interpreter(const WasmModule& m, ModuleInfo info)
  : m_module{m}, m_info{std::move(info)}
{}

const Interpreter::control_map& Interpreter::controls(uint32_t defined_index)
{
    auto it = m_controls.find(defined_index);
    if (it == m_controls.end())
        it = m_controls.emplace(defined_index, build_controls(m_module.code()->at(defined_index)))
                 .first;
    return it->second;
}

Outcome Interpreter::run(uint32_t func_index, std::span<const uint64_t> args, uint64_t fuel)
{
    exec_context ctx{this, fuel};
    Outcome out;
    try
    {
        out.values = ctx.call(func_index, {args.begin(), args.end()}, 0);
        out.t = Outcome::tag::returned;
    }
    catch (const stop& s)
    {
        out.t = s.t;
        out.detail = s.detail;
    }
    out.fuel_used = fuel - ctx.fuel();
    return out;
}

Outcome exec_function(const WasmModule& m, uint32_t func_index, std::span<const uint64_t> args,
    uint64_t fuel)
{
    Interpreter interp{m};
    return interp.run(func_index, args, fuel);
}

Outcome exec_body(const FunctionBody& body, std::span<const valtype> params,
    std::span<const valtype> results, std::span<const uint64_t> args, uint64_t fuel)
{
    exec_context ctx{nullptr, fuel};
    Outcome out;
    try
    {
        const auto ctl = build_controls(body);
        out.values = ctx.execute(body, ctl, params, results, {args.begin(), args.end()}, 0);
        out.t = Outcome::tag::returned;
    }
    catch (const stop& s)
    {
        out.t = s.t;
        out.detail = s.detail;
    }
    out.fuel_used = fuel - ctx.fuel();
    return out;
}

namespace
{
/// True when `func` and everything it can call stay inside the executable subset.
bool is_pure(const Interpreter& interp, const WasmModule& m, uint32_t func)
{
    const auto& info = interp.info();
    const auto* code = m.code();
    std::set<uint32_t> seen;
    std::vector<uint32_t> work{func};
    while (!work.empty())
    {
        const auto f = work.back();
        work.pop_back();
        if (!seen.insert(f).second)
            continue;
        if (f >= info.func_types.size() || info.is_import(f))
            return false;
        const auto defined = f - info.imported_funcs;
        if (!code || defined >= code->size())
            return false;
        const auto& body = (*code)[defined];
        if (body.opaque)
            return false;
        for (const auto& d : body.locals)
            if (!is_integer(d.type))
                return false;
        for (const auto t : info.func_type(f).results)
            if (!is_integer(t))
                return false;
        for (const auto& ins : body.instrs)
        {
            if (ins.op == opcode::unsupported)
                return false;
            if (ins.op == opcode::call)
                work.push_back(static_cast<uint32_t>(ins.imm));
        }
    }
    return true;
}
}  // namespace

std::optional<FunctionBody> constfold_pure_function(Interpreter& interp, uint32_t func_index,
    uint64_t fuel)
{
    const auto& info = interp.info();
    if (func_index >= info.func_types.size() || info.is_import(func_index))
        return std::nullopt;
    const auto& ft = info.func_type(func_index);
    if (!ft.params.empty() || !is_pure(interp, interp.module(), func_index))
        return std::nullopt;
    const auto out = interp.run(func_index, {}, fuel);
    if (out.t != Outcome::tag::returned)
        return std::nullopt;
    FunctionBody body;
    for (size_t i = 0; i < ft.results.size(); ++i)
    {
        Instruction ins;
        if (ft.results[i] == valtype::i64)
        {
            ins.op = opcode::i64_const;
            ins.imm = static_cast<int64_t>(out.values[i]);
        }
        else
        {
            ins.op = opcode::i32_const;
            ins.imm = static_cast<int32_t>(static_cast<uint32_t>(out.values[i]));
        }
        body.instrs.push_back(ins);
    }
    body.instrs.push_back(Instruction{opcode::end, 0, {}});
    return body;
}

std::optional<FunctionBody> constfold_pure_function(const WasmModule& m, uint32_t func_index,
    uint64_t fuel)
{
    Interpreter interp{m};
    return constfold_pure_function(interp, func_index, fuel);
}
}  // namespace wsopt
