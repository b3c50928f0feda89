// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/module_info.hpp"

namespace wsopt
{
namespace
{
class cursor
{
public:
    explicit cursor(bytes_view data) : m_data{data} {}

    bool eof() const noexcept { return m_pos >= m_data.size(); }

    uint8_t byte()
    {
        if (eof())
            throw decode_error(decode_error_kind::truncated_input, m_pos);
        return m_data[m_pos++];
    }

    uint32_t u32()
    {
        leb_result<uint32_t> r{};
        const auto st = read_uleb<uint32_t>(m_data.subspan(m_pos), r);
        if (st == leb_status::truncated)
            throw decode_error(decode_error_kind::truncated_input, m_pos);
        if (st == leb_status::malformed)
            throw decode_error(decode_error_kind::malformed_leb128, m_pos);
        m_pos += r.length;
        return r.value;
    }

    void skip(size_t n)
    {
        if (m_data.size() - m_pos < n)
            throw decode_error(decode_error_kind::truncated_input, m_data.size());
        m_pos += n;
    }

    std::string name()
    {
        const auto n = u32();
        const auto start = m_pos;
        skip(n);
        return {reinterpret_cast<const char*>(m_data.data() + start), n};
    }

    void skip_limits()
    {
        const auto flags = byte();
        u32();
        if (flags & 1)
            u32();
    }

    /// Skips a constant initializer expression up to its `end`.
    void skip_const_expr()
    {
        while (true)
        {
            const auto op = byte();
            switch (op)
            {
            case 0x0b:
                return;
            case 0x41:
            case 0x42:
            {
                leb_result<int64_t> r{};
                if (read_sleb<64>(m_data.subspan(m_pos), r) != leb_status::ok)
                    throw decode_error(decode_error_kind::malformed_leb128, m_pos);
                m_pos += r.length;
                break;
            }
            case 0x43:
                skip(4);
                break;
            case 0x44:
                skip(8);
                break;
            case 0x23:
            case 0xd2:
                u32();
                break;
            case 0xd0:
                byte();
                break;
            default:
                throw decode_error(decode_error_kind::malformed_body, m_pos,
                    "unsupported constant expression");
            }
        }
    }

private:
    bytes_view m_data;
    size_t m_pos = 0;
};

valtype to_valtype(uint8_t b)
{
    return static_cast<valtype>(b);
}
}  // namespace

const FuncType& ModuleInfo::func_type(uint32_t func_index) const
{
    return types.at(func_types.at(func_index));
}

std::optional<uint32_t> ModuleInfo::find_export(std::string_view name) const noexcept
{
    for (const auto& e : exports)
        if (e.kind == 0 && e.name == name)
            return e.index;
    return std::nullopt;
}

std::vector<valtype> ModuleInfo::local_types(uint32_t func_index, const FunctionBody& body) const
{
    std::vector<valtype> out = func_type(func_index).params;
    for (const auto& d : body.locals)
        out.insert(out.end(), d.count, d.type);
    return out;
}

ModuleInfo read_module_info(const WasmModule& module)
{
    ModuleInfo info;
    for (const auto& s : module.sections)
    {
        cursor c{s.payload};
        switch (s.id)
        {
        case 1:
        {
            const auto n = c.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                if (c.byte() != 0x60)
                    throw decode_error(decode_error_kind::malformed_body, 0, "bad function type");
                FuncType ft;
                const auto np = c.u32();
                for (uint32_t k = 0; k < np; ++k)
                    ft.params.push_back(to_valtype(c.byte()));
                const auto nr = c.u32();
                for (uint32_t k = 0; k < nr; ++k)
                    ft.results.push_back(to_valtype(c.byte()));
                info.types.push_back(std::move(ft));
            }
            break;
        }
        case 2:
        {
            const auto n = c.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                c.name();
                c.name();
                const auto kind = c.byte();
                switch (kind)
                {
                case 0:
                    info.func_types.push_back(c.u32());
                    ++info.imported_funcs;
                    break;
                case 1:
                    c.byte();
                    c.skip_limits();
                    break;
                case 2:
                    c.skip_limits();
                    break;
                case 3:
                    info.globals.push_back(to_valtype(c.byte()));
                    c.byte();
                    break;
                default:
                    throw decode_error(decode_error_kind::malformed_body, 0, "bad import kind");
                }
            }
            break;
        }
        case 3:
        {
            const auto n = c.u32();
            for (uint32_t i = 0; i < n; ++i)
                info.func_types.push_back(c.u32());
            break;
        }
        case 6:
        {
            const auto n = c.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                info.globals.push_back(to_valtype(c.byte()));
                c.byte();
                c.skip_const_expr();
            }
            break;
        }
        case 7:
        {
            const auto n = c.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                Export e;
                e.name = c.name();
                e.kind = c.byte();
                e.index = c.u32();
                info.exports.push_back(std::move(e));
            }
            break;
        }
        default:
            break;
        }
    }
    for (const auto t : info.func_types)
        if (t >= info.types.size())
            throw decode_error(decode_error_kind::malformed_body, 0, "function type out of range");
    return info;
}

FuncType block_signature(const ModuleInfo& info, int64_t blocktype)
{
    if (blocktype == blocktype_empty)
        return {};
    if (blocktype < 0)
        return {{}, {static_cast<valtype>(blocktype & 0x7f)}};
    return info.types.at(static_cast<size_t>(blocktype));
}
}  // namespace wsopt
