// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/wasm_binary.hpp"
#include "wsopt/opcode_info.hpp"
#include <algorithm>
#include <array>
#include <sstream>

namespace wsopt
{
namespace
{
constexpr std::array<uint8_t, 4> wasm_magic{0x00, 0x61, 0x73, 0x6d};
constexpr std::array<uint8_t, 4> wasm_version{0x01, 0x00, 0x00, 0x00};
constexpr uint8_t code_section_id = 10;

/// Bounds-checked cursor over the input; offsets are absolute within the module.
class reader
{
public:
    reader(bytes_view data, size_t base) : m_data{data}, m_base{base} {}

    size_t offset() const noexcept { return m_base + m_pos; }
    bool eof() const noexcept { return m_pos >= m_data.size(); }
    size_t remaining() const noexcept { return m_data.size() - m_pos; }

    uint8_t byte()
    {
        if (eof())
            throw decode_error(decode_error_kind::truncated_input, offset());
        return m_data[m_pos++];
    }

    uint32_t u32()
    {
        leb_result<uint32_t> r{};
        check(read_uleb<uint32_t>(m_data.subspan(m_pos), r));
        m_pos += r.length;
        return r.value;
    }

    template <unsigned N>
    int64_t sleb()
    {
        leb_result<int64_t> r{};
        check(read_sleb<N>(m_data.subspan(m_pos), r));
        m_pos += r.length;
        return r.value;
    }

    bytes_view take(size_t n)
    {
        if (remaining() < n)
            throw decode_error(decode_error_kind::truncated_input, m_base + m_data.size());
        const auto out = m_data.subspan(m_pos, n);
        m_pos += n;
        return out;
    }

    bytes_view rest() const noexcept { return m_data.subspan(m_pos); }
    void skip(size_t n) noexcept { m_pos += n; }

private:
    void check(leb_status st) const
    {
        if (st == leb_status::truncated)
            throw decode_error(decode_error_kind::truncated_input, offset());
        if (st == leb_status::malformed)
            throw decode_error(decode_error_kind::malformed_leb128, offset());
    }

    bytes_view m_data;
    size_t m_base;
    size_t m_pos = 0;
};

valtype decode_valtype(uint8_t b, size_t offset)
{
    switch (b)
    {
    case 0x7f:
    case 0x7e:
    case 0x7d:
    case 0x7c:
    case 0x7b:
    case 0x70:
    case 0x6f:
        return static_cast<valtype>(b);
    default:
        throw decode_error(decode_error_kind::malformed_body, offset, "invalid value type");
    }
}

std::vector<FunctionBody> decode_code_section(bytes_view payload, size_t base)
{
    reader r{payload, base};
    const auto count = r.u32();
    std::vector<FunctionBody> bodies;
    bodies.reserve(std::min<size_t>(count, payload.size()));
    for (uint32_t i = 0; i < count; ++i)
    {
        const auto size = r.u32();
        const auto body_offset = r.offset();
        const auto body = r.take(size);
        bodies.push_back(decode_function_body(body, body_offset));
    }
    if (!r.eof())
        throw decode_error(decode_error_kind::section_size_mismatch, r.offset(),
            "trailing bytes in code section");
    return bodies;
}
}  // namespace

std::string_view to_string(valtype t) noexcept
{
    switch (t)
    {
    case valtype::i32:
        return "i32";
    case valtype::i64:
        return "i64";
    case valtype::f32:
        return "f32";
    case valtype::f64:
        return "f64";
    case valtype::v128:
        return "v128";
    case valtype::funcref:
        return "funcref";
    case valtype::externref:
        return "externref";
    }
    return "?";
}

bool is_supported_opcode(uint8_t byte) noexcept
{
    switch (byte)
    {
    case 0x01:
    case 0x02:
    case 0x03:
    case 0x04:
    case 0x05:
    case 0x0b:
    case 0x0c:
    case 0x0d:
    case 0x0f:
    case 0x10:
    case 0x1a:
    case 0x1b:
    case 0x20:
    case 0x21:
    case 0x22:
    case 0x41:
    case 0x42:
    case 0xa7:
    case 0xac:
    case 0xad:
        return true;
    default:
        return (byte >= 0x45 && byte <= 0x5a) || (byte >= 0x6a && byte <= 0x78) ||
               (byte >= 0x7c && byte <= 0x8a);
    }
}

std::string_view mnemonic(opcode op) noexcept
{
    if (op == opcode::unsupported)
        return "<unsupported>";
    return info_for(static_cast<uint8_t>(op)).name;
}

std::string_view to_string(decode_error_kind kind) noexcept
{
    switch (kind)
    {
    case decode_error_kind::bad_magic:
        return "BadMagic";
    case decode_error_kind::bad_version:
        return "BadVersion";
    case decode_error_kind::truncated_input:
        return "TruncatedInput";
    case decode_error_kind::malformed_leb128:
        return "MalformedLeb128";
    case decode_error_kind::section_size_mismatch:
        return "SectionSizeMismatch";
    case decode_error_kind::malformed_body:
        return "MalformedBody";
    case decode_error_kind::too_large:
        return "TooLarge";
    }
    return "?";
}

decode_error::decode_error(decode_error_kind kind, size_t offset, const std::string& detail)
  : std::runtime_error{std::string{to_string(kind)} + " at offset " + std::to_string(offset) +
                       (detail.empty() ? "" : ": " + detail)},
    m_kind{kind},
    m_offset{offset}
{}

uint64_t FunctionBody::local_count() const noexcept
{
    uint64_t n = 0;
    for (const auto& d : locals)
        n += d.count;
    return n;
}

const std::vector<FunctionBody>* WasmModule::code() const noexcept
{
    for (const auto& s : sections)
        if (s.id == code_section_id && s.code)
            return &*s.code;
    return nullptr;
}

std::vector<FunctionBody>* WasmModule::code() noexcept
{
    for (auto& s : sections)
        if (s.id == code_section_id && s.code)
            return &*s.code;
    return nullptr;
}

const Section* WasmModule::find_section(uint8_t id) const noexcept
{
    for (const auto& s : sections)
        if (s.id == id)
            return &s;
    return nullptr;
}

FunctionBody decode_function_body(bytes_view body, size_t base_offset)
{
    FunctionBody fb;
    fb.raw = bytes(body.begin(), body.end());

    reader r{body, base_offset};
    const auto groups = r.u32();
    uint64_t total_locals = 0;
    for (uint32_t i = 0; i < groups; ++i)
    {
        const auto count = r.u32();
        const auto off = r.offset();
        const auto type = decode_valtype(r.byte(), off);
        total_locals += count;
        if (total_locals > 50'000)
            throw decode_error(decode_error_kind::malformed_body, off, "too many locals");
        fb.locals.push_back({count, type});
    }

    int depth = 0;
    bool closed = false;
    while (!r.eof())
    {
        if (closed)
            throw decode_error(decode_error_kind::section_size_mismatch, r.offset(),
                "bytes after final end of function body");

        const auto at = r.offset();
        const uint8_t b = r.rest()[0];
        if (!is_supported_opcode(b))
        {
            const auto len = instruction_length(r.rest(), at);
            if (!len)
            {
                // Unknown opcode: the remaining expression cannot be sized.
                fb.instrs.clear();
                fb.opaque = true;
                return fb;
            }
            Instruction ins;
            ins.op = opcode::unsupported;
            const auto raw = r.take(*len);
            ins.raw.assign(raw.begin(), raw.end());
            fb.instrs.push_back(std::move(ins));
            continue;
        }

        r.skip(1);
        Instruction ins;
        ins.op = static_cast<opcode>(b);
        switch (ins.op)
        {
        case opcode::block:
        case opcode::loop:
        case opcode::if_:
            ins.imm = r.sleb<33>();
            ++depth;
            break;
        case opcode::end:
            if (depth == 0)
                closed = true;
            else
                --depth;
            break;
        case opcode::br:
        case opcode::br_if:
        case opcode::call:
        case opcode::local_get:
        case opcode::local_set:
        case opcode::local_tee:
            ins.imm = r.u32();
            break;
        case opcode::i32_const:
            ins.imm = r.sleb<32>();
            break;
        case opcode::i64_const:
            ins.imm = r.sleb<64>();
            break;
        default:
            break;
        }
        fb.instrs.push_back(std::move(ins));
    }
    if (!closed)
        throw decode_error(decode_error_kind::truncated_input, base_offset + body.size(),
            "function body is missing its final end");
    return fb;
}

void encode_instruction(bytes& out, const Instruction& ins)
{
    if (ins.op == opcode::unsupported)
    {
        if (ins.raw.empty())
            throw encode_error("UnencodableInstruction: unsupported instruction without raw bytes");
        out.insert(out.end(), ins.raw.begin(), ins.raw.end());
        return;
    }
    out.push_back(static_cast<uint8_t>(ins.op));
    switch (ins.op)
    {
    case opcode::block:
    case opcode::loop:
    case opcode::if_:
    case opcode::i32_const:
    case opcode::i64_const:
        write_sleb(out, ins.imm);
        break;
    case opcode::br:
    case opcode::br_if:
    case opcode::call:
    case opcode::local_get:
    case opcode::local_set:
    case opcode::local_tee:
        write_uleb(out, static_cast<uint64_t>(ins.imm));
        break;
    default:
        break;
    }
}

bytes encode_function_body(const FunctionBody& body)
{
    if (body.raw)
        return *body.raw;
    if (body.opaque)
        throw encode_error("UnencodableInstruction: opaque body lost its raw bytes");
    bytes out;
    write_uleb(out, body.locals.size());
    for (const auto& d : body.locals)
    {
        write_uleb(out, d.count);
        out.push_back(static_cast<uint8_t>(d.type));
    }
    for (const auto& ins : body.instrs)
        encode_instruction(out, ins);
    return out;
}

bytes encode_code_payload(const std::vector<FunctionBody>& bodies)
{
    bytes out;
    write_uleb(out, bodies.size());
    for (const auto& b : bodies)
    {
        const auto enc = encode_function_body(b);
        write_uleb(out, enc.size());
        out.insert(out.end(), enc.begin(), enc.end());
    }
    return out;
}

WasmModule decode_module(bytes_view input)
{
    if (input.size() > max_module_size)
        throw decode_error(decode_error_kind::too_large, max_module_size,
            "module exceeds " + std::to_string(max_module_size) + " bytes");

    reader r{input, 0};
    const auto magic = r.take(std::min<size_t>(4, input.size()));
    if (magic.size() < 4 || !std::equal(magic.begin(), magic.end(), wasm_magic.begin()))
        throw decode_error(decode_error_kind::bad_magic, 0);
    if (r.remaining() < 4)
        throw decode_error(decode_error_kind::truncated_input, r.offset());
    const auto version = r.take(4);
    if (!std::equal(version.begin(), version.end(), wasm_version.begin()))
        throw decode_error(decode_error_kind::bad_version, 4);

    WasmModule m;
    m.preamble.assign(input.begin(), input.begin() + 8);

    uint8_t last_id = 0;
    while (!r.eof())
    {
        const auto start = r.offset();
        Section s;
        s.id = r.byte();
        if (s.id > 12)
            throw decode_error(decode_error_kind::malformed_body, start, "unknown section id");
        const auto size_offset = r.offset();
        const auto size = r.u32();
        if (size > r.remaining())
            throw decode_error(decode_error_kind::section_size_mismatch, size_offset,
                "section size exceeds input");
        const auto payload_offset = r.offset();
        const auto payload = r.take(size);
        if (s.id != 0)
        {
            // The data count section (12) is placed between import-ish and code sections.
            const auto order = [](uint8_t id) { return id == 12 ? 9.5 : double(id); };
            if (last_id != 0 && order(s.id) <= order(last_id))
                throw decode_error(decode_error_kind::malformed_body, start,
                    "section out of order");
            last_id = s.id;
        }
        s.payload.assign(payload.begin(), payload.end());
        s.raw.assign(input.begin() + static_cast<std::ptrdiff_t>(start),
            input.begin() + static_cast<std::ptrdiff_t>(payload_offset + size));
        if (s.id == code_section_id)
            s.code = decode_code_section(payload, payload_offset);
        m.sections.push_back(std::move(s));
    }
    return m;
}

bytes encode_module(const WasmModule& module)
{
    bytes out = module.preamble;
    for (const auto& s : module.sections)
    {
        const bool untouched =
            !s.code || std::all_of(s.code->begin(), s.code->end(),
                           [](const FunctionBody& b) { return b.raw.has_value(); });
        if (untouched && !s.raw.empty())
        {
            out.insert(out.end(), s.raw.begin(), s.raw.end());
            continue;
        }
        const bytes payload = s.code ? encode_code_payload(*s.code) : s.payload;
        out.push_back(s.id);
        write_uleb(out, payload.size());
        out.insert(out.end(), payload.begin(), payload.end());
    }
    return out;
}

uint64_t count_instructions(const FunctionBody& body) noexcept
{
    if (body.instrs.empty())
        return 0;
    return body.instrs.size() - (body.instrs.back().op == opcode::end ? 1 : 0);
}

uint64_t count_instructions(const WasmModule& module) noexcept
{
    const auto* code = module.code();
    if (!code)
        return 0;
    uint64_t n = 0;
    for (const auto& b : *code)
        n += count_instructions(b);
    return n;
}

uint64_t code_section_size(const WasmModule& module)
{
    for (const auto& s : module.sections)
    {
        if (s.id != code_section_id)
            continue;
        if (!s.code)
            return s.payload.size();
        const bool untouched = std::all_of(s.code->begin(), s.code->end(),
            [](const FunctionBody& b) { return b.raw.has_value(); });
        return untouched ? s.payload.size() : encode_code_payload(*s.code).size();
    }
    return 0;
}

std::string to_string(const Instruction& ins)
{
    std::ostringstream os;
    if (ins.op == opcode::unsupported)
    {
        const auto info = describe_raw(ins.raw);
        os << (info.name.empty() ? "<unknown>" : info.name);
        return os.str();
    }
    os << mnemonic(ins.op);
    switch (ins.op)
    {
    case opcode::block:
    case opcode::loop:
    case opcode::if_:
        if (ins.imm == blocktype_i32)
            os << " (result i32)";
        else if (ins.imm == blocktype_i64)
            os << " (result i64)";
        else if (ins.imm >= 0)
            os << " (type " << ins.imm << ")";
        break;
    case opcode::br:
    case opcode::br_if:
    case opcode::call:
    case opcode::local_get:
    case opcode::local_set:
    case opcode::local_tee:
    case opcode::i32_const:
    case opcode::i64_const:
        os << ' ' << ins.imm;
        break;
    default:
        break;
    }
    return os.str();
}
}  // namespace wsopt
