// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/opcode_info.hpp"
#include "wsopt/wasm_binary.hpp"
#include <array>

namespace wsopt
{
namespace
{
using table_t = std::array<opcode_info, 256>;

constexpr void set(table_t& t, uint8_t byte, imm_kind imm, stack_effect effect,
    std::string_view sig, std::string_view name)
{
    t[byte] = opcode_info{imm, effect, sig, name};
}

constexpr void fixed(table_t& t, uint8_t byte, std::string_view sig, std::string_view name,
    imm_kind imm = imm_kind::none)
{
    set(t, byte, imm, stack_effect::fixed, sig, name);
}

constexpr table_t make_table()
{
    table_t t{};
    using enum imm_kind;
    using se = stack_effect;

    set(t, 0x00, none, se::unreachable, "", "unreachable");
    set(t, 0x01, none, se::structured, "", "nop");
    set(t, 0x02, blocktype, se::structured, "", "block");
    set(t, 0x03, blocktype, se::structured, "", "loop");
    set(t, 0x04, blocktype, se::structured, "", "if");
    set(t, 0x05, none, se::structured, "", "else");
    set(t, 0x0b, none, se::structured, "", "end");
    set(t, 0x0c, u32, se::structured, "", "br");
    set(t, 0x0d, u32, se::structured, "", "br_if");
    set(t, 0x0e, br_table, se::br_table, "", "br_table");
    set(t, 0x0f, none, se::structured, "", "return");
    set(t, 0x10, u32, se::structured, "", "call");
    set(t, 0x11, u32x2, se::call_indirect, "", "call_indirect");
    set(t, 0x1a, none, se::structured, "", "drop");
    set(t, 0x1b, none, se::structured, "", "select");
    set(t, 0x1c, select_types, se::select_typed, "", "select");
    set(t, 0x20, u32, se::structured, "", "local.get");
    set(t, 0x21, u32, se::structured, "", "local.set");
    set(t, 0x22, u32, se::structured, "", "local.tee");
    set(t, 0x23, u32, se::global_get, "", "global.get");
    set(t, 0x24, u32, se::global_set, "", "global.set");
    set(t, 0x25, u32, se::unknown, "", "table.get");
    set(t, 0x26, u32, se::unknown, "", "table.set");

    fixed(t, 0x28, "i:i", "i32.load", memarg);
    fixed(t, 0x29, "i:l", "i64.load", memarg);
    fixed(t, 0x2a, "i:f", "f32.load", memarg);
    fixed(t, 0x2b, "i:d", "f64.load", memarg);
    fixed(t, 0x2c, "i:i", "i32.load8_s", memarg);
    fixed(t, 0x2d, "i:i", "i32.load8_u", memarg);
    fixed(t, 0x2e, "i:i", "i32.load16_s", memarg);
    fixed(t, 0x2f, "i:i", "i32.load16_u", memarg);
    fixed(t, 0x30, "i:l", "i64.load8_s", memarg);
    fixed(t, 0x31, "i:l", "i64.load8_u", memarg);
    fixed(t, 0x32, "i:l", "i64.load16_s", memarg);
    fixed(t, 0x33, "i:l", "i64.load16_u", memarg);
    fixed(t, 0x34, "i:l", "i64.load32_s", memarg);
    fixed(t, 0x35, "i:l", "i64.load32_u", memarg);
    fixed(t, 0x36, "ii:", "i32.store", memarg);
    fixed(t, 0x37, "il:", "i64.store", memarg);
    fixed(t, 0x38, "if:", "f32.store", memarg);
    fixed(t, 0x39, "id:", "f64.store", memarg);
    fixed(t, 0x3a, "ii:", "i32.store8", memarg);
    fixed(t, 0x3b, "ii:", "i32.store16", memarg);
    fixed(t, 0x3c, "il:", "i64.store8", memarg);
    fixed(t, 0x3d, "il:", "i64.store16", memarg);
    fixed(t, 0x3e, "il:", "i64.store32", memarg);
    fixed(t, 0x3f, ":i", "memory.size", u32);
    fixed(t, 0x40, "i:i", "memory.grow", u32);

    fixed(t, 0x41, ":i", "i32.const", sleb32);
    fixed(t, 0x42, ":l", "i64.const", sleb64);
    fixed(t, 0x43, ":f", "f32.const", bytes4);
    fixed(t, 0x44, ":d", "f64.const", bytes8);

    fixed(t, 0x45, "i:i", "i32.eqz");
    constexpr std::string_view i32_cmp[] = {"i32.eq", "i32.ne", "i32.lt_s", "i32.lt_u",
        "i32.gt_s", "i32.gt_u", "i32.le_s", "i32.le_u", "i32.ge_s", "i32.ge_u"};
    for (uint8_t i = 0; i < 10; ++i)
        fixed(t, static_cast<uint8_t>(0x46 + i), "ii:i", i32_cmp[i]);
    fixed(t, 0x50, "l:i", "i64.eqz");
    constexpr std::string_view i64_cmp[] = {"i64.eq", "i64.ne", "i64.lt_s", "i64.lt_u",
        "i64.gt_s", "i64.gt_u", "i64.le_s", "i64.le_u", "i64.ge_s", "i64.ge_u"};
    for (uint8_t i = 0; i < 10; ++i)
        fixed(t, static_cast<uint8_t>(0x51 + i), "ll:i", i64_cmp[i]);
    constexpr std::string_view f32_cmp[] = {
        "f32.eq", "f32.ne", "f32.lt", "f32.gt", "f32.le", "f32.ge"};
    for (uint8_t i = 0; i < 6; ++i)
        fixed(t, static_cast<uint8_t>(0x5b + i), "ff:i", f32_cmp[i]);
    constexpr std::string_view f64_cmp[] = {
        "f64.eq", "f64.ne", "f64.lt", "f64.gt", "f64.le", "f64.ge"};
    for (uint8_t i = 0; i < 6; ++i)
        fixed(t, static_cast<uint8_t>(0x61 + i), "dd:i", f64_cmp[i]);

    fixed(t, 0x67, "i:i", "i32.clz");
    fixed(t, 0x68, "i:i", "i32.ctz");
    fixed(t, 0x69, "i:i", "i32.popcnt");
    constexpr std::string_view int_bin[] = {"add", "sub", "mul", "div_s", "div_u", "rem_s",
        "rem_u", "and", "or", "xor", "shl", "shr_s", "shr_u", "rotl", "rotr"};
    constexpr std::string_view i32_bin[] = {"i32.add", "i32.sub", "i32.mul", "i32.div_s",
        "i32.div_u", "i32.rem_s", "i32.rem_u", "i32.and", "i32.or", "i32.xor", "i32.shl",
        "i32.shr_s", "i32.shr_u", "i32.rotl", "i32.rotr"};
    constexpr std::string_view i64_bin[] = {"i64.add", "i64.sub", "i64.mul", "i64.div_s",
        "i64.div_u", "i64.rem_s", "i64.rem_u", "i64.and", "i64.or", "i64.xor", "i64.shl",
        "i64.shr_s", "i64.shr_u", "i64.rotl", "i64.rotr"};
    static_assert(std::size(int_bin) == 15);
    for (uint8_t i = 0; i < 15; ++i)
    {
        fixed(t, static_cast<uint8_t>(0x6a + i), "ii:i", i32_bin[i]);
        fixed(t, static_cast<uint8_t>(0x7c + i), "ll:l", i64_bin[i]);
    }
    fixed(t, 0x79, "l:l", "i64.clz");
    fixed(t, 0x7a, "l:l", "i64.ctz");
    fixed(t, 0x7b, "l:l", "i64.popcnt");

    constexpr std::string_view f32_un[] = {"f32.abs", "f32.neg", "f32.ceil", "f32.floor",
        "f32.trunc", "f32.nearest", "f32.sqrt"};
    constexpr std::string_view f32_bin[] = {
        "f32.add", "f32.sub", "f32.mul", "f32.div", "f32.min", "f32.max", "f32.copysign"};
    constexpr std::string_view f64_un[] = {"f64.abs", "f64.neg", "f64.ceil", "f64.floor",
        "f64.trunc", "f64.nearest", "f64.sqrt"};
    constexpr std::string_view f64_bin[] = {
        "f64.add", "f64.sub", "f64.mul", "f64.div", "f64.min", "f64.max", "f64.copysign"};
    for (uint8_t i = 0; i < 7; ++i)
    {
        fixed(t, static_cast<uint8_t>(0x8b + i), "f:f", f32_un[i]);
        fixed(t, static_cast<uint8_t>(0x92 + i), "ff:f", f32_bin[i]);
        fixed(t, static_cast<uint8_t>(0x99 + i), "d:d", f64_un[i]);
        fixed(t, static_cast<uint8_t>(0xa0 + i), "dd:d", f64_bin[i]);
    }

    fixed(t, 0xa7, "l:i", "i32.wrap_i64");
    fixed(t, 0xa8, "f:i", "i32.trunc_f32_s");
    fixed(t, 0xa9, "f:i", "i32.trunc_f32_u");
    fixed(t, 0xaa, "d:i", "i32.trunc_f64_s");
    fixed(t, 0xab, "d:i", "i32.trunc_f64_u");
    fixed(t, 0xac, "i:l", "i64.extend_i32_s");
    fixed(t, 0xad, "i:l", "i64.extend_i32_u");
    fixed(t, 0xae, "f:l", "i64.trunc_f32_s");
    fixed(t, 0xaf, "f:l", "i64.trunc_f32_u");
    fixed(t, 0xb0, "d:l", "i64.trunc_f64_s");
    fixed(t, 0xb1, "d:l", "i64.trunc_f64_u");
    fixed(t, 0xb2, "i:f", "f32.convert_i32_s");
    fixed(t, 0xb3, "i:f", "f32.convert_i32_u");
    fixed(t, 0xb4, "l:f", "f32.convert_i64_s");
    fixed(t, 0xb5, "l:f", "f32.convert_i64_u");
    fixed(t, 0xb6, "d:f", "f32.demote_f64");
    fixed(t, 0xb7, "i:d", "f64.convert_i32_s");
    fixed(t, 0xb8, "i:d", "f64.convert_i32_u");
    fixed(t, 0xb9, "l:d", "f64.convert_i64_s");
    fixed(t, 0xba, "l:d", "f64.convert_i64_u");
    fixed(t, 0xbb, "f:d", "f64.promote_f32");
    fixed(t, 0xbc, "f:i", "i32.reinterpret_f32");
    fixed(t, 0xbd, "d:l", "i64.reinterpret_f64");
    fixed(t, 0xbe, "i:f", "f32.reinterpret_i32");
    fixed(t, 0xbf, "l:d", "f64.reinterpret_i64");
    fixed(t, 0xc0, "i:i", "i32.extend8_s");
    fixed(t, 0xc1, "i:i", "i32.extend16_s");
    fixed(t, 0xc2, "l:l", "i64.extend8_s");
    fixed(t, 0xc3, "l:l", "i64.extend16_s");
    fixed(t, 0xc4, "l:l", "i64.extend32_s");

    set(t, 0xd0, byte1, se::unknown, "", "ref.null");
    set(t, 0xd1, none, se::unknown, "", "ref.is_null");
    set(t, 0xd2, u32, se::unknown, "", "ref.func");
    set(t, 0xfc, prefix_fc, se::unknown, "", "0xfc");
    return t;
}

constexpr table_t opcode_table = make_table();

uint32_t read_u32(bytes_view code, size_t pos, size_t offset, size_t& len)
{
    leb_result<uint32_t> r{};
    const auto st = read_uleb<uint32_t>(code.subspan(std::min(pos, code.size())), r);
    if (st == leb_status::truncated)
        throw decode_error(decode_error_kind::truncated_input, offset + pos);
    if (st == leb_status::malformed)
        throw decode_error(decode_error_kind::malformed_leb128, offset + pos);
    len = r.length;
    return r.value;
}

template <unsigned N>
void skip_sleb(bytes_view code, size_t& pos, size_t offset)
{
    leb_result<int64_t> r{};
    const auto st = read_sleb<N>(code.subspan(std::min(pos, code.size())), r);
    if (st == leb_status::truncated)
        throw decode_error(decode_error_kind::truncated_input, offset + pos);
    if (st == leb_status::malformed)
        throw decode_error(decode_error_kind::malformed_leb128, offset + pos);
    pos += r.length;
}

void skip_u32(bytes_view code, size_t& pos, size_t offset)
{
    size_t len = 0;
    read_u32(code, pos, offset, len);
    pos += len;
}

void skip_bytes(bytes_view code, size_t& pos, size_t n, size_t offset)
{
    if (code.size() - pos < n)
        throw decode_error(decode_error_kind::truncated_input, offset + code.size());
    pos += n;
}
}  // namespace

opcode_info info_for(uint8_t byte) noexcept
{
    return opcode_table[byte];
}

opcode_info info_for_fc(uint32_t subop) noexcept
{
    using enum imm_kind;
    using se = stack_effect;
    switch (subop)
    {
    case 0:
        return {none, se::fixed, "f:i", "i32.trunc_sat_f32_s"};
    case 1:
        return {none, se::fixed, "f:i", "i32.trunc_sat_f32_u"};
    case 2:
        return {none, se::fixed, "d:i", "i32.trunc_sat_f64_s"};
    case 3:
        return {none, se::fixed, "d:i", "i32.trunc_sat_f64_u"};
    case 4:
        return {none, se::fixed, "f:l", "i64.trunc_sat_f32_s"};
    case 5:
        return {none, se::fixed, "f:l", "i64.trunc_sat_f32_u"};
    case 6:
        return {none, se::fixed, "d:l", "i64.trunc_sat_f64_s"};
    case 7:
        return {none, se::fixed, "d:l", "i64.trunc_sat_f64_u"};
    case 8:
        return {u32x2, se::fixed, "iii:", "memory.init"};
    case 9:
        return {u32, se::fixed, ":", "data.drop"};
    case 10:
        return {u32x2, se::fixed, "iii:", "memory.copy"};
    case 11:
        return {u32, se::fixed, "iii:", "memory.fill"};
    case 12:
        return {u32x2, se::fixed, "iii:", "table.init"};
    case 13:
        return {u32, se::fixed, ":", "elem.drop"};
    case 14:
        return {u32x2, se::fixed, "iii:", "table.copy"};
    case 15:
        return {u32, se::unknown, "", "table.grow"};
    case 16:
        return {u32, se::fixed, ":i", "table.size"};
    case 17:
        return {u32, se::unknown, "", "table.fill"};
    default:
        return {};
    }
}

std::optional<size_t> instruction_length(bytes_view code, size_t offset)
{
    if (code.empty())
        throw decode_error(decode_error_kind::truncated_input, offset);

    auto info = info_for(code[0]);
    size_t pos = 1;
    if (info.imm == imm_kind::prefix_fc)
    {
        size_t len = 0;
        const auto sub = read_u32(code, pos, offset, len);
        pos += len;
        info = info_for_fc(sub);
    }

    switch (info.imm)
    {
    case imm_kind::invalid:
        return std::nullopt;
    case imm_kind::prefix_fc:
    case imm_kind::none:
        break;
    case imm_kind::blocktype:
        skip_sleb<33>(code, pos, offset);
        break;
    case imm_kind::u32:
        skip_u32(code, pos, offset);
        break;
    case imm_kind::u32x2:
    case imm_kind::memarg:
        skip_u32(code, pos, offset);
        skip_u32(code, pos, offset);
        break;
    case imm_kind::br_table:
    {
        size_t len = 0;
        const auto n = read_u32(code, pos, offset, len);
        pos += len;
        for (uint64_t i = 0; i <= n; ++i)
            skip_u32(code, pos, offset);
        break;
    }
    case imm_kind::sleb32:
        skip_sleb<32>(code, pos, offset);
        break;
    case imm_kind::sleb64:
        skip_sleb<64>(code, pos, offset);
        break;
    case imm_kind::bytes4:
        skip_bytes(code, pos, 4, offset);
        break;
    case imm_kind::bytes8:
        skip_bytes(code, pos, 8, offset);
        break;
    case imm_kind::select_types:
    {
        size_t len = 0;
        const auto n = read_u32(code, pos, offset, len);
        pos += len;
        skip_bytes(code, pos, n, offset);
        break;
    }
    case imm_kind::byte1:
        skip_bytes(code, pos, 1, offset);
        break;
    }
    return pos;
}

opcode_info describe_raw(bytes_view raw) noexcept
{
    if (raw.empty())
        return {};
    if (raw[0] != 0xfc)
        return info_for(raw[0]);
    leb_result<uint32_t> r{};
    if (read_uleb<uint32_t>(raw.subspan(1), r) != leb_status::ok)
        return {};
    return info_for_fc(r.value);
}
}  // namespace wsopt
