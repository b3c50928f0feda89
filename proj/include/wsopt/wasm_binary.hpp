// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "leb128.hpp"
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wsopt
{
enum class valtype : uint8_t
{
    i32 = 0x7f,
    i64 = 0x7e,
    f32 = 0x7d,
    f64 = 0x7c,
    v128 = 0x7b,
    funcref = 0x70,
    externref = 0x6f,
};

inline bool is_integer(valtype t) noexcept
{
    return t == valtype::i32 || t == valtype::i64;
}

std::string_view to_string(valtype t) noexcept;

/// Opcodes of the rewritable instruction subset. Enumerator values equal the
/// binary encoding; everything else decodes to `unsupported` and keeps its raw bytes.
enum class opcode : uint8_t
{
    nop = 0x01,
    block = 0x02,
    loop = 0x03,
    if_ = 0x04,
    else_ = 0x05,
    end = 0x0b,
    br = 0x0c,
    br_if = 0x0d,
    return_ = 0x0f,
    call = 0x10,
    drop = 0x1a,
    select = 0x1b,
    local_get = 0x20,
    local_set = 0x21,
    local_tee = 0x22,
    i32_const = 0x41,
    i64_const = 0x42,

    i32_eqz = 0x45,
    i32_eq = 0x46,
    i32_ne = 0x47,
    i32_lt_s = 0x48,
    i32_lt_u = 0x49,
    i32_gt_s = 0x4a,
    i32_gt_u = 0x4b,
    i32_le_s = 0x4c,
    i32_le_u = 0x4d,
    i32_ge_s = 0x4e,
    i32_ge_u = 0x4f,

    i64_eqz = 0x50,
    i64_eq = 0x51,
    i64_ne = 0x52,
    i64_lt_s = 0x53,
    i64_lt_u = 0x54,
    i64_gt_s = 0x55,
    i64_gt_u = 0x56,
    i64_le_s = 0x57,
    i64_le_u = 0x58,
    i64_ge_s = 0x59,
    i64_ge_u = 0x5a,

    i32_add = 0x6a,
    i32_sub = 0x6b,
    i32_mul = 0x6c,
    i32_div_s = 0x6d,
    i32_div_u = 0x6e,
    i32_rem_s = 0x6f,
    i32_rem_u = 0x70,
    i32_and = 0x71,
    i32_or = 0x72,
    i32_xor = 0x73,
    i32_shl = 0x74,
    i32_shr_s = 0x75,
    i32_shr_u = 0x76,
    i32_rotl = 0x77,
    i32_rotr = 0x78,

    i64_add = 0x7c,
    i64_sub = 0x7d,
    i64_mul = 0x7e,
    i64_div_s = 0x7f,
    i64_div_u = 0x80,
    i64_rem_s = 0x81,
    i64_rem_u = 0x82,
    i64_and = 0x83,
    i64_or = 0x84,
    i64_xor = 0x85,
    i64_shl = 0x86,
    i64_shr_s = 0x87,
    i64_shr_u = 0x88,
    i64_rotl = 0x89,
    i64_rotr = 0x8a,

    i32_wrap_i64 = 0xa7,
    i64_extend_i32_s = 0xac,
    i64_extend_i32_u = 0xad,

    unsupported = 0xff,
};

/// True for opcodes that belong to the decoded subset.
bool is_supported_opcode(uint8_t byte) noexcept;

std::string_view mnemonic(opcode op) noexcept;

/// Block type immediate: -64 (0x40) is empty, -1 i32, -2 i64, ... ; non-negative
/// values are type indices.
constexpr int64_t blocktype_empty = -64;
constexpr int64_t blocktype_i32 = -1;
constexpr int64_t blocktype_i64 = -2;

struct Instruction
{
    opcode op = opcode::nop;
    /// Constant value (i32 constants are stored sign-extended), local/function
    /// index, branch depth or block type, depending on `op`.
    int64_t imm = 0;
    /// Full encoding of an unsupported instruction.
    bytes raw;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct LocalDecl
{
    uint32_t count = 0;
    valtype type = valtype::i32;

    friend bool operator==(const LocalDecl&, const LocalDecl&) = default;
};

struct FunctionBody
{
    std::vector<LocalDecl> locals;
    std::vector<Instruction> instrs;
    /// Original encoding (locals + expression, without the size prefix). Present
    /// only while the body is unmodified.
    std::optional<bytes> raw;
    /// Set when the expression contains bytes the decoder cannot size; such a
    /// body has no instruction list and is only ever passed through.
    bool opaque = false;

    uint64_t local_count() const noexcept;
};

struct Section
{
    uint8_t id = 0;
    /// Payload bytes as found in the input.
    bytes payload;
    /// Complete original encoding (id, size, payload).
    bytes raw;
    /// Present for the code section (id 10) only.
    std::optional<std::vector<FunctionBody>> code;
};

struct WasmModule
{
    bytes preamble;
    std::vector<Section> sections;

    const std::vector<FunctionBody>* code() const noexcept;
    std::vector<FunctionBody>* code() noexcept;
    const Section* find_section(uint8_t id) const noexcept;
};

enum class decode_error_kind
{
    bad_magic,
    bad_version,
    truncated_input,
    malformed_leb128,
    section_size_mismatch,
    malformed_body,
    too_large,
};

std::string_view to_string(decode_error_kind kind) noexcept;

class decode_error : public std::runtime_error
{
public:
    decode_error(decode_error_kind kind, size_t offset, const std::string& detail = {});

    decode_error_kind kind() const noexcept { return m_kind; }
    size_t offset() const noexcept { return m_offset; }

private:
    decode_error_kind m_kind;
    size_t m_offset;
};

class encode_error : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

constexpr size_t max_module_size = 64 * 1024 * 1024;

WasmModule decode_module(bytes_view input);
bytes encode_module(const WasmModule& module);

/// Decodes one function body (locals + expression). `base_offset` is only used
/// for error reporting.
FunctionBody decode_function_body(bytes_view body, size_t base_offset = 0);

/// Encodes locals + expression without the size prefix.
bytes encode_function_body(const FunctionBody& body);
void encode_instruction(bytes& out, const Instruction& instr);

/// Instructions excluding the final `end` of each body.
uint64_t count_instructions(const FunctionBody& body) noexcept;
uint64_t count_instructions(const WasmModule& module) noexcept;

/// Byte length of the code section payload as it would be encoded; 0 without one.
uint64_t code_section_size(const WasmModule& module);

/// Builds the code-section payload from bodies (count + size-prefixed bodies).
bytes encode_code_payload(const std::vector<FunctionBody>& bodies);

std::string to_string(const Instruction& instr);
}  // namespace wsopt
