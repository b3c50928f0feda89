// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "leb128.hpp"
#include <cstdint>
#include <optional>
#include <string_view>

namespace wsopt
{
enum class imm_kind : uint8_t
{
    invalid,  ///< unknown opcode byte, the instruction length cannot be determined
    none,
    blocktype,
    u32,
    u32x2,
    br_table,
    memarg,
    sleb32,
    sleb64,
    bytes4,
    bytes8,
    select_types,
    byte1,
    prefix_fc,
};

enum class stack_effect : uint8_t
{
    /// Fixed signature given by `opcode_info::signature`.
    fixed,
    unreachable,
    br_table,
    call_indirect,
    global_get,
    global_set,
    select_typed,
    /// Touches reference types or otherwise cannot be typed here.
    unknown,
    /// Handled by the decoded instruction subset.
    structured,
};

/// Static description of an MVP (+ sign-extension, saturating truncation and bulk
/// memory) opcode. `signature` reads as "<pops>:<pushes>" with one letter per value:
/// i = i32, l = i64, f = f32, d = f64.
struct opcode_info
{
    imm_kind imm = imm_kind::invalid;
    stack_effect effect = stack_effect::unknown;
    std::string_view signature;
    std::string_view name;
};

opcode_info info_for(uint8_t byte) noexcept;
opcode_info info_for_fc(uint32_t subop) noexcept;

/// Length in bytes of the instruction starting at `code[0]`, or nullopt if the
/// opcode is unknown. Throws decode_error on truncated or malformed immediates;
/// `offset` is used for error reporting only.
std::optional<size_t> instruction_length(bytes_view code, size_t offset);

/// Describes the raw encoding of an unsupported instruction.
opcode_info describe_raw(bytes_view raw) noexcept;
}  // namespace wsopt
