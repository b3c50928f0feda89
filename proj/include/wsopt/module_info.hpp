// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wasm_binary.hpp"
#include <optional>
#include <string>
#include <vector>

namespace wsopt
{
struct FuncType
{
    std::vector<valtype> params;
    std::vector<valtype> results;

    friend bool operator==(const FuncType&, const FuncType&) = default;
};

struct Export
{
    std::string name;
    uint8_t kind = 0;  ///< 0 func, 1 table, 2 memory, 3 global
    uint32_t index = 0;
};

/// Read-only view of the type, import, function, global and export sections.
/// The sections themselves stay opaque blobs inside WasmModule.
struct ModuleInfo
{
    std::vector<FuncType> types;
    /// Type index per function, imported functions first.
    std::vector<uint32_t> func_types;
    uint32_t imported_funcs = 0;
    std::vector<valtype> globals;
    std::vector<Export> exports;

    const FuncType& func_type(uint32_t func_index) const;
    bool is_import(uint32_t func_index) const noexcept { return func_index < imported_funcs; }
    /// Function index of an exported function, if any.
    std::optional<uint32_t> find_export(std::string_view name) const noexcept;

    /// Parameter types followed by declared locals.
    std::vector<valtype> local_types(uint32_t func_index, const FunctionBody& body) const;
};

/// Throws decode_error on malformed sections.
ModuleInfo read_module_info(const WasmModule& module);

/// Parameter/result types of a block type immediate.
FuncType block_signature(const ModuleInfo& info, int64_t blocktype);
}  // namespace wsopt
