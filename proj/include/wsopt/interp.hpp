// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "module_info.hpp"
#include "wasm_binary.hpp"
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wsopt
{
constexpr uint64_t default_fold_fuel = 10'000'000;
constexpr unsigned max_call_depth = 1000;

struct Outcome
{
    enum class tag
    {
        returned,
        trapped,
        fuel_exhausted,
        unsupported,
    };

    tag t = tag::returned;
    /// Results (returned only); i32 values are zero-extended.
    std::vector<uint64_t> values;
    /// Trap cause ("DivZero", "Overflow") or the unsupported instruction.
    std::string detail;
    /// Instructions executed; not part of equality.
    uint64_t fuel_used = 0;

    friend bool operator==(const Outcome& a, const Outcome& b)
    {
        return a.t == b.t && a.values == b.values && a.detail == b.detail;
    }
};

std::string to_string(const Outcome& o);

/// Executes functions of one module. The module must outlive the interpreter.
class Interpreter
{
public:
    explicit Interpreter(const WasmModule& m);
    Interpreter(const WasmModule& m, ModuleInfo info);

    Outcome run(uint32_t func_index, std::span<const uint64_t> args, uint64_t fuel);

    const ModuleInfo& info() const noexcept { return m_info; }
    const WasmModule& module() const noexcept { return m_module; }

    struct control_map
    {
        /// For block/loop/if: index of the matching end; for if: index of else.
        std::vector<uint32_t> end;
        std::vector<uint32_t> else_;
    };

private:
    friend class exec_context;
    const control_map& controls(uint32_t defined_index);

    const WasmModule& m_module;
    ModuleInfo m_info;
    std::map<uint32_t, control_map> m_controls;
};

/// Convenience wrapper around Interpreter.
Outcome exec_function(const WasmModule& m, uint32_t func_index, std::span<const uint64_t> args,
    uint64_t fuel);

/// Executes a standalone body that makes no calls, with `params` followed by the
/// body's declared locals.
Outcome exec_body(const FunctionBody& body, std::span<const valtype> params,
    std::span<const valtype> results, std::span<const uint64_t> args, uint64_t fuel);

/// Replaces a zero-parameter function that runs to completion without touching
/// anything outside the subset by constants for its results.
std::optional<FunctionBody> constfold_pure_function(const WasmModule& m, uint32_t func_index,
    uint64_t fuel = default_fold_fuel);
std::optional<FunctionBody> constfold_pure_function(Interpreter& interp, uint32_t func_index,
    uint64_t fuel = default_fold_fuel);
}  // namespace wsopt
