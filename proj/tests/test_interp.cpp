// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "utils/test_utils.hpp"
#include <wsopt/interp.hpp>
#include <wsopt/module_info.hpp>
#include <gtest/gtest.h>

using namespace wsopt;
using namespace wsopt::test;

namespace
{
WasmModule corpus_module(const std::string& name)
{
    return decode_module(read_file(corpus_dir() / (name + ".wasm")));
}

uint32_t export_index(const WasmModule& m, const std::string& name)
{
    return read_module_info(m).find_export(name).value();
}

Outcome run(const WasmModule& m, const std::string& name, std::vector<uint64_t> args,
    uint64_t fuel = default_fold_fuel)
{
    return exec_function(m, export_index(m, name), args, fuel);
}

const std::vector<valtype> i32{valtype::i32};
}  // namespace

TEST(interp, babbage_solution)
{
    uint32_t expect = 1;
    while (static_cast<uint64_t>(expect) * expect % 1000000 != 269696)
        ++expect;
    ASSERT_EQ(expect, 25264u);

    const auto m = corpus_module("babbage");
    const auto out = run(m, "babbage", {});
    ASSERT_EQ(out.t, Outcome::tag::returned) << to_string(out);
    EXPECT_EQ(out.values, std::vector<uint64_t>{expect});
    EXPECT_LT(out.fuel_used, default_fold_fuel);

    const auto folded = constfold_pure_function(m, export_index(m, "babbage"));
    ASSERT_TRUE(folded.has_value());
    ASSERT_EQ(folded->instrs.size(), 2u);
    EXPECT_EQ(folded->instrs[0], ins(opcode::i32_const, 25264));
    EXPECT_EQ(folded->instrs[1].op, opcode::end);
    EXPECT_TRUE(folded->locals.empty());
}

TEST(interp, fold_refuses_impure_or_parameterized_functions)
{
    const auto b = corpus_module("babbage");
    EXPECT_FALSE(constfold_pure_function(b, export_index(b, "main")).has_value());
    const auto g = corpus_module("gcd");
    EXPECT_FALSE(constfold_pure_function(g, export_index(g, "gcd")).has_value());
    // Too little fuel to finish: no fold.
    EXPECT_FALSE(constfold_pure_function(b, export_index(b, "babbage"), 1000).has_value());
}

TEST(interp, traps_are_distinguished)
{
    const auto m = corpus_module("gcd");
    const auto zero = run(m, "div_exact", {1, 0});
    EXPECT_EQ(zero.t, Outcome::tag::trapped);
    EXPECT_EQ(zero.detail, "DivZero");
    const auto overflow = run(m, "div_exact", {0x80000000u, 0xffffffffu});
    EXPECT_EQ(overflow.t, Outcome::tag::trapped);
    EXPECT_EQ(overflow.detail, "Overflow");
    EXPECT_EQ(run(m, "div_exact", {static_cast<uint32_t>(-7), 2}).values,
        std::vector<uint64_t>{static_cast<uint32_t>(-3)});
    EXPECT_EQ(run(m, "lcm", {4, 6}).values, std::vector<uint64_t>{12});
    EXPECT_EQ(run(m, "lcm", {0, 0}).detail, "DivZero");
}

TEST(interp, loops_and_branches)
{
    auto collatz_steps = [](uint64_t n) {
        uint64_t c = 0;
        for (; n > 1; ++c)
            n = n % 2 ? 3 * n + 1 : n / 2;
        return c;
    };
    const auto m = corpus_module("collatz");
    for (const uint64_t n : {1u, 2u, 7u, 27u, 97u, 871u})
        EXPECT_EQ(run(m, "steps", {n}).values, std::vector<uint64_t>{collatz_steps(n)}) << n;
    const auto f = corpus_module("fizzbuzz");
    EXPECT_EQ(run(f, "count_fizz", {100}).values, std::vector<uint64_t>{33});
    EXPECT_EQ(run(f, "classify", {15}).values, std::vector<uint64_t>{3});
}

TEST(interp, block_results_and_early_return)
{
    // block (result i32) i32.const 7 local.get 0 br_if 0 drop i32.const 9 end
    const auto m = decode_module(make_module({{i32, i32, {},
        {ins(opcode::block, blocktype_i32), ins(opcode::i32_const, 7), ins(opcode::local_get, 0),
            ins(opcode::br_if, 0), ins(opcode::drop), ins(opcode::i32_const, 9),
            ins(opcode::end)},
        "pick"},
        {i32, i32, {},
            {ins(opcode::local_get, 0), ins(opcode::if_, blocktype_i32), ins(opcode::i32_const, 1),
                ins(opcode::return_), ins(opcode::else_), ins(opcode::i32_const, 2), ins(opcode::end)},
            "ret"}}));
    EXPECT_EQ(run(m, "pick", {1}).values, std::vector<uint64_t>{7});
    EXPECT_EQ(run(m, "pick", {0}).values, std::vector<uint64_t>{9});
    EXPECT_EQ(run(m, "ret", {1}).values, std::vector<uint64_t>{1});
    EXPECT_EQ(run(m, "ret", {0}).values, std::vector<uint64_t>{2});
}

TEST(interp, fuel_and_call_depth)
{
    const auto f = corpus_module("fizzbuzz");
    const auto out = run(f, "count_fizz", {0xffffffffu}, 10'000);
    EXPECT_EQ(out.t, Outcome::tag::fuel_exhausted);
    EXPECT_EQ(out.fuel_used, 10'000u);

    // f(x) = f(x): unbounded recursion stops at the depth limit, not the fuel.
    const auto r = decode_module(make_module(
        {{i32, i32, {}, {ins(opcode::local_get, 0), ins(opcode::call, 0)}, "loop"}}));
    const auto deep = run(r, "loop", {1});
    EXPECT_EQ(deep.t, Outcome::tag::fuel_exhausted);
    EXPECT_EQ(deep.detail, "call depth");
}

TEST(interp, unsupported_features)
{
    const auto b = corpus_module("babbage");
    const auto main = run(b, "main", {});
    EXPECT_EQ(main.t, Outcome::tag::unsupported);
    EXPECT_EQ(main.detail, "import");

    const auto c = corpus_module("checksum_mem");
    const auto mem = run(c, "sum_bytes", {0, 8});
    EXPECT_EQ(mem.t, Outcome::tag::unsupported);
    EXPECT_EQ(mem.detail, "i32.load8_u");

    const auto r = corpus_module("ring_buffer_mem");
    EXPECT_EQ(run(r, "push", {1}).t, Outcome::tag::unsupported);
}

TEST(interp, exec_body_without_module)
{
    FunctionBody body;
    body.instrs = {ins(opcode::local_get, 0), ins(opcode::i32_const, 31), ins(opcode::i32_rotl),
        ins(opcode::end)};
    const std::vector<uint64_t> args{3};
    const auto out = exec_body(body, i32, i32, args, 100);
    EXPECT_EQ(out.values, std::vector<uint64_t>{0x80000001u});

    body.instrs = {ins(opcode::call, 0), ins(opcode::end)};
    EXPECT_EQ(exec_body(body, i32, i32, args, 100).t, Outcome::tag::unsupported);
}

TEST(interp, outcome_equality_ignores_fuel)
{
    Outcome a{Outcome::tag::returned, {1}, {}, 10};
    Outcome b{Outcome::tag::returned, {1}, {}, 99};
    EXPECT_EQ(a, b);
    Outcome c{Outcome::tag::trapped, {}, "DivZero", 1};
    Outcome d{Outcome::tag::trapped, {}, "Overflow", 1};
    EXPECT_FALSE(c == d);
    EXPECT_EQ(to_string(c), "Trapped(DivZero)");
}
