// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "utils/test_utils.hpp"
#include <wsopt/module_info.hpp>
#include <wsopt/synth.hpp>
#include <gtest/gtest.h>

using namespace wsopt;
using namespace wsopt::test;

namespace
{
SynthConfig config(synth_mode m)
{
    auto cfg = SynthConfig::for_mode(m);
    cfg.solver = test_solver();
    cfg.probabilistic = !cfg.solver;
    return cfg;
}

Candidate root_candidate(const DfGraph& g)
{
    const auto cs = harvest_candidates(g);
    for (const auto& c : cs)
        if (c.root == g.result())
            return c;
    throw std::logic_error("root is not a candidate");
}

/// True when `a` and `b` agree on every input at width 8 (one or two inputs).
bool equal_at_width8(const DfGraph& a, const DfGraph& b)
{
    const auto n = eval_inputs(a).size();
    const uint64_t limit = n == 0 ? 1 : n == 1 ? 256 : 65536;
    for (uint64_t v = 0; v < limit; ++v)
    {
        TestVector tv;
        if (n >= 1)
            tv.values.push_back(v & 0xff);
        if (n >= 2)
            tv.values.push_back(v >> 8);
        if (eval_node(a, a.result(), tv) != eval_node(b, b.result(), tv))
            return false;
    }
    return true;
}

DfGraph one_input(unsigned w = 32)
{
    const std::vector<unsigned> widths{w};
    return make_expression_graph(widths);
}
}  // namespace

TEST(synth, harvest_examples)
{
    const std::vector<unsigned> widths{32, 32};
    auto g = make_expression_graph(widths);
    const auto x = g.add_op(op_tag::xor_, {0, 0}, 32);
    const auto add = g.add_op(op_tag::add, {x, 1}, 32);
    g = finish(std::move(g), add);
    const auto cs = harvest_candidates(g);
    ASSERT_EQ(cs.size(), 2u);
    EXPECT_EQ(cs[0].root, add);
    EXPECT_EQ(cs[1].root, x);
    EXPECT_GT(cs[0].lhs_cost, cs[1].lhs_cost);
    EXPECT_EQ(cs[0].input_vars, (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(cs[1].input_vars, (std::vector<NodeId>{0}));

    auto single = one_input();
    single = finish(single, 0);
    EXPECT_TRUE(harvest_candidates(single).empty());
}

TEST(synth, harvest_respects_cone_bound)
{
    auto g = one_input();
    NodeId n = 0;
    for (int i = 0; i < 30; ++i)
        n = g.add_op(op_tag::add, {n, g.add_const(32, static_cast<uint64_t>(i))}, 32);
    g = finish(std::move(g), n);
    for (const auto& c : harvest_candidates(g))
        EXPECT_LE(c.cone.size(), 20u);
    EXPECT_FALSE(harvest_candidates(g).empty());
}

TEST(synth, babbage_search_region_has_seven_candidates)
{
    const auto m = decode_module(read_file(corpus_dir() / "babbage.wasm"));
    const auto info = read_module_info(m);
    const auto func = *info.find_export("babbage");
    const auto& body = (*m.code())[func - info.imported_funcs];
    const auto regions = lift_function(body, info.local_types(func, body),
        info.func_type(func).results, &info);
    size_t total = 0;
    for (const auto& r : regions)
        total += harvest_candidates(r.graph).size();
    EXPECT_EQ(total, 7u);
}

TEST(synth, constant_found_for_masked_all_ones)
{
    // and(or(v0, -1), 1) is 1 for every 8-bit v0.
    for (unsigned v = 0; v < 256; ++v)
        ASSERT_EQ(static_cast<uint8_t>((v | 0xffu) & 1u), 1u);

    auto g = one_input();
    const auto o = g.add_op(op_tag::or_, {0, g.add_const(32, 0xffffffff)}, 32);
    g = finish(g, g.add_op(op_tag::and_, {o, g.add_const(32, 1)}, 32));
    const auto r = synth_constant(root_candidate(g), config(synth_mode::constants));
    ASSERT_TRUE(r.replacement) << r.reason;
    EXPECT_EQ(r.replacement->rhs_cost, 1u);
    const auto& rhs = r.replacement->rhs;
    EXPECT_EQ(rhs.node(rhs.result()).kind, node_kind::constant);
    EXPECT_EQ(rhs.node(rhs.result()).value, 1u);
    const auto narrow_lhs = reparameterize(g, 8);
    const auto narrow_rhs = reparameterize(rhs, 8);
    ASSERT_TRUE(narrow_lhs && narrow_rhs);
    EXPECT_TRUE(equal_at_width8(*narrow_lhs, *narrow_rhs));
}

TEST(synth, constant_examples)
{
    auto x = one_input();
    x = finish(x, x.add_op(op_tag::xor_, {0, 0}, 32));
    const auto r = synth_constant(root_candidate(x), config(synth_mode::constants));
    ASSERT_TRUE(r.replacement);
    EXPECT_EQ(r.replacement->rhs.node(r.replacement->rhs.result()).value, 0u);

    auto inc = one_input();
    inc = finish(inc, inc.add_op(op_tag::add, {0, inc.add_const(32, 1)}, 32));
    EXPECT_FALSE(synth_constant(root_candidate(inc), config(synth_mode::constants)).replacement);
}

TEST(synth, missing_verifier_is_reported)
{
    auto x = one_input();
    x = finish(x, x.add_op(op_tag::xor_, {0, 0}, 32));
    auto cfg = SynthConfig::for_mode(synth_mode::constants);
    cfg.solver.reset();
    cfg.probabilistic = false;
    EXPECT_THROW(synth_constant(root_candidate(x), cfg), verifier_unavailable);
}

TEST(synth, bounded2_finds_nothing_for_times_three)
{
    // add(shl(v0, 1), v0) costs 5.
    auto g = one_input();
    const auto s = g.add_op(op_tag::shl, {0, g.add_const(32, 1)}, 32);
    g = finish(g, g.add_op(op_tag::add, {s, 0}, 32));
    const auto c = root_candidate(g);
    ASSERT_EQ(c.lhs_cost, 5u);

    // Independent oracle at width 8: a program of lowered cost <= 2 over one input
    // is v0, a constant, eqz(v0) or eqz(constant). None computes 3 * v0.
    bool any = false;
    for (unsigned k = 0; k < 256; ++k)
    {
        bool all_const = true;
        for (unsigned v = 0; v < 256; ++v)
            all_const = all_const && static_cast<uint8_t>(3 * v) == k;
        any = any || all_const;
    }
    for (unsigned v = 0; v < 256 && !any; ++v)
        any = static_cast<uint8_t>(3 * v) != v ? false : any;
    bool identity = true, is_eqz = true;
    for (unsigned v = 0; v < 256; ++v)
    {
        identity = identity && static_cast<uint8_t>(3 * v) == v;
        is_eqz = is_eqz && static_cast<uint8_t>(3 * v) == (v == 0 ? 1u : 0u);
    }
    EXPECT_FALSE(any || identity || is_eqz);
    // The first cost-3 program, mul(v0, 3), does match, so the bound is what
    // makes Bounded2 come back empty.
    for (unsigned v = 0; v < 256; ++v)
        ASSERT_EQ(static_cast<uint8_t>(v * 3), static_cast<uint8_t>((v << 1) + v));

    const auto r = best_replacement(c, config(synth_mode::bounded2));
    EXPECT_FALSE(r.replacement);
    const auto e = best_replacement(c, config(synth_mode::enumerative));
    ASSERT_TRUE(e.replacement) << e.reason;
    EXPECT_EQ(e.replacement->rhs_cost, 3u);
}

TEST(synth, cegis_collapses_duplicate_masks)
{
    auto g = one_input();
    const auto a1 = g.add_op(op_tag::and_, {0, g.add_const(32, 0xff)}, 32);
    const auto a2 = g.add_op(op_tag::and_, {0, g.add_const(32, 0xff)}, 32);
    g = finish(g, g.add_op(op_tag::or_, {a1, a2}, 32));
    const auto r = synth_cegis(root_candidate(g), config(synth_mode::cegis));
    ASSERT_TRUE(r.replacement) << r.reason;
    const auto& rhs = r.replacement->rhs;
    EXPECT_EQ(r.replacement->rhs_cost, 3u);
    EXPECT_EQ(expression_text(rhs, rhs.result()), "and(%0, 255)");
    const auto narrow_lhs = reparameterize(g, 8);
    const auto narrow_rhs = reparameterize(rhs, 8);
    ASSERT_TRUE(narrow_lhs && narrow_rhs);
    EXPECT_TRUE(equal_at_width8(*narrow_lhs, *narrow_rhs));
}

TEST(synth, cegis_solves_lone_constants)
{
    // sub(add(v0, 1000), v0) is the constant 1000, which is not in the pool.
    auto g = one_input();
    const auto a = g.add_op(op_tag::add, {0, g.add_const(32, 1000)}, 32);
    g = finish(g, g.add_op(op_tag::sub, {a, 0}, 32));
    const auto r = synth_cegis(root_candidate(g), config(synth_mode::cegis));
    ASSERT_TRUE(r.replacement) << r.reason;
    EXPECT_EQ(r.replacement->rhs_cost, 1u);
    EXPECT_EQ(r.replacement->rhs.node(r.replacement->rhs.result()).value, 1000u);
}

TEST(synth, rhs_never_contains_trapping_ops)
{
    auto g = one_input();
    const auto d = g.add_op(op_tag::shr_u, {0, g.add_const(32, 3)}, 32);
    g = finish(g, g.add_op(op_tag::shl, {d, g.add_const(32, 3)}, 32));
    for (const auto m : {synth_mode::cegis, synth_mode::enumerative})
    {
        const auto r = best_replacement(root_candidate(g), config(m));
        ASSERT_TRUE(r.replacement) << r.reason;
        EXPECT_EQ(expression_text(r.replacement->rhs, r.replacement->rhs.result()),
            "and(%0, -8)");
        for (const auto& n : r.replacement->rhs.nodes)
            EXPECT_FALSE(is_trapping(n.op));
    }
}

TEST(synth, modes_respect_their_bounds)
{
    std::vector<DfGraph> lhss;
    {
        auto g = one_input();
        g = finish(g, g.add_op(op_tag::xor_, {0, 0}, 32));
        lhss.push_back(g);
    }
    {
        auto g = one_input();
        const auto a = g.add_op(op_tag::add, {0, g.add_const(32, 0)}, 32);
        g = finish(g, g.add_op(op_tag::mul, {a, g.add_const(32, 1)}, 32));
        lhss.push_back(g);
    }
    {
        auto g = one_input(64);
        const auto s = g.add_op(op_tag::shl, {0, g.add_const(64, 56)}, 64);
        g = finish(g, g.add_op(op_tag::shr_u, {s, g.add_const(64, 56)}, 64));
        lhss.push_back(g);
    }
    for (const auto& g : lhss)
    {
        const auto c = root_candidate(g);
        const auto k = best_replacement(c, config(synth_mode::constants));
        if (k.replacement)
        {
            EXPECT_EQ(k.replacement->rhs.nodes.size() - eval_inputs(k.replacement->rhs).size(), 1u);
            EXPECT_EQ(k.replacement->rhs_cost, 1u);
        }
        const auto b = best_replacement(c, config(synth_mode::bounded2));
        if (b.replacement)
            EXPECT_LE(graph_cost(b.replacement->rhs), 2u);
        EXPECT_EQ(b.replacement ? b.replacement->engine : synth_mode::bounded2,
            synth_mode::bounded2);
    }
}

TEST(synth, enumerative_result_is_cost_minimal)
{
    // LHS shapes whose best replacements have cost 3.
    std::vector<DfGraph> lhss;
    {
        auto g = one_input();
        const auto s = g.add_op(op_tag::shl, {0, g.add_const(32, 1)}, 32);
        g = finish(g, g.add_op(op_tag::add, {s, 0}, 32));
        lhss.push_back(g);
    }
    {
        const std::vector<unsigned> widths{32, 32};
        auto g = make_expression_graph(widths);
        const auto a = g.add_op(op_tag::add, {0, 1}, 32);
        g = finish(g, g.add_op(op_tag::sub, {a, 1}, 32));
        lhss.push_back(g);
    }
    {
        const std::vector<unsigned> widths{32, 32};
        auto g = make_expression_graph(widths);
        const auto a = g.add_op(op_tag::and_, {0, 1}, 32);
        const auto b = g.add_op(op_tag::xor_, {0, 1}, 32);
        g = finish(g, g.add_op(op_tag::or_, {a, b}, 32));
        lhss.push_back(g);
    }
    for (const auto& g : lhss)
    {
        const auto c = root_candidate(g);
        const auto r = best_replacement(c, config(synth_mode::enumerative));
        ASSERT_TRUE(r.replacement) << expression_text(g, g.result()) << ": " << r.reason;
        const auto best = r.replacement->rhs_cost;
        // Every strictly cheaper grammar program differs from the LHS somewhere.
        for (const auto& p : enumerate_grammar(c.lhs, static_cast<unsigned>(best - 1)))
            EXPECT_EQ(verify_testing(c.lhs, p, 256, 1).t, Verdict::tag::refuted)
                << expression_text(p, p.result());
    }
}

TEST(synth, results_are_deterministic_and_cached)
{
    auto g = one_input();
    const auto d = g.add_op(op_tag::shr_u, {0, g.add_const(32, 4)}, 32);
    g = finish(g, g.add_op(op_tag::shl, {d, g.add_const(32, 4)}, 32));
    const auto c = root_candidate(g);
    const auto cfg = config(synth_mode::enumerative);
    const auto a = best_replacement(c, cfg);
    const auto b = best_replacement(c, cfg);
    ASSERT_TRUE(a.replacement && b.replacement);
    EXPECT_EQ(a.replacement->rhs, b.replacement->rhs);

    SynthCache cache;
    const auto first = best_replacement(c, cfg, &cache);
    EXPECT_TRUE(cache.find(synth_mode::enumerative, dump(c.lhs)).has_value());
    const auto second = best_replacement(c, cfg, &cache);
    EXPECT_EQ(first.replacement->rhs, second.replacement->rhs);
}

TEST(synth, mode_names)
{
    EXPECT_EQ(to_string(synth_mode::bounded2), "max2");
    EXPECT_EQ(parse_synth_mode("max2"), synth_mode::bounded2);
    EXPECT_EQ(parse_synth_mode("cegis"), synth_mode::cegis);
    EXPECT_FALSE(parse_synth_mode("fast").has_value());
    EXPECT_EQ(SynthConfig::for_mode(synth_mode::bounded2).max_rhs_instructions, 2u);
    EXPECT_FALSE(SynthConfig::for_mode(synth_mode::enumerative).max_rhs_instructions.has_value());
}
