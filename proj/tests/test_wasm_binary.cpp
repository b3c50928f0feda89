// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "utils/test_utils.hpp"
#include <wsopt/wasm_binary.hpp>
#include <gtest/gtest.h>
#include <random>

using namespace wsopt;
using namespace wsopt::test;

namespace
{
// One function (i32) -> i32 with body `local.get 0; i32.const 1; i32.add; end`,
// assembled by hand. wabt 1.0.36 disassembles it to exactly those three
// instructions.
const auto one_function_module =
    "0061736d01000000"      // preamble
    "01060160017f017f"      // type section: (i32) -> i32
    "03020100"              // function section: type 0
    "0a09010700200041016a0b";  // code section

decode_error_kind decode_kind(const bytes& b)
{
    try
    {
        decode_module(b);
    }
    catch (const decode_error& e)
    {
        return e.kind();
    }
    ADD_FAILURE() << "no decode error";
    return decode_error_kind::too_large;
}
}  // namespace

TEST(wasm_binary, empty_module)
{
    const auto m = decode_module(from_hex("0061736d01000000"));
    EXPECT_TRUE(m.sections.empty());
    EXPECT_EQ(count_instructions(m), 0u);
    EXPECT_EQ(code_section_size(m), 0u);
    EXPECT_EQ(encode_module(m), from_hex("0061736d01000000"));
}

TEST(wasm_binary, preamble_errors)
{
    EXPECT_EQ(decode_kind(from_hex("0061736d02000000")), decode_error_kind::bad_version);
    EXPECT_EQ(decode_kind(from_hex("0061736e01000000")), decode_error_kind::bad_magic);
    EXPECT_EQ(decode_kind(from_hex("0061736d0100")), decode_error_kind::truncated_input);
}

TEST(wasm_binary, section_errors_name_offsets)
{
    // Section claims 5 payload bytes, only 2 present.
    try
    {
        decode_module(from_hex("0061736d01000000010560"));
        FAIL();
    }
    catch (const decode_error& e)
    {
        EXPECT_EQ(e.kind(), decode_error_kind::section_size_mismatch);
        EXPECT_GE(e.offset(), 8u);
    }
    EXPECT_EQ(decode_kind(from_hex("0061736d0100000001ffffffffff")),
        decode_error_kind::malformed_leb128);
    // Code section with one entry whose declared size overruns the section.
    EXPECT_EQ(decode_kind(from_hex("0061736d010000000a0301050b")),
        decode_error_kind::truncated_input);
    // Code section with a trailing byte after its only entry.
    EXPECT_EQ(decode_kind(from_hex("0061736d010000000a050102000b00")),
        decode_error_kind::section_size_mismatch);
}

TEST(wasm_binary, hand_assembled_function)
{
    const auto input = from_hex(one_function_module);
    const auto m = decode_module(input);
    const auto* code = m.code();
    ASSERT_NE(code, nullptr);
    ASSERT_EQ(code->size(), 1u);
    const auto& body = (*code)[0];
    ASSERT_EQ(body.instrs.size(), 4u);
    EXPECT_EQ(body.instrs[0], ins(opcode::local_get, 0));
    EXPECT_EQ(body.instrs[1], ins(opcode::i32_const, 1));
    EXPECT_EQ(body.instrs[2], ins(opcode::i32_add));
    EXPECT_EQ(body.instrs[3], ins(opcode::end));
    EXPECT_EQ(count_instructions(body), 3u);
    EXPECT_EQ(encode_module(m), input);
    EXPECT_GT(code_section_size(m), 0u);
}

TEST(wasm_binary, count_instructions_examples)
{
    FunctionBody a;
    a.instrs = {ins(opcode::i32_const, 25264), ins(opcode::end)};
    EXPECT_EQ(count_instructions(a), 1u);
    FunctionBody b;
    b.instrs = {ins(opcode::local_get, 0), ins(opcode::local_get, 0), ins(opcode::i32_xor),
        ins(opcode::end)};
    EXPECT_EQ(count_instructions(b), 3u);
}

TEST(wasm_binary, shrinking_a_body_shrinks_the_code_section)
{
    auto m = decode_module(make_module({{{valtype::i32}, {valtype::i32}, {},
        {ins(opcode::local_get, 0), ins(opcode::local_get, 0), ins(opcode::i32_xor)}, "f"}}));
    const auto before = code_section_size(m);
    auto& body = (*m.code())[0];
    body.instrs = {ins(opcode::i32_const, 0), ins(opcode::end)};
    body.raw.reset();
    EXPECT_LT(code_section_size(m), before);
    const auto again = decode_module(encode_module(m));
    EXPECT_EQ((*again.code())[0].instrs, body.instrs);
}

TEST(wasm_binary, reencoded_bodies_use_minimal_leb)
{
    // local.get with a padded index: 20 80 00.
    const auto input = from_hex("0061736d01000000"
                                "01060160017f017f"
                                "03020100"
                                "0a0a010800208000" "41016a0b");
    auto m = decode_module(input);
    EXPECT_EQ(encode_module(m), input);  // untouched: raw passthrough
    auto& body = (*m.code())[0];
    body.raw.reset();
    const auto out = encode_module(m);
    EXPECT_EQ(out, from_hex(one_function_module));
}

TEST(wasm_binary, unsupported_opcodes_are_preserved)
{
    // i32.load offset=0 align=2 between local.get and end; memory section present.
    const auto input = from_hex("0061736d01000000"
                                "01060160017f017f"
                                "03020100"
                                "0503010001"
                                "0a0901070020002802000b");
    const auto m = decode_module(input);
    const auto& body = (*m.code())[0];
    ASSERT_EQ(body.instrs.size(), 3u);
    EXPECT_EQ(body.instrs[1].op, opcode::unsupported);
    EXPECT_EQ(body.instrs[1].raw, from_hex("280200"));
    auto copy = m;
    (*copy.code())[0].raw.reset();
    EXPECT_EQ(encode_module(copy), input);

    (*copy.code())[0].instrs[1].raw.clear();
    EXPECT_THROW(encode_module(copy), encode_error);
}

TEST(wasm_binary, corpus_round_trip)
{
    const auto files = corpus_files();
    ASSERT_EQ(files.size(), 12u);
    for (const auto& f : files)
    {
        const auto b = read_file(f);
        const auto m = decode_module(b);
        EXPECT_EQ(encode_module(m), b) << f;

        // Forcing re-encoding of every body keeps instructions and counts.
        auto copy = m;
        for (auto& body : *copy.code())
            body.raw.reset();
        const auto re = decode_module(encode_module(copy));
        EXPECT_EQ(count_instructions(re), count_instructions(m)) << f;
        for (size_t i = 0; i < m.code()->size(); ++i)
            EXPECT_EQ((*re.code())[i].instrs, (*m.code())[i].instrs) << f;
    }
}

TEST(wasm_binary, decoding_arbitrary_bytes_never_crashes)
{
    std::mt19937 rng{11};
    const auto files = corpus_files();
    size_t errors = 0;
    for (int i = 0; i < 4000; ++i)
    {
        auto b = read_file(files[static_cast<size_t>(i) % files.size()]);
        const int flips = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < flips; ++k)
            b[8 + rng() % (b.size() - 8)] = static_cast<uint8_t>(rng());
        if (rng() % 4 == 0)
            b.resize(rng() % b.size());
        try
        {
            const auto m = decode_module(b);
            (void)count_instructions(m);
            (void)encode_module(m);
        }
        catch (const decode_error&)
        {
            ++errors;
        }
    }
    EXPECT_GT(errors, 0u);
}
