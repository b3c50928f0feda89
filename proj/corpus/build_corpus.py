#!/usr/bin/env python3
# wsopt: a superoptimizer for WebAssembly bytecode
# Copyright 2026 The wsopt Authors.
# SPDX-License-Identifier: Apache-2.0
"""Assembles corpus/src/*.wat into corpus/*.wasm and writes the test files.

Expected results come from the Python reference functions below, not from
running the binaries. Requires the `wasmtime` Python package for wat2wasm.
"""

import json
import pathlib

import wasmtime

HERE = pathlib.Path(__file__).resolve().parent
M32 = (1 << 32) - 1
M64 = (1 << 64) - 1


def s32(v):
    v &= M32
    return v - (1 << 32) if v >> 31 else v


def babbage():
    n = 520
    while n * n % 1000000 != 269696:
        n += 1
    return n


def collatz(n):
    count = 0
    while n > 1:
        n = 3 * n + 1 if n % 2 else n // 2
        count += 1
    return count


def gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def fnv(w):
    h = (-3750763034362895579) & M64
    for i in range(8):
        h = ((h ^ ((w >> (8 * i)) & 255)) * 1099511628211) & M64
    return h


def t(export, args, expect):
    return {"export": export, "args": args, "expect": expect}


def trap(export, args, cause):
    return {"export": export, "args": args, "trap": cause}


# Tests for functions that touch memory or globals are expected to be skipped
# by the interpreter; they still document the intended behaviour.
ENTRIES = {
    "babbage": (
        "Babbage problem: smallest n whose square ends in 269696, plus a printing main.",
        [t("babbage", [], [babbage()])],
    ),
    "bitwise_io": (
        "Bit packing helpers whose only rewrites would duplicate shared values.",
        [
            t("pack_pair", [a, b], [(a + b) & M32, (a + b) & M32])
            for a, b in [(1, 2), (M32, 1), (0x12345678, 0x9ABCDEF0)]
        ]
        + [
            t("merge_bits", [a, b], [((a ^ b) * 2) & M32])
            for a, b in [(0, 0), (5, 3), (M32, 0x0F0F0F0F)]
        ]
        + [
            t("shift_out", [w, n], [(w & M64) >> (n & 63)] * 2)
            for w, n in [(M64, 1), (0x8000000000000000, 63), (12345, 64)]
        ],
    ),
    "planted_identities": (
        "Identities left in by an unoptimizing front end.",
        [t("self_cancel", [x, y], [y & M32]) for x, y in [(7, 9), (M32, 0), (3, M32)]]
        + [t("add_sub", [a, b], [a & M32]) for a, b in [(1, 2), (M32, M32), (0, 5)]]
        + [t("mask_merge", [x, y], [x & M32]) for x, y in [(0xF0F0, 0xFF00), (M32, 0), (0, M32)]]
        + [t("double_not", [x], [x & M64]) for x in [0, 1, M64, 0x0123456789ABCDEF]],
    ),
    "align": (
        "Alignment and rounding helpers.",
        [t("align_down8", [p], [p & ~7 & M32]) for p in [0, 7, 8, 13, M32]]
        + [t("align_up16", [p], [((p + 15) & M32) & ~15 & M32]) for p in [0, 1, 16, 17, M32]]
        + [t("is_aligned4", [p], [int(p % 4 == 0)]) for p in [0, 2, 4, M32]]
        + [t("page_offset", [p], [p & 0xFFFF]) for p in [0, 0x12345, M64]],
    ),
    "collatz": (
        "Collatz step counting with a parity helper.",
        [t("steps", [n], [collatz(n)]) for n in [1, 2, 3, 6, 7, 27, 97]]
        + [t("parity", [n], [n & 1]) for n in [0, 1, 2, M32]],
    ),
    "gcd": (
        "Euclid's algorithm, lcm and a trapping signed division.",
        [t("gcd", [a, b], [gcd(a, b)]) for a, b in [(12, 18), (17, 5), (0, 9), (9, 0)]]
        + [t("lcm", [a, b], [a * b // gcd(a, b)]) for a, b in [(4, 6), (21, 6), (7, 1)]]
        + [
            t("div_exact", [7, 2], [3]),
            t("div_exact", [-7, 2], [s32(-3) & M32]),
            trap("div_exact", [1, 0], "DivZero"),
            trap("div_exact", [-(1 << 31), -1], "Overflow"),
            trap("lcm", [0, 0], "DivZero"),
        ],
    ),
    "fnv_hash": (
        "FNV-1a mixing over the bytes of a 64-bit word.",
        [t("hash_word", [w], [fnv(w)]) for w in [0, 1, 0x0123456789ABCDEF, M64]]
        + [t("fold32", [h], [((h ^ (h >> 32)) & M32)]) for h in [0, 1 << 32, M64, 0xDEADBEEFCAFEBABE]],
    ),
    "minmax": (
        "Branch-free minimum, maximum, clamp, absolute value and negation.",
        [t("min_s", [a, b], [(a if s32(a) < s32(b) else b) & M32]) for a, b in [(1, 2), (-1, 2), (5, -5)]]
        + [t("max_u", [a, b], [max(a & M32, b & M32)]) for a, b in [(1, 2), (-1, 2), (7, 3)]]
        + [t("abs", [x], [abs(s32(x)) & M32]) for x in [0, 5, -5, -(1 << 31)]]
        + [t("clamp_byte", [x], [min(x & M32, 255)]) for x in [0, 254, 255, 256, -1]]
        + [t("sign", [x], [(-x) & M32]) for x in [0, 1, -1, 1 << 31]],
    ),
    "bit_tricks": (
        "Lowest-bit, power-of-two, halfword swap and byte extraction tricks.",
        [t("lowest_set", [x], [x & -x & M32]) for x in [0, 12, 1 << 31, M32]]
        + [t("clear_lowest", [x], [x & (x - 1) & M32]) for x in [0, 12, 1 << 31, M32]]
        + [t("is_pow2", [x], [int(x != 0 and x & (x - 1) == 0)]) for x in [0, 1, 6, 64, 1 << 31]]
        + [t("swap_halves", [x], [((x << 16) | (x >> 16)) & M32]) for x in [0, 0x12345678, M32]]
        + [t("low_byte", [x], [x & 255]) for x in [0, 0x1FF, M64]],
    ),
    "checksum_mem": (
        "Byte checksums over linear memory; the memory-reading function is not executable here.",
        [t("sum_bytes", [0, 8], [36])]
        + [
            t("fletcher_step", [a, b], [(a & 255) | ((b & 255) << 8)])
            for a, b in [(0, 0), (0x1FF, 0x2FE), (M32, M32)]
        ],
    ),
    "fizzbuzz": (
        "FizzBuzz classification and counting.",
        [t("classify", [n], [int(n % 3 == 0) | (int(n % 5 == 0) << 1)]) for n in [1, 3, 5, 15, 16]]
        + [t("count_fizz", [n], [n // 3]) for n in [0, 3, 10, 100]],
    ),
    "ring_buffer_mem": (
        "A ring buffer in linear memory addressed through a global head index.",
        [t("slot", [i], [(i & 15) << 2]) for i in [0, 5, 16, 0xFFFFFFFF]]
        + [t("peek", [0], [0])]
        + [t("wrap_index", [i, n], [((i + n) & M32) % 16]) for i, n in [(3, 4), (15, 1), (M32, 2)]],
    ),
}


def main():
    for name, (description, tests) in ENTRIES.items():
        wat = (HERE / "src" / f"{name}.wat").read_text()
        (HERE / f"{name}.wasm").write_bytes(wasmtime.wat2wasm(wat))
        doc = {"name": name, "description": description, "tests": tests}
        (HERE / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {len(ENTRIES)} entries")


if __name__ == "__main__":
    main()
