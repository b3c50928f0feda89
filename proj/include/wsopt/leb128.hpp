// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

namespace wsopt
{
using bytes = std::vector<uint8_t>;
using bytes_view = std::span<const uint8_t>;

/// Result of a LEB128 read: the value and the number of bytes consumed.
template <typename T>
struct leb_result
{
    T value;
    size_t length;
};

enum class leb_status
{
    ok,
    truncated,
    malformed,
};

/// Decodes an unsigned LEB128 value of at most sizeof(T)*8 bits.
/// Rejects overlong encodings and set bits beyond the type width.
template <typename T>
leb_status read_uleb(bytes_view in, leb_result<T>& out) noexcept
{
    static_assert(std::is_unsigned_v<T>);
    constexpr unsigned width = sizeof(T) * 8;
    constexpr size_t max_len = (width + 6) / 7;

    T result = 0;
    unsigned shift = 0;
    for (size_t i = 0; i < max_len; ++i)
    {
        if (i >= in.size())
            return leb_status::truncated;
        const uint8_t b = in[i];
        const T payload = b & 0x7f;
        if (i == max_len - 1)
        {
            const unsigned remaining = width - shift;
            if (remaining < 7 && (payload >> remaining) != 0)
                return leb_status::malformed;
        }
        result |= payload << shift;
        if ((b & 0x80) == 0)
        {
            out = {result, i + 1};
            return leb_status::ok;
        }
        shift += 7;
    }
    return leb_status::malformed;
}

/// Decodes a signed LEB128 value of N bits (N <= 64), sign-extended into int64_t.
template <unsigned N>
leb_status read_sleb(bytes_view in, leb_result<int64_t>& out) noexcept
{
    static_assert(N > 0 && N <= 64);
    constexpr size_t max_len = (N + 6) / 7;

    uint64_t result = 0;
    unsigned shift = 0;
    for (size_t i = 0; i < max_len; ++i)
    {
        if (i >= in.size())
            return leb_status::truncated;
        const uint8_t b = in[i];
        const uint64_t payload = b & 0x7f;
        if (i == max_len - 1)
        {
            // The unused high bits of the last byte must all equal the sign bit.
            const unsigned used = N - shift;
            if (used < 7)
            {
                const uint8_t sign = (payload >> (used - 1)) & 1;
                const uint8_t rest = static_cast<uint8_t>(payload >> used);
                const uint8_t expect = sign ? static_cast<uint8_t>(0x7f >> used) : 0;
                if (rest != expect || (b & 0x80) != 0)
                    return leb_status::malformed;
            }
        }
        result |= payload << shift;
        shift += 7;
        if ((b & 0x80) == 0)
        {
            if (shift < 64 && (b & 0x40) != 0)
                result |= ~uint64_t{0} << shift;
            out = {static_cast<int64_t>(result), i + 1};
            return leb_status::ok;
        }
    }
    return leb_status::malformed;
}

inline void write_uleb(bytes& out, uint64_t value)
{
    do
    {
        uint8_t b = value & 0x7f;
        value >>= 7;
        if (value != 0)
            b |= 0x80;
        out.push_back(b);
    } while (value != 0);
}

inline void write_sleb(bytes& out, int64_t value)
{
    while (true)
    {
        const uint8_t b = value & 0x7f;
        value >>= 7;  // arithmetic shift
        const bool done = (value == 0 && (b & 0x40) == 0) || (value == -1 && (b & 0x40) != 0);
        if (done)
        {
            out.push_back(b);
            return;
        }
        out.push_back(b | 0x80);
    }
}

inline size_t uleb_size(uint64_t value)
{
    size_t n = 1;
    while (value >= 0x80)
    {
        value >>= 7;
        ++n;
    }
    return n;
}
}  // namespace wsopt
