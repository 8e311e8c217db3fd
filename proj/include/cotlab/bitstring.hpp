#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cotlab {

// Bits are kept MSB-first: bits[0] is the most significant and also the
// leftmost character when rendered.
using Bits = std::vector<int>;

inline Bits bits_from_u64(uint64_t value, size_t width) {
    if (width < 64 && (value >> width))
        throw std::invalid_argument("value does not fit in bit width");
    Bits out(width);
    for (size_t i = 0; i < width; ++i)
        out[width - 1 - i] = int((value >> i) & 1);
    return out;
}

inline uint64_t u64_from_bits(const Bits& bits) {
    if (bits.size() > 64) throw std::invalid_argument("bit string too wide");
    uint64_t v = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("non-binary bit");
        v = (v << 1) | uint64_t(b);
    }
    return v;
}

inline std::string bits_render(const Bits& bits) {
    std::string s;
    s.reserve(bits.size());
    for (int b : bits) s += char('0' + b);
    return s;
}

inline Bits bits_parse(const std::string& s) {
    Bits out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("non-binary character in bit string");
        out.push_back(c - '0');
    }
    return out;
}

inline int bits_parity(const Bits& bits) {
    int p = 0;
    for (int b : bits) p ^= b;
    return p;
}

// x with bit i flipped; i is 1-based and counts from the left
inline Bits hamming_neighbor(const Bits& bits, size_t i) {
    if (i < 1 || i > bits.size())
        throw std::out_of_range("flip position outside the bit string");
    Bits out = bits;
    out[i - 1] ^= 1;
    return out;
}

} // namespace cotlab
