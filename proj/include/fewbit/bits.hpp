#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fewbit {

// One stored code: a fixed-length sequence of bits, one byte per bit in
// memory (tinydata handles the packed on-disk form).
struct BitVector {
    std::vector<std::uint8_t> bits;

    BitVector() = default;
    explicit BitVector(std::size_t n) : bits(n, 0) {}

    std::size_t size() const { return bits.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits[i]; }
    std::uint8_t& operator[](std::size_t i) { return bits[i]; }

    bool operator==(const BitVector& o) const = default;

    // Lexicographic; also the prefix order used by k-anonymity truncation.
    bool operator<(const BitVector& o) const { return bits < o.bits; }

    std::string to_string() const {
        std::string s(bits.size(), '0');
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) s[i] = '1';
        return s;
    }
};

}  // namespace fewbit
