#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ncomp {

// Binary vector with one byte per bit (values 0/1). Data words, local views
// and local changes all use this representation.
using Bits = std::vector<std::uint8_t>;

std::string to_bit_string(std::span<const std::uint8_t> bits);
Bits from_bit_string(std::string_view text);

// Real-valued copy (0.0 / 1.0), used as network input.
std::vector<double> to_reals(std::span<const std::uint8_t> bits);

std::size_t popcount(std::span<const std::uint8_t> bits);

struct BitsHash {
    std::size_t operator()(const Bits& bits) const noexcept;
};

}  // namespace ncomp
