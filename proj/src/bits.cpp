#include "ncomp/bits.hpp"

#include "ncomp/errors.hpp"

namespace ncomp {

std::string to_bit_string(std::span<const std::uint8_t> bits) {
    std::string out;
    out.reserve(bits.size());
    for (auto b : bits) out.push_back(b ? '1' : '0');
    return out;
}

Bits from_bit_string(std::string_view text) {
    Bits out;
    out.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') throw DomainError("bit string contains '" + std::string(1, c) + "'");
        out.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

std::vector<double> to_reals(std::span<const std::uint8_t> bits) {
    return {bits.begin(), bits.end()};
}

std::size_t popcount(std::span<const std::uint8_t> bits) {
    std::size_t n = 0;
    for (auto b : bits) n += b ? 1 : 0;
    return n;
}

std::size_t BitsHash::operator()(const Bits& bits) const noexcept {
    // FNV-1a over 64-bit packed chunks.
    std::uint64_t h = 1469598103934665603ull;
    std::uint64_t chunk = 0;
    int fill = 0;
    for (auto b : bits) {
        chunk = (chunk << 1) | (b & 1u);
        if (++fill == 64) {
            h = (h ^ chunk) * 1099511628211ull;
            chunk = 0;
            fill = 0;
        }
    }
    h = (h ^ chunk ^ (static_cast<std::uint64_t>(fill) << 58)) * 1099511628211ull;
    return static_cast<std::size_t>(h ^ (h >> 29));
}

}  // namespace ncomp
