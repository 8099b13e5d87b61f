#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ncomp/bits.hpp"

namespace ncomp {

// Operation indices shared by every domain, the oracle and Transform_C.
inline constexpr int kNumOps = 5;
inline constexpr int kOpUp = 0;
inline constexpr int kOpRight = 1;
inline constexpr int kOpDown = 2;
inline constexpr int kOpLeft = 3;
inline constexpr int kNop = 4;

enum class DomainKind { sokoban, puzzle, manipulation };

// How a word splits into categorical groups for supervised targets:
// `count` groups of `width` one-hot bits, or (binary = true) `count`
// independent bits trained as two-class groups.
struct WordGroups {
    std::size_t count = 0;
    std::size_t width = 0;
    bool binary = false;
};

class Domain {
public:
    virtual ~Domain() = default;

    virtual DomainKind kind() const = 0;
    virtual std::string name() const = 0;
    virtual std::size_t word_width() const = 0;

    // Deterministic successor; nop and blocked actions return the word itself.
    virtual Bits apply_action(const Bits& word, int op) const = 0;
    // Throws DomainError when the word is not a valid configuration.
    virtual void validate_word(const Bits& word) const = 0;
    virtual Bits sample_start(std::mt19937_64& rng) const = 0;
    virtual std::string render(const Bits& word) const = 0;
    virtual WordGroups word_groups() const = 0;
    // Parameters needed to rebuild this domain (see make_domain).
    virtual std::string descriptor() const = 0;
};

// ---------------------------------------------------------------- Sokoban

enum class Cell : std::uint8_t { empty = 0, wall = 1, box = 2, agent = 3 };

struct GridWorld {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Cell> cells;  // row-major

    GridWorld() = default;
    GridWorld(std::size_t w, std::size_t h) : width(w), height(h), cells(w * h, Cell::empty) {}

    Cell at(std::size_t row, std::size_t col) const { return cells[row * width + col]; }
    Cell& at(std::size_t row, std::size_t col) { return cells[row * width + col]; }
    std::size_t agent_index() const;  // throws DomainError unless exactly one agent
    // Exactly one agent and a wall ring; throws DomainError.
    void validate() const;
    bool operator==(const GridWorld&) const = default;
};

// Maps each cell code to the position of its bit inside a 4-wide one-hot.
struct CellCodec {
    std::array<std::uint8_t, 4> slot{0, 1, 2, 3};

    static CellCodec identity() { return {}; }
    void validate() const;  // throws ConfigError unless bijective
    Cell decode_slot(std::size_t slot_index) const;
    bool operator==(const CellCodec&) const = default;
};

// New codec where cell code c takes the slot that code permutation[c] had.
CellCodec remap_representation(const CellCodec& codec, const std::array<std::uint8_t, 4>& permutation);

// Row/column offsets for the four moves.
inline constexpr std::array<int, 4> kRowStep{-1, 0, 1, 0};
inline constexpr std::array<int, 4> kColStep{0, 1, 0, -1};

class SokobanDomain final : public Domain {
public:
    explicit SokobanDomain(std::size_t size = 6, CellCodec codec = {});

    DomainKind kind() const override { return DomainKind::sokoban; }
    std::string name() const override;
    std::size_t word_width() const override { return size_ * size_ * 4; }
    Bits apply_action(const Bits& word, int op) const override;
    void validate_word(const Bits& word) const override { decode(word); }
    Bits sample_start(std::mt19937_64& rng) const override { return encode(sample_world(rng)); }
    std::string render(const Bits& word) const override;
    WordGroups word_groups() const override { return {size_ * size_, 4, false}; }
    std::string descriptor() const override;

    std::size_t size() const { return size_; }
    const CellCodec& codec() const { return codec_; }

    Bits encode(const GridWorld& world) const;
    GridWorld decode(const Bits& word) const;
    GridWorld sample_world(std::mt19937_64& rng) const;
    static GridWorld apply_world(const GridWorld& world, int op);

    Bits encode_cell(Cell c) const;
    Cell decode_cell(const std::uint8_t* bits) const;  // 4 bits, throws unless one-hot

private:
    std::size_t size_;
    CellCodec codec_;
};

GridWorld sample_world(std::mt19937_64& rng, std::size_t size);

// ---------------------------------------------------------- Sliding puzzle

// 3x3 board, each cell a 4-bit big-endian tile id (0 = blank).
class SlidingPuzzleDomain final : public Domain {
public:
    static constexpr std::size_t kSide = 3;
    static constexpr std::size_t kCells = 9;
    static constexpr std::size_t kBitsPerCell = 4;

    DomainKind kind() const override { return DomainKind::puzzle; }
    std::string name() const override { return "puzzle3x3"; }
    std::size_t word_width() const override { return kCells * kBitsPerCell; }
    Bits apply_action(const Bits& word, int op) const override;
    void validate_word(const Bits& word) const override { decode(word); }
    Bits sample_start(std::mt19937_64& rng) const override;
    std::string render(const Bits& word) const override;
    WordGroups word_groups() const override { return {kCells * kBitsPerCell, 2, true}; }
    std::string descriptor() const override { return R"({"domain":"puzzle"})"; }

    std::array<std::uint8_t, kCells> decode(const Bits& word) const;
    Bits encode(const std::array<std::uint8_t, kCells>& tiles) const;
};

// ------------------------------------------------------------ Manipulation

// Four stacking positions, at most three objects each, three object classes.
// Word: 12 cells (position-major, bottom to top) plus the gripper register,
// each a 4-wide one-hot (slot 0 = empty, 1..3 = class).
class ManipulationDomain final : public Domain {
public:
    static constexpr std::size_t kPositions = 4;
    static constexpr std::size_t kHeight = 3;
    static constexpr std::size_t kGroups = kPositions * kHeight + 1;

    struct State {
        std::array<std::array<std::uint8_t, kHeight>, kPositions> stacks{};  // 0 = empty
        std::uint8_t gripper = 0;
        bool operator==(const State&) const = default;
    };

    DomainKind kind() const override { return DomainKind::manipulation; }
    std::string name() const override { return "manipulation"; }
    std::size_t word_width() const override { return kGroups * 4; }
    Bits apply_action(const Bits& word, int op) const override;
    void validate_word(const Bits& word) const override { decode(word); }
    Bits sample_start(std::mt19937_64& rng) const override;
    std::string render(const Bits& word) const override;
    WordGroups word_groups() const override { return {kGroups, 4, false}; }
    std::string descriptor() const override { return R"({"domain":"manipulation"})"; }

    static std::size_t height(const State& s, std::size_t pos);
    State decode(const Bits& word) const;
    Bits encode(const State& s) const;
};

// Rebuilds a domain from a descriptor string or from CLI-style arguments.
std::shared_ptr<const Domain> make_domain(const std::string& descriptor);
std::shared_ptr<const Domain> make_domain(const std::string& name, std::size_t size,
                                          const std::array<std::uint8_t, 4>& permutation);

}  // namespace ncomp
