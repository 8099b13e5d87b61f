#include "ncomp/domains.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ncomp/errors.hpp"

namespace ncomp {

namespace {

void check_op(int op) {
    if (op < 0 || op >= kNumOps) throw ConfigError("operation index " + std::to_string(op) + " out of range");
}

void check_width(const Bits& word, std::size_t width) {
    if (word.size() != width)
        throw DomainError("word width " + std::to_string(word.size()) + " != " + std::to_string(width));
}

// Index of the set bit of a 4-wide one-hot group.
std::size_t one_hot_index(const std::uint8_t* bits, std::size_t width) {
    std::size_t found = width;
    for (std::size_t j = 0; j < width; ++j) {
        if (bits[j] > 1) throw DomainError("non-binary bit in word");
        if (bits[j]) {
            if (found != width) throw DomainError("cell group is not one-hot");
            found = j;
        }
    }
    if (found == width) throw DomainError("cell group is not one-hot");
    return found;
}

}  // namespace

// ------------------------------------------------------------------ GridWorld

std::size_t GridWorld::agent_index() const {
    std::size_t found = cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == Cell::agent) {
            if (found != cells.size()) throw DomainError("world has more than one agent");
            found = i;
        }
    if (found == cells.size()) throw DomainError("world has no agent");
    return found;
}

void GridWorld::validate() const {
    if (cells.size() != width * height) throw DomainError("grid cell count mismatch");
    agent_index();
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            if ((r == 0 || c == 0 || r + 1 == height || c + 1 == width) && at(r, c) != Cell::wall)
                throw DomainError("boundary cell is not a wall");
}

void CellCodec::validate() const {
    std::array<bool, 4> seen{};
    for (auto s : slot) {
        if (s >= 4 || seen[s]) throw ConfigError("cell codec is not a bijection over 4 slots");
        seen[s] = true;
    }
}

Cell CellCodec::decode_slot(std::size_t slot_index) const {
    for (std::size_t c = 0; c < 4; ++c)
        if (slot[c] == slot_index) return static_cast<Cell>(c);
    throw DomainError("slot not mapped by codec");
}

CellCodec remap_representation(const CellCodec& codec, const std::array<std::uint8_t, 4>& permutation) {
    codec.validate();
    CellCodec probe{permutation};
    probe.validate();
    CellCodec out;
    for (std::size_t c = 0; c < 4; ++c) out.slot[c] = codec.slot[permutation[c]];
    return out;
}

// -------------------------------------------------------------------- Sokoban

SokobanDomain::SokobanDomain(std::size_t size, CellCodec codec) : size_(size), codec_(codec) {
    if (size < 4) throw ConfigError("Sokoban worlds need size >= 4");
    codec_.validate();
}

std::string SokobanDomain::name() const {
    std::string n = "sokoban" + std::to_string(size_) + "x" + std::to_string(size_);
    if (!(codec_ == CellCodec::identity())) {
        n += "-remap";
        for (auto s : codec_.slot) n += std::to_string(s);
    }
    return n;
}

std::string SokobanDomain::descriptor() const {
    nlohmann::json d = {{"domain", "sokoban"},
                        {"size", size_},
                        {"codec", std::vector<int>(codec_.slot.begin(), codec_.slot.end())}};
    return d.dump();
}

Bits SokobanDomain::encode_cell(Cell c) const {
    Bits b(4, 0);
    b[codec_.slot[static_cast<std::size_t>(c)]] = 1;
    return b;
}

Cell SokobanDomain::decode_cell(const std::uint8_t* bits) const {
    return codec_.decode_slot(one_hot_index(bits, 4));
}

Bits SokobanDomain::encode(const GridWorld& world) const {
    if (world.width != size_ || world.height != size_) throw DomainError("world size does not match domain");
    Bits word(word_width(), 0);
    for (std::size_t i = 0; i < world.cells.size(); ++i)
        word[4 * i + codec_.slot[static_cast<std::size_t>(world.cells[i])]] = 1;
    return word;
}

GridWorld SokobanDomain::decode(const Bits& word) const {
    check_width(word, word_width());
    GridWorld w(size_, size_);
    for (std::size_t i = 0; i < w.cells.size(); ++i) w.cells[i] = decode_cell(word.data() + 4 * i);
    w.validate();
    return w;
}

GridWorld SokobanDomain::apply_world(const GridWorld& world, int op) {
    check_op(op);
    if (op == kNop) return world;
    const std::size_t a = world.agent_index();
    const long r = static_cast<long>(a / world.width);
    const long c = static_cast<long>(a % world.width);
    auto inside = [&](long rr, long cc) {
        return rr >= 0 && cc >= 0 && rr < static_cast<long>(world.height) && cc < static_cast<long>(world.width);
    };
    const long tr = r + kRowStep[op], tc = c + kColStep[op];
    const long br = tr + kRowStep[op], bc = tc + kColStep[op];
    if (!inside(tr, tc)) return world;
    GridWorld next = world;
    const Cell target = world.at(tr, tc);
    if (target == Cell::empty) {
        next.at(r, c) = Cell::empty;
        next.at(tr, tc) = Cell::agent;
    } else if (target == Cell::box && inside(br, bc) && world.at(br, bc) == Cell::empty) {
        next.at(r, c) = Cell::empty;
        next.at(tr, tc) = Cell::agent;
        next.at(br, bc) = Cell::box;
    }
    return next;
}

Bits SokobanDomain::apply_action(const Bits& word, int op) const {
    check_op(op);
    if (op == kNop) {
        validate_word(word);
        return word;
    }
    return encode(apply_world(decode(word), op));
}

GridWorld sample_world(std::mt19937_64& rng, std::size_t size) {
    if (size < 4) throw ConfigError("Sokoban worlds need size >= 4");
    GridWorld w(size, size);
    std::vector<std::size_t> free;
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            if (r == 0 || c == 0 || r + 1 == size || c + 1 == size)
                w.at(r, c) = Cell::wall;
            else
                free.push_back(r * size + c);
        }
    const int walls = std::uniform_int_distribution<int>(0, 2)(rng);
    const int boxes = std::uniform_int_distribution<int>(1, 5)(rng);
    auto take = [&](Cell what) {
        if (free.empty()) throw SamplingError("world too small for its objects");
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng);
        w.cells[free[k]] = what;
        free.erase(free.begin() + static_cast<std::ptrdiff_t>(k));
    };
    for (int i = 0; i < walls; ++i) take(Cell::wall);
    for (int i = 0; i < boxes; ++i) take(Cell::box);
    take(Cell::agent);
    return w;
}

GridWorld SokobanDomain::sample_world(std::mt19937_64& rng) const {
    return ncomp::sample_world(rng, size_);
}

std::string SokobanDomain::render(const Bits& word) const {
    const GridWorld w = decode(word);
    std::string out;
    for (std::size_t r = 0; r < w.height; ++r) {
        for (std::size_t c = 0; c < w.width; ++c) out.push_back(".#$@"[static_cast<int>(w.at(r, c))]);
        out.push_back('\n');
    }
    return out;
}

// ------------------------------------------------------------- Sliding puzzle

std::array<std::uint8_t, SlidingPuzzleDomain::kCells> SlidingPuzzleDomain::decode(const Bits& word) const {
    check_width(word, word_width());
    std::array<std::uint8_t, kCells> tiles{};
    std::array<bool, kCells> seen{};
    for (std::size_t i = 0; i < kCells; ++i) {
        unsigned v = 0;
        for (std::size_t k = 0; k < kBitsPerCell; ++k) {
            const auto b = word[i * kBitsPerCell + k];
            if (b > 1) throw DomainError("non-binary bit in puzzle word");
            v = (v << 1) | b;
        }
        if (v >= kCells || seen[v]) throw DomainError("puzzle word is not a permutation of tiles 0..8");
        seen[v] = true;
        tiles[i] = static_cast<std::uint8_t>(v);
    }
    return tiles;
}

Bits SlidingPuzzleDomain::encode(const std::array<std::uint8_t, kCells>& tiles) const {
    Bits word(word_width(), 0);
    for (std::size_t i = 0; i < kCells; ++i)
        for (std::size_t k = 0; k < kBitsPerCell; ++k)
            word[i * kBitsPerCell + k] = (tiles[i] >> (kBitsPerCell - 1 - k)) & 1u;
    return word;
}

Bits SlidingPuzzleDomain::apply_action(const Bits& word, int op) const {
    check_op(op);
    auto tiles = decode(word);
    if (op == kNop) return word;
    const std::size_t blank = static_cast<std::size_t>(std::find(tiles.begin(), tiles.end(), 0) - tiles.begin());
    const long r = static_cast<long>(blank / kSide) + kRowStep[op];
    const long c = static_cast<long>(blank % kSide) + kColStep[op];
    if (r < 0 || c < 0 || r >= static_cast<long>(kSide) || c >= static_cast<long>(kSide)) return word;
    std::swap(tiles[blank], tiles[static_cast<std::size_t>(r) * kSide + static_cast<std::size_t>(c)]);
    return encode(tiles);
}

Bits SlidingPuzzleDomain::sample_start(std::mt19937_64& rng) const {
    std::array<std::uint8_t, kCells> tiles{};
    std::iota(tiles.begin(), tiles.end(), 0);
    std::shuffle(tiles.begin(), tiles.end(), rng);
    return encode(tiles);
}

std::string SlidingPuzzleDomain::render(const Bits& word) const {
    auto tiles = decode(word);
    std::string out;
    for (std::size_t i = 0; i < kCells; ++i) {
        out.push_back(tiles[i] == 0 ? '.' : static_cast<char>('0' + tiles[i]));
        if (i % kSide == kSide - 1) out.push_back('\n');
    }
    return out;
}

// --------------------------------------------------------------- Manipulation

std::size_t ManipulationDomain::height(const State& s, std::size_t pos) {
    std::size_t h = 0;
    while (h < kHeight && s.stacks[pos][h] != 0) ++h;
    return h;
}

ManipulationDomain::State ManipulationDomain::decode(const Bits& word) const {
    check_width(word, word_width());
    State s;
    for (std::size_t p = 0; p < kPositions; ++p) {
        bool gap = false;
        for (std::size_t h = 0; h < kHeight; ++h) {
            const auto v = static_cast<std::uint8_t>(one_hot_index(word.data() + 4 * (p * kHeight + h), 4));
            if (v != 0 && gap) throw DomainError("object floating above an empty cell");
            if (v == 0) gap = true;
            s.stacks[p][h] = v;
        }
    }
    s.gripper = static_cast<std::uint8_t>(one_hot_index(word.data() + 4 * kPositions * kHeight, 4));
    return s;
}

Bits ManipulationDomain::encode(const State& s) const {
    Bits word(word_width(), 0);
    for (std::size_t p = 0; p < kPositions; ++p)
        for (std::size_t h = 0; h < kHeight; ++h) word[4 * (p * kHeight + h) + s.stacks[p][h]] = 1;
    word[4 * kPositions * kHeight + s.gripper] = 1;
    return word;
}

Bits ManipulationDomain::apply_action(const Bits& word, int op) const {
    check_op(op);
    State s = decode(word);
    if (op == kNop) return word;
    const auto pos = static_cast<std::size_t>(op);
    const std::size_t h = height(s, pos);
    if (s.gripper == 0) {
        if (h == 0) return word;
        s.gripper = s.stacks[pos][h - 1];
        s.stacks[pos][h - 1] = 0;
    } else {
        if (h == kHeight) return word;
        s.stacks[pos][h] = s.gripper;
        s.gripper = 0;
    }
    return encode(s);
}

Bits ManipulationDomain::sample_start(std::mt19937_64& rng) const {
    State s;
    const int objects = std::uniform_int_distribution<int>(2, 6)(rng);
    for (int i = 0; i < objects; ++i) {
        std::vector<std::size_t> open;
        for (std::size_t p = 0; p < kPositions; ++p)
            if (height(s, p) < kHeight) open.push_back(p);
        const std::size_t p = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
        s.stacks[p][height(s, p)] = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(1, 3)(rng));
    }
    return encode(s);
}

std::string ManipulationDomain::render(const Bits& word) const {
    const State s = decode(word);
    std::string out = "gripper: ";
    out.push_back(s.gripper ? static_cast<char>('A' + s.gripper - 1) : '-');
    out.push_back('\n');
    for (std::size_t h = kHeight; h-- > 0;) {
        for (std::size_t p = 0; p < kPositions; ++p)
            out.push_back(s.stacks[p][h] ? static_cast<char>('A' + s.stacks[p][h] - 1) : '.');
        out.push_back('\n');
    }
    return out;
}

// -------------------------------------------------------------------- factory

std::shared_ptr<const Domain> make_domain(const std::string& name, std::size_t size,
                                          const std::array<std::uint8_t, 4>& permutation) {
    if (name == "sokoban") return std::make_shared<SokobanDomain>(size, remap_representation({}, permutation));
    if (name == "puzzle") return std::make_shared<SlidingPuzzleDomain>();
    if (name == "manipulation") return std::make_shared<ManipulationDomain>();
    throw ConfigError("unknown domain '" + name + "'");
}

std::shared_ptr<const Domain> make_domain(const std::string& descriptor) {
    auto d = nlohmann::json::parse(descriptor);
    const auto name = d.at("domain").get<std::string>();
    std::array<std::uint8_t, 4> perm{0, 1, 2, 3};
    if (d.contains("codec")) {
        auto v = d["codec"].get<std::vector<int>>();
        if (v.size() != 4) throw ConfigError("codec must list 4 slots");
        for (std::size_t i = 0; i < 4; ++i) perm[i] = static_cast<std::uint8_t>(v[i]);
    }
    return make_domain(name, d.value("size", std::size_t{6}), perm);
}

}  // namespace ncomp
