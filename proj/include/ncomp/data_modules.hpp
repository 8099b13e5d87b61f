#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>

#include "ncomp/bits.hpp"
#include "ncomp/domains.hpp"

namespace ncomp {

// Phase signals emitted by the Input module: searching, goal found
// (latched), terminated.
struct PhaseSignals {
    std::uint8_t searching = 0;
    std::uint8_t goal_found = 0;
    std::uint8_t terminated = 0;

    std::array<double, 3> as_reals() const {
        return {double(searching), double(goal_found), double(terminated)};
    }
    bool operator==(const PhaseSignals&) const = default;
};

// Phase update from the equality bit, each signal clamped to {0, 1}.
PhaseSignals next_phase(bool equal, PhaseSignals prev);

struct InputResult {
    PhaseSignals c_i;
    bool equal = false;
    Bits d_i;
};

struct AluResult {
    bool c_a = false;
    Bits d_a;
};

struct OutputResult {
    bool c_o = false;
    Bits d_o;
};

// Local view around the agent: 9 cells x 4 bits, ordered center, up1, up2,
// right1, right2, down1, down2, left1, left2. Out-of-grid cells read as wall.
inline constexpr std::size_t kViewCells = 9;
inline constexpr std::size_t kViewWidth = kViewCells * 4;
// Local change: direction one-hot (all zero when unchanged) followed by the
// agent's former cell, the target cell and the cell beyond.
inline constexpr std::size_t kChangeWidth = 4 + 3 * 4;

// Input, Transform_D, ALU and Output for one domain and representation.
class DataModules {
public:
    virtual ~DataModules() = default;

    virtual std::size_t word_width() const = 0;
    virtual bool equality(std::span<const std::uint8_t> d_e, std::span<const std::uint8_t> x) const = 0;
    virtual Bits transform(const Bits& d_m) const = 0;
    virtual AluResult alu(int op, const Bits& d_f) const = 0;
    virtual OutputResult output(bool c_a, const Bits& d_a, const Bits& d_m) const = 0;

    InputResult input(const Bits& d_e, const Bits& x, PhaseSignals prev) const;
    // Transform_D -> ALU -> Output on one word.
    Bits apply(const Bits& d_m, int op) const;
};

class SokobanOracleModules final : public DataModules {
public:
    explicit SokobanOracleModules(std::shared_ptr<const SokobanDomain> domain);

    std::size_t word_width() const override { return domain_->word_width(); }
    bool equality(std::span<const std::uint8_t> d_e, std::span<const std::uint8_t> x) const override;
    Bits transform(const Bits& d_m) const override;
    AluResult alu(int op, const Bits& d_f) const override;
    OutputResult output(bool c_a, const Bits& d_a, const Bits& d_m) const override;

    const SokobanDomain& domain() const { return *domain_; }

private:
    std::shared_ptr<const SokobanDomain> domain_;
};

// Domains whose ALU works on the whole word: Transform_D and Output pass the
// data through.
class PassthroughOracleModules final : public DataModules {
public:
    explicit PassthroughOracleModules(std::shared_ptr<const Domain> domain);

    std::size_t word_width() const override { return domain_->word_width(); }
    bool equality(std::span<const std::uint8_t> d_e, std::span<const std::uint8_t> x) const override;
    Bits transform(const Bits& d_m) const override;
    AluResult alu(int op, const Bits& d_f) const override;
    OutputResult output(bool c_a, const Bits& d_a, const Bits& d_m) const override;

private:
    std::shared_ptr<const Domain> domain_;
};

std::shared_ptr<const DataModules> make_oracle_modules(const std::shared_ptr<const Domain>& domain);

// Cells of the view along direction `op` (center, first, second).
std::array<std::size_t, 3> view_cells_for(int op);

}  // namespace ncomp
