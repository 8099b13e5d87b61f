#include "ncomp/data_modules.hpp"

#include <algorithm>

#include "ncomp/errors.hpp"

namespace ncomp {

PhaseSignals next_phase(bool equal, PhaseSignals prev) {
    const int e = equal ? 1 : 0;
    auto clamp01 = [](int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 1)); };
    PhaseSignals out;
    out.searching = clamp01((1 - e) - prev.goal_found);
    out.goal_found = clamp01(e + prev.goal_found);
    out.terminated = clamp01(e * prev.goal_found);
    return out;
}

InputResult DataModules::input(const Bits& d_e, const Bits& x, PhaseSignals prev) const {
    if (d_e.size() != x.size() || x.size() != word_width())
        throw ConfigError("Input module: word widths differ");
    InputResult r;
    r.equal = equality(d_e, x);
    r.c_i = next_phase(r.equal, prev);
    r.d_i = x;
    return r;
}

Bits DataModules::apply(const Bits& d_m, int op) const {
    auto a = alu(op, transform(d_m));
    return output(a.c_a, a.d_a, d_m).d_o;
}

std::array<std::size_t, 3> view_cells_for(int op) {
    if (op < 0 || op >= kNop) return {0, 1, 2};
    const auto d = static_cast<std::size_t>(op);
    return {0, 1 + 2 * d, 2 + 2 * d};
}

// ------------------------------------------------------------------- Sokoban

SokobanOracleModules::SokobanOracleModules(std::shared_ptr<const SokobanDomain> domain)
    : domain_(std::move(domain)) {}

bool SokobanOracleModules::equality(std::span<const std::uint8_t> d_e, std::span<const std::uint8_t> x) const {
    return std::equal(d_e.begin(), d_e.end(), x.begin(), x.end());
}

Bits SokobanOracleModules::transform(const Bits& d_m) const {
    const GridWorld w = domain_->decode(d_m);
    const std::size_t a = w.agent_index();
    const long r = static_cast<long>(a / w.width);
    const long c = static_cast<long>(a % w.width);
    Bits view;
    view.reserve(kViewWidth);
    auto push_cell = [&](long rr, long cc) {
        Cell cell = Cell::wall;
        if (rr >= 0 && cc >= 0 && rr < static_cast<long>(w.height) && cc < static_cast<long>(w.width))
            cell = w.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
        auto bits = domain_->encode_cell(cell);
        view.insert(view.end(), bits.begin(), bits.end());
    };
    push_cell(r, c);
    for (int d = 0; d < 4; ++d)
        for (int k = 1; k <= 2; ++k) push_cell(r + k * kRowStep[d], c + k * kColStep[d]);
    return view;
}

AluResult SokobanOracleModules::alu(int op, const Bits& d_f) const {
    if (op < 0 || op >= kNumOps) throw ConfigError("ALU operation out of range");
    if (d_f.size() != kViewWidth) throw DomainError("local view must be 36 bits");
    auto cell = [&](std::size_t i) { return domain_->decode_cell(d_f.data() + 4 * i); };
    const auto idx = view_cells_for(op);
    std::array<Cell, 3> cells{cell(idx[0]), cell(idx[1]), cell(idx[2])};

    AluResult r;
    if (op != kNop) {
        if (cells[1] == Cell::empty) {
            r.c_a = true;
            cells = {Cell::empty, Cell::agent, cells[2]};
        } else if (cells[1] == Cell::box && cells[2] == Cell::empty) {
            r.c_a = true;
            cells = {Cell::empty, Cell::agent, Cell::box};
        }
    }
    r.d_a.assign(4, 0);
    if (r.c_a) r.d_a[static_cast<std::size_t>(op)] = 1;
    for (Cell c : cells) {
        auto bits = domain_->encode_cell(c);
        r.d_a.insert(r.d_a.end(), bits.begin(), bits.end());
    }
    return r;
}

OutputResult SokobanOracleModules::output(bool c_a, const Bits& d_a, const Bits& d_m) const {
    if (d_a.size() != kChangeWidth) throw DomainError("local change must be 16 bits");
    OutputResult r;
    r.c_o = c_a;
    r.d_o = d_m;
    if (!c_a) return r;
    const auto dir = std::find(d_a.begin(), d_a.begin() + 4, 1) - d_a.begin();
    if (dir >= 4) throw DomainError("changed local view without a direction");
    const std::size_t n = domain_->size();
    const std::size_t a = domain_->decode(d_m).agent_index();
    for (long k = 0; k < 3; ++k) {
        const long rr = static_cast<long>(a / n) + k * kRowStep[dir];
        const long cc = static_cast<long>(a % n) + k * kColStep[dir];
        const std::uint8_t* cell = d_a.data() + 4 + 4 * k;
        if (rr < 0 || cc < 0 || rr >= static_cast<long>(n) || cc >= static_cast<long>(n)) {
            if (k == 2 && domain_->decode_cell(cell) == Cell::wall) continue;
            throw DomainError("local change indexes outside the grid");
        }
        std::copy_n(cell, 4, r.d_o.begin() + static_cast<std::ptrdiff_t>(4 * (static_cast<std::size_t>(rr) * n + static_cast<std::size_t>(cc))));
    }
    return r;
}

// --------------------------------------------------------------- passthrough

PassthroughOracleModules::PassthroughOracleModules(std::shared_ptr<const Domain> domain)
    : domain_(std::move(domain)) {}

bool PassthroughOracleModules::equality(std::span<const std::uint8_t> d_e, std::span<const std::uint8_t> x) const {
    return std::equal(d_e.begin(), d_e.end(), x.begin(), x.end());
}

Bits PassthroughOracleModules::transform(const Bits& d_m) const { return d_m; }

AluResult PassthroughOracleModules::alu(int op, const Bits& d_f) const {
    AluResult r;
    r.d_a = domain_->apply_action(d_f, op);
    r.c_a = r.d_a != d_f;
    return r;
}

OutputResult PassthroughOracleModules::output(bool c_a, const Bits& d_a, const Bits& d_m) const {
    if (d_a.size() != d_m.size()) throw DomainError("ALU output width differs from the data word");
    return {c_a, c_a ? d_a : d_m};
}

std::shared_ptr<const DataModules> make_oracle_modules(const std::shared_ptr<const Domain>& domain) {
    if (auto sok = std::dynamic_pointer_cast<const SokobanDomain>(domain))
        return std::make_shared<SokobanOracleModules>(sok);
    return std::make_shared<PassthroughOracleModules>(domain);
}

}  // namespace ncomp
