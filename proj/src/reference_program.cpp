#include "ncomp/reference_program.hpp"

namespace ncomp {

namespace {

constexpr double kLogit = 10.0;  // read-mode and operation logit scale
constexpr double kGain = 40.0;   // saturates tanh on {0, 1} inputs

// +1/-1 real word with a single +1 at `bit`; -1 everywhere for bit < 0.
CompReals signed_one_hot(int bit) {
    CompReals w;
    w.fill(-1.0);
    if (bit >= 0) w[static_cast<std::size_t>(bit)] = 1.0;
    return w;
}

// Index of the set bit among e0..e3, -1 otherwise.
int counter_state(const CompReals& c_m) {
    for (int k = 0; k < 4; ++k)
        if (c_m[static_cast<std::size_t>(k)] > 0.5) return k;
    return -1;
}

}  // namespace

ControllerStep ReferenceProgram::control(const PhaseReals& c_i, const CompReals& c_m_prev,
                                         const OpOneHot& c_f_prev) const {
    ControllerStep s;
    InterfaceVector& v = s.iface;
    v.write_word_free = signed_one_hot(0);
    v.read_mode_logits.fill(-kLogit);

    const bool goal_found = c_i[1] > 0.5;
    const int k = counter_state(c_m_prev);
    if (goal_found) {
        // Constrained word is irrelevant here; keep the row unchanged.
        v.write_word_constrained = c_m_prev;
        for (auto& x : v.write_word_constrained) x = x > 0.5 ? 1.0 : -1.0;
        v.read_key = signed_one_hot(-1);
        const bool after_nop = c_f_prev[kNop] > 0.5;
        v.read_mode_logits[after_nop ? 4 : 3] = kLogit;
    } else if (k < 3) {
        // k = -1 only on the first step, before any read.
        v.write_word_constrained = signed_one_hot(k + 1);
        v.read_key = signed_one_hot(k + 1);
        v.read_mode_logits[0] = kLogit;
    } else {
        v.write_word_constrained = signed_one_hot(4);
        v.read_key = signed_one_hot(-1);
        v.read_mode_logits[1] = kLogit;
    }
    s.c_c[0] = goal_found ? 1.0 : -1.0;
    return s;
}

int ReferenceProgram::select_operation(const ControllerState&, const CompReals& c_m, const PhaseReals& c_i) const {
    if (c_i[1] > 0.5) return kNop;
    const int k = counter_state(c_m);
    return k < 0 ? 0 : k;  // matches the all-zero logits of the weight version
}

Genome reference_genome() {
    std::vector<double> v(NeuralCore::genome_length(), 0.0);

    // Controller: W[16][16] then b[16]. Inputs: c_i 0..2, c_m 3..10, c_f 11..15.
    constexpr std::size_t in_c = kControllerInputs;
    auto cw = [&](std::size_t unit, std::size_t input) -> double& { return v[unit * in_c + input]; };
    auto cb = [&](std::size_t unit) -> double& { return v[kControllerUnits * in_c + unit]; };
    constexpr std::size_t goal_in = 1;
    constexpr std::size_t nop_in = kPhaseWidth + kCompWidth + kNop;
    for (std::size_t k = 0; k < 4; ++k) {  // h_k: c_m_prev holds e_k
        cw(k, kPhaseWidth + k) = 2 * kGain;
        cb(k) = -kGain;
    }
    cw(4, goal_in) = 2 * kGain;  // h4: goal found
    cb(4) = -kGain;
    cw(5, goal_in) = 2 * kGain;  // h5: goal found and previous op was nop
    cw(5, nop_in) = 2 * kGain;
    cb(5) = -3 * kGain;
    cw(6, goal_in) = 2 * kGain;  // h6: goal found and previous op was not nop
    cw(6, nop_in) = -2 * kGain;
    cb(6) = -kGain;

    // Interface: W[29][19] then b[29]. Inputs: c_c 0..15, c_i 16..18.
    const std::size_t base_i = kControllerInputs * kControllerUnits + kControllerUnits;
    constexpr std::size_t in_i = kInterfaceInputs;
    constexpr std::size_t out_i = InterfaceVector::kWidth;
    auto iw = [&](std::size_t out, std::size_t unit) -> double& { return v[base_i + out * in_i + unit]; };
    auto ib = [&](std::size_t out) -> double& { return v[base_i + out_i * in_i + out]; };
    // a * I_j with I_j = (h_j + 1) / 2.
    auto add_indicator = [&](std::size_t out, std::size_t unit, double a) {
        iw(out, unit) += a / 2;
        ib(out) += a / 2;
    };

    constexpr std::size_t key = 0, logits = 8, free_w = 13, con = 21;
    for (std::size_t j = 0; j < kCompWidth; ++j) ib(key + j) = -1.0;
    for (std::size_t k = 0; k < 3; ++k) {
        ib(key + k + 1) = 0.0;
        iw(key + k + 1, k) = 1.0;
    }
    const double L = kLogit;
    for (std::size_t k = 0; k < 3; ++k) add_indicator(logits + 0, k, L);
    add_indicator(logits + 0, 4, -3 * L);
    add_indicator(logits + 1, 3, L);
    add_indicator(logits + 1, 4, -3 * L);
    ib(logits + 2) = -L;
    add_indicator(logits + 3, 6, 3 * L);
    add_indicator(logits + 4, 5, 3 * L);
    for (std::size_t j = 0; j < kCompWidth; ++j) ib(free_w + j) = j == 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < kCompWidth; ++j) {
        if (j >= 1 && j <= 4) {
            iw(con + j, j - 1) = 1.0;
        } else {
            ib(con + j) = -1.0;
        }
    }

    // Transform_C: W[5][27] then b[5]. Inputs: c_c 0..15, c_m 16..23, c_i 24..26.
    const std::size_t base_t = base_i + out_i * in_i + out_i;
    constexpr std::size_t in_t = kTransformInputs;
    for (std::size_t k = 0; k < 4; ++k) v[base_t + k * in_t + kControllerUnits + k] = L;
    v[base_t + kNop * in_t + kControllerUnits + kCompWidth + 1] = 3 * L;

    return NeuralCore::make_genome(std::move(v));
}

}  // namespace ncomp
