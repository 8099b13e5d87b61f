#pragma once

#include "ncomp/engine.hpp"
#include "ncomp/genome.hpp"

namespace ncomp {

// Hand-scripted breadth-first search with backtracking, expressed only
// through the memory primitives.
//
// Computational words are one-hot: e0 marks a fresh node, e1..e3 count the
// operations already applied to the node under exploration and e4 marks a
// fully expanded node. Exploration re-reads the node by content and emits
// its next operation; after the fourth it follows the temporal link to the
// next queued node. Once the goal is found it reads the goal's row through
// the usage-forward link, then follows usage-backward links emitting nop.
class ReferenceProgram final : public AlgorithmicCore {
public:
    ControllerStep control(const PhaseReals& c_i, const CompReals& c_m_prev, const OpOneHot& c_f_prev) const override;
    int select_operation(const ControllerState& c_c, const CompReals& c_m, const PhaseReals& c_i) const override;
};

// Weights for NeuralCore that implement the same policy.
Genome reference_genome();

}  // namespace ncomp
