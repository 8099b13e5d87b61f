#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncomp/bits.hpp"
#include "ncomp/data_modules.hpp"
#include "ncomp/genome.hpp"
#include "ncomp/memory.hpp"
#include "ncomp/oracle.hpp"
#include "ncomp/smallnet.hpp"

namespace ncomp {

inline constexpr std::size_t kPhaseWidth = 3;
inline constexpr std::size_t kControllerUnits = 16;
inline constexpr std::size_t kControllerInputs = kPhaseWidth + kCompWidth + kNumOps;        // 16
inline constexpr std::size_t kInterfaceInputs = kControllerUnits + kPhaseWidth;             // 19
inline constexpr std::size_t kTransformInputs = kControllerUnits + kCompWidth + kPhaseWidth;  // 27

using PhaseReals = std::array<double, kPhaseWidth>;
using ControllerState = std::array<double, kControllerUnits>;
using OpOneHot = std::array<double, kNumOps>;

OpOneHot op_one_hot(int op);

// Control signals passed between modules within and across steps.
struct ControlBundle {
    PhaseReals c_i{};
    ControllerState c_c{};
    CompReals c_m{};
    OpOneHot c_f{};
    int op = -1;  // index of the active c_f entry, -1 before the first step
    bool c_a = false;
    bool c_o = false;
};

struct ControllerStep {
    ControllerState c_c{};
    InterfaceVector iface;
};

// Controller + memory interface + Transform_C: the part of the model that
// only sees the control stream.
class AlgorithmicCore {
public:
    virtual ~AlgorithmicCore() = default;
    virtual ControllerStep control(const PhaseReals& c_i, const CompReals& c_m_prev, const OpOneHot& c_f_prev) const = 0;
    virtual int select_operation(const ControllerState& c_c, const CompReals& c_m, const PhaseReals& c_i) const = 0;
};

// The trainable core. Controller 16 -> 16 tanh, interface map 19 -> 29
// linear, Transform_C 27 -> 5 argmax; genome order is controller,
// interface, transform_c.
class NeuralCore final : public AlgorithmicCore {
public:
    static std::vector<LayerSpec> controller_layers();
    static std::vector<LayerSpec> interface_layers();
    static std::vector<LayerSpec> transform_layers();
    static std::size_t genome_length();

    NeuralCore();
    explicit NeuralCore(const Genome& genome);
    // Values in the canonical layout (length genome_length()).
    explicit NeuralCore(std::span<const double> values);

    static Genome zero_genome();
    static Genome random_genome(std::mt19937_64& rng, double scale = 0.1);
    // Empty genome with the canonical layout and the given values.
    static Genome make_genome(std::vector<double> values);

    Genome genome() const;

    ControllerStep control(const PhaseReals& c_i, const CompReals& c_m_prev, const OpOneHot& c_f_prev) const override;
    int select_operation(const ControllerState& c_c, const CompReals& c_m, const PhaseReals& c_i) const override;
    InterfaceVector derive_interface(const ControllerState& c_c, const PhaseReals& c_i) const;

private:
    std::vector<double> values_;
};

struct EngineConfig {
    bool constrained_head = true;
    bool usage_linkage = true;
    bool hard_attention = true;
    bool extra_free_head = false;
    // 0 = derive from the oracle trace (total steps + 16).
    std::size_t max_steps = 0;

    void validate() const;
    bool operator==(const EngineConfig&) const = default;
};

// Named toggle sets: full, no_constrained_head, two_free_heads,
// no_usage_linkage, soft_attention.
EngineConfig configure_ablation(const std::string& name);

struct StepRecord {
    std::size_t step = 0;
    std::size_t location = 0;
    std::array<double, kReadModes> attention{};
    int op = 0;
    Bits d_m;
    Bits d_o;
    PhaseSignals phase;
};

enum class EpisodeMode { teacher_scored, autonomous };

enum class Termination {
    trace_end,     // teacher-scored: every expected step was checked
    mismatch,      // teacher-scored: stopped at the first wrong step
    goal_reached,  // search: nop chosen while the output equals the goal
    terminated,    // plan: the Input module raised the termination signal
    step_limit,
    invalid_data,  // a data module rejected the word (soft-attention ablation)
};

std::string to_string(Termination t);

struct StepHit {
    bool op_ok = false;
    bool dm_ok = false;
    bool ok() const { return op_ok && dm_ok; }
};

// Step-wise comparison of an episode against its oracle trace.
struct EpisodeScore {
    TaskKind kind = TaskKind::search;
    std::size_t explore_expected = 0;
    std::size_t backtrack_expected = 0;
    std::vector<StepHit> explore;
    std::optional<bool> nop_ok;  // search only
    std::vector<StepHit> backtrack;

    bool explore_perfect() const;
    bool perfect() const;
    // 1-based step of the first mismatch, if any.
    std::optional<std::size_t> first_mistake() const;
};

struct EpisodeResult {
    std::vector<StepRecord> records;
    std::size_t steps = 0;
    Termination termination = Termination::step_limit;
    EpisodeScore score;
    // Autonomous: the whole run equals the oracle trace and ends properly.
    bool exact = false;
};

// Mutable per-episode state: memory, recurrent control inputs, last output.
struct EpisodeState {
    DualMemory memory;
    ControlBundle prev;
    PhaseSignals phase;
    Bits x;    // previous output, the next input
    Bits d_e;  // external input
    std::size_t step = 0;

    EpisodeState(std::size_t width, const Bits& start, const Bits& external)
        : memory(width), x(start), d_e(external) {}
};

struct StepOutcome {
    bool terminated = false;  // Input raised c_i[3]; nothing else ran
    ControlBundle bundle;
    Bits d_o;
    StepRecord record;
};

class Engine {
public:
    Engine(const AlgorithmicCore& core, const DataModules& modules, EngineConfig config = {});

    // Input -> Controller -> writes -> read -> Transform_C -> Transform_D ->
    // ALU -> Output. `search_only` masks the termination signal.
    StepOutcome step(EpisodeState& state, bool search_only = false) const;

    // Teacher-scored runs need the oracle trace; autonomous runs use it for
    // scoring and the default step limit when given.
    EpisodeResult run_episode(const TaskInstance& task, TaskKind kind, EpisodeMode mode,
                              const TargetTrace* trace, bool keep_records = true) const;

    const EngineConfig& config() const { return config_; }

private:
    const AlgorithmicCore& core_;
    const DataModules& modules_;
    EngineConfig config_;
};

std::string step_record_json(const StepRecord& record);

}  // namespace ncomp
