#include "ncomp/engine.hpp"

#include <cmath>

#include <json.hpp>

#include "ncomp/errors.hpp"

namespace ncomp {

namespace {

constexpr std::size_t kControllerParams = kControllerInputs * kControllerUnits + kControllerUnits;
constexpr std::size_t kInterfaceParams = kInterfaceInputs * InterfaceVector::kWidth + InterfaceVector::kWidth;
constexpr std::size_t kTransformParams = kTransformInputs * kNumOps + kNumOps;

// out[o] = b[o] + sum_i W[o][i] in[i] over a raw parameter slice.
template <std::size_t In, std::size_t Out>
std::array<double, Out> affine(const double* p, const std::array<double, In>& in) {
    std::array<double, Out> out{};
    const double* bias = p + In * Out;
    for (std::size_t o = 0; o < Out; ++o) {
        const double* row = p + o * In;
        double acc = bias[o];
        for (std::size_t i = 0; i < In; ++i) acc += row[i] * in[i];
        out[o] = acc;
    }
    return out;
}

}  // namespace

OpOneHot op_one_hot(int op) {
    OpOneHot v{};
    if (op >= 0 && op < kNumOps) v[static_cast<std::size_t>(op)] = 1.0;
    return v;
}

// ----------------------------------------------------------------- NeuralCore

std::vector<LayerSpec> NeuralCore::controller_layers() {
    return {{kControllerInputs, kControllerUnits, Activation::tanh}};
}
std::vector<LayerSpec> NeuralCore::interface_layers() {
    return {{kInterfaceInputs, InterfaceVector::kWidth, Activation::linear}};
}
std::vector<LayerSpec> NeuralCore::transform_layers() {
    return {{kTransformInputs, kNumOps, Activation::argmax_onehot}};
}
std::size_t NeuralCore::genome_length() { return kControllerParams + kInterfaceParams + kTransformParams; }

NeuralCore::NeuralCore() : values_(genome_length(), 0.0) {}

NeuralCore::NeuralCore(std::span<const double> values) : values_(values.begin(), values.end()) {
    if (values_.size() != genome_length())
        throw ConfigError("core genome must have " + std::to_string(genome_length()) + " values");
}

NeuralCore::NeuralCore(const Genome& genome) : NeuralCore(std::span<const double>(genome.values)) {
    const Genome ref = zero_genome();
    if (genome.layout != ref.layout) throw ConfigError("genome layout is not the algorithmic-core layout");
}

Genome NeuralCore::make_genome(std::vector<double> values) {
    Mlp controller(controller_layers()), iface(interface_layers()), transform(transform_layers());
    Genome g = genome_view({{"controller", &controller}, {"interface", &iface}, {"transform_c", &transform}});
    g.values = std::move(values);
    g.validate();
    return g;
}

Genome NeuralCore::zero_genome() { return make_genome(std::vector<double>(genome_length(), 0.0)); }

Genome NeuralCore::random_genome(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> v(genome_length());
    for (auto& x : v) x = dist(rng);
    return make_genome(std::move(v));
}

Genome NeuralCore::genome() const { return make_genome(values_); }

InterfaceVector NeuralCore::derive_interface(const ControllerState& c_c, const PhaseReals& c_i) const {
    std::array<double, kInterfaceInputs> in{};
    std::copy(c_c.begin(), c_c.end(), in.begin());
    std::copy(c_i.begin(), c_i.end(), in.begin() + kControllerUnits);
    const auto out = affine<kInterfaceInputs, InterfaceVector::kWidth>(values_.data() + kControllerParams, in);
    return InterfaceVector::from_values(out);
}

ControllerStep NeuralCore::control(const PhaseReals& c_i, const CompReals& c_m_prev, const OpOneHot& c_f_prev) const {
    std::array<double, kControllerInputs> in{};
    std::copy(c_i.begin(), c_i.end(), in.begin());
    std::copy(c_m_prev.begin(), c_m_prev.end(), in.begin() + kPhaseWidth);
    std::copy(c_f_prev.begin(), c_f_prev.end(), in.begin() + kPhaseWidth + kCompWidth);
    ControllerStep s;
    s.c_c = affine<kControllerInputs, kControllerUnits>(values_.data(), in);
    for (auto& v : s.c_c) v = std::tanh(v);
    s.iface = derive_interface(s.c_c, c_i);
    return s;
}

int NeuralCore::select_operation(const ControllerState& c_c, const CompReals& c_m, const PhaseReals& c_i) const {
    std::array<double, kTransformInputs> in{};
    std::copy(c_c.begin(), c_c.end(), in.begin());
    std::copy(c_m.begin(), c_m.end(), in.begin() + kControllerUnits);
    std::copy(c_i.begin(), c_i.end(), in.begin() + kControllerUnits + kCompWidth);
    const auto logits = affine<kTransformInputs, kNumOps>(values_.data() + kControllerParams + kInterfaceParams, in);
    return static_cast<int>(argmax_lowest(logits));
}

// --------------------------------------------------------------------- config

void EngineConfig::validate() const {
    // The free head is always present, so at least one write head exists;
    // a second free head only makes sense in place of the constrained one.
    if (extra_free_head && constrained_head)
        throw ConfigError("extra_free_head replaces the constrained head; disable constrained_head");
}

EngineConfig configure_ablation(const std::string& name) {
    EngineConfig c;
    if (name == "full") return c;
    if (name == "no_constrained_head") {
        c.constrained_head = false;
    } else if (name == "two_free_heads") {
        c.constrained_head = false;
        c.extra_free_head = true;
    } else if (name == "no_usage_linkage") {
        c.usage_linkage = false;
    } else if (name == "soft_attention") {
        c.hard_attention = false;
    } else {
        throw ConfigError("unknown ablation '" + name + "'");
    }
    return c;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::trace_end: return "trace_end";
        case Termination::mismatch: return "mismatch";
        case Termination::goal_reached: return "goal_reached";
        case Termination::terminated: return "terminated";
        case Termination::step_limit: return "step_limit";
        case Termination::invalid_data: return "invalid_data";
    }
    return "?";
}

// ---------------------------------------------------------------------- score

bool EpisodeScore::explore_perfect() const {
    if (explore.size() != explore_expected) return false;
    for (const auto& h : explore)
        if (!h.ok()) return false;
    return true;
}

bool EpisodeScore::perfect() const {
    if (!explore_perfect()) return false;
    if (kind == TaskKind::search) return nop_ok.value_or(false);
    if (backtrack.size() != backtrack_expected) return false;
    for (const auto& h : backtrack)
        if (!h.ok()) return false;
    return true;
}

std::optional<std::size_t> EpisodeScore::first_mistake() const {
    for (std::size_t t = 0; t < explore.size(); ++t)
        if (!explore[t].ok()) return t + 1;
    if (explore.size() < explore_expected) return std::nullopt;
    if (kind == TaskKind::search) {
        if (nop_ok && !*nop_ok) return explore_expected + 1;
        return std::nullopt;
    }
    for (std::size_t t = 0; t < backtrack.size(); ++t)
        if (!backtrack[t].ok()) return explore_expected + t + 1;
    return std::nullopt;
}

// --------------------------------------------------------------------- engine

Engine::Engine(const AlgorithmicCore& core, const DataModules& modules, EngineConfig config)
    : core_(core), modules_(modules), config_(config) {
    config_.validate();
}

StepOutcome Engine::step(EpisodeState& state, bool search_only) const {
    StepOutcome out;
    const auto in = modules_.input(state.d_e, state.x, state.phase);
    PhaseSignals phase = in.c_i;
    if (search_only) phase.terminated = 0;
    if (phase.terminated) {
        out.terminated = true;
        state.phase = phase;
        return out;
    }
    ++state.step;
    const PhaseReals c_i = phase.as_reals();

    const ControllerStep ctl = core_.control(c_i, state.prev.c_m, state.prev.c_f);

    state.memory.allocate_and_write(in.d_i, ctl.iface);
    if (config_.extra_free_head) state.memory.allocate_and_write(in.d_i, binarize(ctl.iface.write_word_constrained));
    if (config_.constrained_head) state.memory.constrained_write(ctl.iface);

    ReadResult read = state.memory.read_attend(ctl.iface, {config_.hard_attention, config_.usage_linkage});
    const int op = core_.select_operation(ctl.c_c, read.c_m, c_i);

    const Bits d_f = modules_.transform(read.d_m);
    const AluResult alu = modules_.alu(op, d_f);
    OutputResult o = modules_.output(alu.c_a, alu.d_a, read.d_m);

    out.bundle.c_i = c_i;
    out.bundle.c_c = ctl.c_c;
    out.bundle.c_m = read.c_m;
    out.bundle.c_f = op_one_hot(op);
    out.bundle.op = op;
    out.bundle.c_a = alu.c_a;
    out.bundle.c_o = o.c_o;

    out.record.step = state.step;
    out.record.location = read.location;
    out.record.attention = read.attention;
    out.record.op = op;
    out.record.d_m = std::move(read.d_m);
    out.record.d_o = o.d_o;
    out.record.phase = phase;

    state.prev = out.bundle;
    state.phase = phase;
    state.x = o.d_o;
    out.d_o = std::move(o.d_o);
    return out;
}

EpisodeResult Engine::run_episode(const TaskInstance& task, TaskKind kind, EpisodeMode mode,
                                  const TargetTrace* trace, bool keep_records) const {
    if (mode == EpisodeMode::teacher_scored && trace == nullptr)
        throw ConfigError("teacher-scored episodes need an oracle trace");
    std::size_t limit = config_.max_steps;
    if (limit == 0) {
        if (trace == nullptr) throw ConfigError("autonomous episodes need max_steps or an oracle trace");
        limit = trace->total_steps() + 16;
    }

    EpisodeResult result;
    EpisodeScore& score = result.score;
    score.kind = kind;
    if (trace) {
        score.explore_expected = trace->explore_steps();
        score.backtrack_expected = kind == TaskKind::plan ? trace->backtrack_steps() : 0;
    }
    const bool search = kind == TaskKind::search;
    const bool teacher = mode == EpisodeMode::teacher_scored;

    EpisodeState state(modules_.word_width(), task.start, task.goal);
    bool scoring = trace != nullptr;  // autonomous scoring stops at the first mismatch too
    bool swapped = false;

    while (true) {
        if (state.step >= limit) {
            result.termination = Termination::step_limit;
            break;
        }
        StepOutcome out;
        try {
            out = step(state, search);
        } catch (const DomainError&) {
            result.termination = Termination::invalid_data;
            scoring = false;
            break;
        }
        if (out.terminated) {
            result.termination = Termination::terminated;
            break;
        }
        ++result.steps;
        const StepRecord& rec = out.record;

        bool stop = false;
        if (scoring) {
            const std::size_t t = rec.step;
            const std::size_t te = trace->explore_steps();
            if (t <= te) {
                const auto& want = trace->explore[t - 1];
                StepHit h{rec.op == want.op, rec.d_m == want.d_m};
                score.explore.push_back(h);
                if (!h.ok()) scoring = false;
            } else if (search) {
                score.nop_ok = rec.op == kNop;
                scoring = false;
                if (teacher) {
                    result.termination = Termination::trace_end;
                    stop = true;
                }
            } else {
                const std::size_t j = t - te - 1;
                if (j < trace->backtrack_steps()) {
                    StepHit h{rec.op == kNop, rec.d_m == trace->backtrack[j]};
                    score.backtrack.push_back(h);
                    if (!h.ok()) scoring = false;
                    if (j + 1 == trace->backtrack_steps()) {
                        scoring = false;
                        if (teacher && h.ok()) {
                            result.termination = Termination::trace_end;
                            stop = true;
                        }
                    }
                }
            }
            if (teacher && !scoring && !stop) {
                result.termination = Termination::mismatch;
                stop = true;
            }
        }
        if (keep_records) result.records.push_back(std::move(out.record));
        if (stop) break;

        if (!teacher && search && out.bundle.op == kNop && out.d_o == task.goal) {
            result.termination = Termination::goal_reached;
            break;
        }
        if (!search && !swapped && state.phase.goal_found) {
            state.d_e = task.start;
            swapped = true;
        }
    }

    if (trace && mode == EpisodeMode::autonomous) {
        const Termination proper = search ? Termination::goal_reached : Termination::terminated;
        result.exact = result.termination == proper && result.steps == trace->total_steps() && score.perfect();
    }
    return result;
}

std::string step_record_json(const StepRecord& r) {
    nlohmann::json j = {{"step", r.step},
                        {"location", r.location},
                        {"attention", r.attention},
                        {"op", r.op},
                        {"d_m", to_bit_string(r.d_m)},
                        {"d_o", to_bit_string(r.d_o)},
                        {"phase", {r.phase.searching, r.phase.goal_found, r.phase.terminated}}};
    return j.dump();
}

}  // namespace ncomp
