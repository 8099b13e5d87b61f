#include "ncomp/learned_modules.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <json.hpp>

#include "ncomp/engine.hpp"
#include "ncomp/errors.hpp"
#include "ncomp/genome.hpp"

namespace ncomp {

namespace {

constexpr std::size_t kDirGroup = 5;  // four directions + none

bool is_grid(const Domain& d) { return d.kind() == DomainKind::sokoban; }

std::vector<std::size_t> repeat(std::size_t count, std::size_t width) { return std::vector<std::size_t>(count, width); }

std::size_t word_logits(const WordGroups& g) { return g.count * (g.binary ? 2 : g.width); }

std::vector<std::size_t> word_group_widths(const WordGroups& g) {
    return repeat(g.count, g.binary ? 2 : g.width);
}

// Acceptable-class flags that reproduce `word` under decode_word.
std::vector<double> word_target(const Bits& word, const WordGroups& g) {
    std::vector<double> t;
    if (g.binary) {
        t.reserve(word.size() * 2);
        for (auto b : word) {
            t.push_back(b ? 0.0 : 1.0);
            t.push_back(b ? 1.0 : 0.0);
        }
    } else {
        t = to_reals(word);
    }
    return t;
}

Bits decode_word(std::span<const double> logits, const WordGroups& g) {
    Bits out;
    const std::size_t w = g.binary ? 2 : g.width;
    for (std::size_t k = 0; k < g.count; ++k) {
        const std::size_t a = argmax_lowest(logits.subspan(k * w, w));
        if (g.binary) {
            out.push_back(static_cast<std::uint8_t>(a));
        } else {
            for (std::size_t j = 0; j < w; ++j) out.push_back(j == a ? 1 : 0);
        }
    }
    return out;
}

std::vector<double> concat(std::initializer_list<std::span<const double>> parts) {
    std::vector<double> out;
    for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<double> class_target(bool positive) { return {positive ? 0.0 : 1.0, positive ? 1.0 : 0.0}; }

std::vector<double> equality_features(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw DomainError("equality of words with different widths");
    std::vector<double> f(a.size());
    // ReLU(a - b) + ReLU(b - a)
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = double(a[i]) - double(b[i]);
        f[i] = std::max(d, 0.0) + std::max(-d, 0.0);
    }
    return f;
}

std::vector<double> alu_input(const Bits& d_f, int op) {
    auto f = to_reals(d_f);
    const auto o = op_one_hot(op);
    f.insert(f.end(), o.begin(), o.end());
    return f;
}

std::vector<double> output_control_input(bool c_a, const Bits& d_a, const Bits& d_m) {
    std::vector<double> f{c_a ? 1.0 : 0.0};
    auto a = to_reals(d_a), m = to_reals(d_m);
    f.insert(f.end(), a.begin(), a.end());
    f.insert(f.end(), m.begin(), m.end());
    return f;
}

std::vector<double> output_data_input(const Bits& d_a, const Bits& d_m) {
    auto a = to_reals(d_a), m = to_reals(d_m);
    return concat({a, m});
}

// Local change logits: direction (5) then three cells (4 each).
std::vector<double> change_target(const AluResult& r) {
    std::vector<double> t(kDirGroup, 0.0);
    const auto dir = std::find(r.d_a.begin(), r.d_a.begin() + 4, 1) - r.d_a.begin();
    t[static_cast<std::size_t>(dir)] = 1.0;  // 4 = none
    for (std::size_t i = 4; i < kChangeWidth; ++i) t.push_back(r.d_a[i]);
    return t;
}

// Per data cell: keep d_m, or take change cell 0, 1 or 2.
std::vector<double> insertion_target(const Bits& d_a, const Bits& d_m, const Bits& d_o) {
    const std::size_t cells = d_m.size() / 4;
    std::vector<double> t(cells * 4, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        auto same = [&](const std::uint8_t* src) { return std::equal(src, src + 4, d_o.data() + 4 * c); };
        t[4 * c] = same(d_m.data() + 4 * c) ? 1.0 : 0.0;
        for (std::size_t k = 0; k < 3; ++k) t[4 * c + 1 + k] = same(d_a.data() + 4 + 4 * k) ? 1.0 : 0.0;
    }
    return t;
}

void init_layers(Mlp& net, std::mt19937_64& rng) {
    auto p = net.params();
    std::size_t off = 0;
    for (const auto& l : net.layers()) {
        const double s = std::sqrt(6.0 / static_cast<double>(l.input_width + l.output_width));
        std::uniform_real_distribution<double> dist(-s, s);
        for (std::size_t i = 0; i < l.input_width * l.output_width; ++i) p[off + i] = dist(rng);
        for (std::size_t i = 0; i < l.output_width; ++i) p[off + l.input_width * l.output_width + i] = 0.0;
        off += l.param_count();
    }
}

Mlp make_net(std::vector<std::size_t> widths, std::mt19937_64& rng) {
    std::vector<LayerSpec> layers;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const bool last = i + 2 == widths.size();
        layers.push_back({widths[i], widths[i + 1], last ? Activation::linear : Activation::leaky_relu});
    }
    Mlp net(std::move(layers));
    init_layers(net, rng);
    return net;
}

std::vector<NamedNet> module_nets(LearnedNets& nets, ModuleId m) {
    switch (m) {
        case ModuleId::input: return {{"input", &nets.input}};
        case ModuleId::transform: return {{"transform", &nets.transform}};
        case ModuleId::alu: return {{"alu_control", &nets.alu_control}, {"alu_action", &nets.alu_action}};
        case ModuleId::output:
            return {{"output_control", &nets.output_control}, {"output_data", &nets.output_data}};
    }
    return {};
}

// Sample generators -------------------------------------------------------

struct EqualityPair {
    Bits d_e;
    Bits x;
};

EqualityPair sample_pair(const Domain& d, std::mt19937_64& rng) {
    Bits x = sample_configuration(d, rng);
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (r < 0.5) return {x, x};
    if (r < 0.8) {
        // Neighbouring configuration: the hardest negatives.
        const int first = std::uniform_int_distribution<int>(0, kNop - 1)(rng);
        for (int k = 0; k < kNop; ++k) {
            Bits y = d.apply_action(x, (first + k) % kNop);
            if (y != x) return {std::move(y), std::move(x)};
        }
    }
    Bits y = sample_configuration(d, rng);
    return {std::move(y), std::move(x)};
}

struct AluSample {
    Bits d_m;
    Bits d_f;
    int op = 0;
    AluResult result;
};

AluSample sample_alu(const Domain& d, const DataModules& oracle, std::mt19937_64& rng, bool changed_only) {
    for (;;) {
        AluSample s;
        s.d_m = sample_configuration(d, rng);
        s.d_f = oracle.transform(s.d_m);
        s.op = std::uniform_int_distribution<int>(0, changed_only ? kNop - 1 : kNop)(rng);
        s.result = oracle.alu(s.op, s.d_f);
        if (!changed_only || s.result.c_a) return s;
    }
}

SampleGenerator generator_for(const std::string& net, const Domain& d, std::shared_ptr<const DataModules> oracle) {
    const WordGroups wg = d.word_groups();
    if (net == "input")
        return [&d](std::mt19937_64& rng) {
            auto p = sample_pair(d, rng);
            return LabeledSample{equality_features(p.d_e, p.x), class_target(p.d_e == p.x)};
        };
    if (net == "transform")
        return [&d, oracle](std::mt19937_64& rng) {
            Bits w = sample_configuration(d, rng);
            return LabeledSample{to_reals(w), to_reals(oracle->transform(w))};
        };
    if (net == "alu_control")
        return [&d, oracle](std::mt19937_64& rng) {
            auto s = sample_alu(d, *oracle, rng, false);
            return LabeledSample{alu_input(s.d_f, s.op), class_target(s.result.c_a)};
        };
    if (net == "alu_action") {
        const bool grid = is_grid(d);
        return [&d, oracle, grid, wg](std::mt19937_64& rng) {
            auto s = sample_alu(d, *oracle, rng, false);
            auto target = grid ? change_target(s.result) : word_target(s.result.d_a, wg);
            return LabeledSample{alu_input(s.d_f, s.op), std::move(target)};
        };
    }
    if (net == "output_control")
        return [&d, oracle](std::mt19937_64& rng) {
            auto s = sample_alu(d, *oracle, rng, false);
            return LabeledSample{output_control_input(s.result.c_a, s.result.d_a, s.d_m), class_target(s.result.c_a)};
        };
    if (net == "output_data")
        return [&d, oracle](std::mt19937_64& rng) {
            auto s = sample_alu(d, *oracle, rng, true);
            const Bits d_o = oracle->output(true, s.result.d_a, s.d_m).d_o;
            return LabeledSample{output_data_input(s.result.d_a, s.d_m), insertion_target(s.result.d_a, s.d_m, d_o)};
        };
    throw ConfigError("no generator for network '" + net + "'");
}

std::vector<std::size_t> groups_for(const std::string& net, const Domain& d) {
    if (net == "input" || net == "alu_control" || net == "output_control") return {2};
    if (net == "transform") return repeat(kViewCells, 4);
    if (net == "alu_action") {
        if (!is_grid(d)) return word_group_widths(d.word_groups());
        return {kDirGroup, 4, 4, 4};
    }
    if (net == "output_data") return repeat(d.word_width() / 4, 4);
    throw ConfigError("no output groups for network '" + net + "'");
}

}  // namespace

std::string to_string(ModuleId m) {
    switch (m) {
        case ModuleId::input: return "input";
        case ModuleId::transform: return "transform";
        case ModuleId::alu: return "alu";
        case ModuleId::output: return "output";
    }
    return "?";
}

ModuleId module_from_string(const std::string& s) {
    if (s == "input") return ModuleId::input;
    if (s == "transform") return ModuleId::transform;
    if (s == "alu") return ModuleId::alu;
    if (s == "output") return ModuleId::output;
    throw ConfigError("unknown data module '" + s + "'");
}

Bits sample_configuration(const Domain& domain, std::mt19937_64& rng) {
    Bits w = domain.sample_start(rng);
    const int steps = std::uniform_int_distribution<int>(0, 12)(rng);
    std::uniform_int_distribution<int> move(0, kNop - 1);
    for (int i = 0; i < steps; ++i) w = domain.apply_action(w, move(rng));
    return w;
}

NetReport train_net(Mlp& net, std::span<const std::size_t> groups, const SampleGenerator& generate,
                    const TrainingBudget& budget, std::uint64_t seed, const std::string& name) {
    if (budget.batch == 0) throw ConfigError("training batch must be >= 1");
    std::mt19937_64 rng(seed);
    std::mt19937_64 probe_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::mt19937_64 heldout_rng(seed + 0x5bd1e995ULL);

    auto correct_on = [&](const LabeledSample& s) { return groups_correct(net.forward(s.input), s.target, groups); };

    NetReport report;
    report.name = name;
    AdamState adam(net.param_count(), budget.learning_rate);
    std::vector<double> grad(net.param_count());
    std::vector<double> d_logits(net.output_width());
    std::deque<LabeledSample> buffer;
    std::vector<LabeledSample> batch;
    Mlp::Tape tape;
    std::size_t clean_samples = 0;  // consecutive correct probe samples

    for (std::size_t step = 1; step <= budget.max_steps; ++step) {
        batch.clear();
        std::size_t replay = 0;
        if (budget.bad_memories && !buffer.empty()) {
            replay = static_cast<std::size_t>(std::lround(budget.buffer_share * static_cast<double>(budget.batch)));
            std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
            for (std::size_t i = 0; i < replay; ++i) batch.push_back(buffer[pick(rng)]);
        }
        while (batch.size() < budget.batch) batch.push_back(generate(rng));

        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        const double scale = 1.0 / static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto logits = net.forward_logits(batch[i].input, tape);
            if (i >= replay && !groups_correct(logits, batch[i].target, groups)) {
                buffer.push_back(batch[i]);
                if (buffer.size() > budget.buffer_capacity) buffer.pop_front();
            }
            loss += mixture_group_loss(logits, batch[i].target, groups, d_logits);
            for (auto& d : d_logits) d *= scale;
            net.backward(tape, d_logits, grad);
        }
        loss *= scale;
        if (!std::isfinite(loss)) throw NumericError("non-finite loss while training " + name);
        adam_step(net.params(), grad, adam);
        report.steps = step;
        report.final_loss = loss;

        if (step % budget.probe_every == 0) {
            bool all = true;
            for (std::size_t i = 0; i < budget.probe_size; ++i) {
                auto s = generate(probe_rng);
                if (correct_on(s)) continue;
                all = false;
                if (budget.bad_memories) {
                    buffer.push_back(std::move(s));
                    if (buffer.size() > budget.buffer_capacity) buffer.pop_front();
                }
            }
            clean_samples = all ? clean_samples + budget.probe_size : 0;
            if (clean_samples >= budget.stop_samples) break;
        }
    }

    report.heldout = budget.heldout;
    for (std::size_t i = 0; i < budget.heldout; ++i) report.heldout_correct += correct_on(generate(heldout_rng)) ? 1 : 0;
    report.passed = report.heldout_correct == report.heldout;
    return report;
}

// ------------------------------------------------------------ architecture

LearnedNets make_learned_nets(const Domain& domain, std::mt19937_64& rng) {
    LearnedNets n;
    const std::size_t w = domain.word_width();
    n.input = make_net({w, 10, 2}, rng);
    if (is_grid(domain)) {
        const std::size_t in = kViewWidth + kNumOps;
        n.transform = make_net({w, 500, kViewWidth}, rng);
        n.alu_control = make_net({in, 64, 64, 2}, rng);
        n.alu_action = make_net({in, 128, 64, kDirGroup + 12}, rng);
        n.output_control = make_net({1 + kChangeWidth + w, 500, 250, 2}, rng);
        n.output_data = make_net({kChangeWidth + w, 500, 500, w}, rng);
    } else {
        const std::size_t in = w + kNumOps;
        n.alu_control = make_net({in, 64, 64, 2}, rng);
        n.alu_action = make_net({in, 128, 64, word_logits(domain.word_groups())}, rng);
    }
    return n;
}

std::vector<ModuleId> learnable_modules(const Domain& domain) {
    if (is_grid(domain)) return {ModuleId::input, ModuleId::transform, ModuleId::alu, ModuleId::output};
    return {ModuleId::input, ModuleId::alu};
}

// ---------------------------------------------------------------- modules

LearnedModules::LearnedModules(std::shared_ptr<const Domain> domain, LearnedNets nets)
    : domain_(std::move(domain)), nets_(std::move(nets)) {
    if (nets_.input.layers().empty() || nets_.alu_control.layers().empty() || nets_.alu_action.layers().empty())
        throw ConfigError("learned modules need input and ALU networks");
    if (grid() && (nets_.transform.layers().empty() || nets_.output_control.layers().empty() ||
                   nets_.output_data.layers().empty()))
        throw ConfigError("grid-world learned modules need transform and output networks");
}

bool LearnedModules::grid() const { return is_grid(*domain_); }

bool LearnedModules::equality(std::span<const std::uint8_t> d_e, std::span<const std::uint8_t> x) const {
    const auto out = nets_.input.forward(equality_features(d_e, x));
    return argmax_lowest(out) == 1;
}

Bits LearnedModules::transform(const Bits& d_m) const {
    if (!grid()) return d_m;
    if (d_m.size() != word_width()) throw DomainError("data word has the wrong width");
    const auto logits = nets_.transform.forward(to_reals(d_m));
    return decode_word(logits, {kViewCells, 4, false});
}

AluResult LearnedModules::alu(int op, const Bits& d_f) const {
    if (op < 0 || op >= kNumOps) throw ConfigError("ALU operation out of range");
    const auto in = alu_input(d_f, op);
    AluResult r;
    r.c_a = argmax_lowest(nets_.alu_control.forward(in)) == 1;
    const auto logits = nets_.alu_action.forward(in);
    if (!grid()) {
        r.d_a = r.c_a ? decode_word(logits, domain_->word_groups()) : d_f;
        return r;
    }
    const std::size_t dir = argmax_lowest(std::span<const double>(logits).first(kDirGroup));
    r.d_a.assign(4, 0);
    if (r.c_a && dir < 4) r.d_a[dir] = 1;
    const auto cells = decode_word(std::span<const double>(logits).subspan(kDirGroup), {3, 4, false});
    r.d_a.insert(r.d_a.end(), cells.begin(), cells.end());
    return r;
}

OutputResult LearnedModules::output(bool c_a, const Bits& d_a, const Bits& d_m) const {
    if (!grid()) {
        if (d_a.size() != d_m.size()) throw DomainError("ALU output width differs from the data word");
        return {c_a, c_a ? d_a : d_m};
    }
    if (d_a.size() != kChangeWidth) throw DomainError("local change must be 16 bits");
    OutputResult r;
    r.c_o = argmax_lowest(nets_.output_control.forward(output_control_input(c_a, d_a, d_m))) == 1;
    r.d_o = d_m;
    if (!r.c_o) return r;
    const auto logits = nets_.output_data.forward(output_data_input(d_a, d_m));
    const std::size_t cells = d_m.size() / 4;
    for (std::size_t c = 0; c < cells; ++c) {
        const std::size_t k = argmax_lowest(std::span<const double>(logits).subspan(4 * c, 4));
        if (k > 0) std::copy_n(d_a.begin() + 4 + 4 * static_cast<std::ptrdiff_t>(k - 1), 4, r.d_o.begin() + 4 * static_cast<std::ptrdiff_t>(c));
    }
    return r;
}

// --------------------------------------------------------------- training

std::string ModuleReport::json() const {
    nlohmann::json nets_json = nlohmann::json::array();
    for (const auto& n : nets)
        nets_json.push_back({{"net", n.name},
                             {"steps", n.steps},
                             {"final_loss", n.final_loss},
                             {"heldout", n.heldout},
                             {"heldout_correct", n.heldout_correct},
                             {"passed", n.passed}});
    nlohmann::json j = {{"module", to_string(module)},
                        {"nets", nets_json},
                        {"heldout", heldout},
                        {"agreement", agreement},
                        {"accuracy", heldout ? double(agreement) / double(heldout) : 0.0},
                        {"passed", passed}};
    return j.dump();
}

ModuleReport train_data_module(ModuleId module, const Domain& domain, LearnedNets& nets, const TrainingBudget& budget,
                               std::uint64_t seed) {
    const auto learnable = learnable_modules(domain);
    if (std::find(learnable.begin(), learnable.end(), module) == learnable.end())
        throw ConfigError("module " + to_string(module) + " is not learned for " + domain.name());
    auto shared = make_domain(domain.descriptor());
    auto oracle = make_oracle_modules(shared);

    ModuleReport report;
    report.module = module;
    std::uint64_t net_seed = seed;
    for (auto& named : module_nets(nets, module)) {
        const auto groups = groups_for(named.name, *shared);
        // The shared domain outlives the generator through `shared`.
        auto gen = generator_for(named.name, *shared, oracle);
        report.nets.push_back(train_net(*named.net, groups, gen, budget, net_seed++, named.name));
    }
    report.heldout = budget.heldout;
    report.agreement = module_agreement(module, *shared, nets, budget.heldout, seed + 0xabcdefULL);
    report.passed = report.agreement == report.heldout;
    return report;
}

std::size_t module_agreement(ModuleId module, const Domain& domain, const LearnedNets& nets, std::size_t samples,
                             std::uint64_t seed) {
    auto shared = make_domain(domain.descriptor());
    auto oracle = make_oracle_modules(shared);
    LearnedModules learned(shared, nets);
    std::mt19937_64 rng(seed);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        bool ok = false;
        switch (module) {
            case ModuleId::input: {
                auto p = sample_pair(*shared, rng);
                ok = learned.equality(p.d_e, p.x) == oracle->equality(p.d_e, p.x);
                break;
            }
            case ModuleId::transform: {
                Bits w = sample_configuration(*shared, rng);
                ok = learned.transform(w) == oracle->transform(w);
                break;
            }
            case ModuleId::alu: {
                auto s = sample_alu(*shared, *oracle, rng, false);
                auto r = learned.alu(s.op, s.d_f);
                ok = r.c_a == s.result.c_a && r.d_a == s.result.d_a;
                break;
            }
            case ModuleId::output: {
                auto s = sample_alu(*shared, *oracle, rng, false);
                auto want = oracle->output(s.result.c_a, s.result.d_a, s.d_m);
                auto got = learned.output(s.result.c_a, s.result.d_a, s.d_m);
                ok = got.c_o == want.c_o && got.d_o == want.d_o;
                break;
            }
        }
        agree += ok ? 1 : 0;
    }
    return agree;
}

void save_module(const LearnedNets& nets, ModuleId module, const std::filesystem::path& path) {
    LearnedNets copy = nets;
    save_genome(genome_view(module_nets(copy, module)), path);
}

void load_module(LearnedNets& nets, ModuleId module, const std::filesystem::path& path) {
    unflatten(load_genome(path), module_nets(nets, module));
}

std::shared_ptr<const DataModules> load_learned_modules(const std::shared_ptr<const Domain>& domain,
                                                        const std::filesystem::path& dir) {
    std::mt19937_64 rng(0);
    LearnedNets nets = make_learned_nets(*domain, rng);
    for (ModuleId m : learnable_modules(*domain)) {
        const auto path = dir / (to_string(m) + ".bin");
        if (!std::filesystem::exists(path)) throw ConfigError("missing data-module file " + path.string());
        load_module(nets, m, path);
    }
    return std::make_shared<LearnedModules>(domain, std::move(nets));
}

}  // namespace ncomp
