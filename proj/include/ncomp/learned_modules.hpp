#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ncomp/data_modules.hpp"
#include "ncomp/domains.hpp"
#include "ncomp/smallnet.hpp"

namespace ncomp {

enum class ModuleId { input, transform, alu, output };

std::string to_string(ModuleId m);
ModuleId module_from_string(const std::string& s);

// Supervised example whose target marks acceptable classes per softmax group.
struct LabeledSample {
    std::vector<double> input;
    std::vector<double> target;
};

using SampleGenerator = std::function<LabeledSample(std::mt19937_64&)>;

struct TrainingBudget {
    std::size_t max_steps = 40000;
    std::size_t batch = 20;
    std::size_t buffer_capacity = 200;
    double buffer_share = 0.5;
    double learning_rate = 1e-3;
    std::size_t probe_every = 500;
    std::size_t probe_size = 2000;
    std::size_t stop_samples = 20000;  // stop once this many consecutive probe samples are correct
    std::size_t heldout = 10000;
    bool bad_memories = true;
};

struct NetReport {
    std::string name;
    std::size_t steps = 0;
    double final_loss = 0.0;
    std::size_t heldout = 0;
    std::size_t heldout_correct = 0;
    bool passed = false;
};

// Trains `net` on generated samples with Adam and a bad-memory buffer of
// misclassified samples. Stops early once consecutive probes have been fully
// correct on stop_samples fresh samples; reports accuracy on a separate
// held-out set.
NetReport train_net(Mlp& net, std::span<const std::size_t> groups, const SampleGenerator& generate,
                    const TrainingBudget& budget, std::uint64_t seed, const std::string& name);

// Networks of the learnable data modules. Unused ones stay empty.
struct LearnedNets {
    Mlp input;          // |d_e - x| features -> 10 -> equal / different
    Mlp transform;      // word -> 500 -> local view (Sokoban)
    Mlp alu_control;    // view (or word) + op -> 64 -> 64 -> changed / unchanged
    Mlp alu_action;     // view (or word) + op -> 128 -> 64 -> local change (or new word)
    Mlp output_control; // c_a + change + word -> 500 -> 250 -> insert / keep
    Mlp output_data;    // change + word -> 500 -> 500 -> per-cell source choice (Sokoban)
};

// Untrained networks with the architecture for a domain.
LearnedNets make_learned_nets(const Domain& domain, std::mt19937_64& rng);

// Data modules evaluated by trained networks. Grid worlds use all four;
// the other domains learn Input and a whole-word ALU and pass data through
// Transform_D and Output.
class LearnedModules final : public DataModules {
public:
    LearnedModules(std::shared_ptr<const Domain> domain, LearnedNets nets);

    std::size_t word_width() const override { return domain_->word_width(); }
    bool equality(std::span<const std::uint8_t> d_e, std::span<const std::uint8_t> x) const override;
    Bits transform(const Bits& d_m) const override;
    AluResult alu(int op, const Bits& d_f) const override;
    OutputResult output(bool c_a, const Bits& d_a, const Bits& d_m) const override;

    const LearnedNets& nets() const { return nets_; }
    const Domain& domain() const { return *domain_; }

private:
    bool grid() const;

    std::shared_ptr<const Domain> domain_;
    LearnedNets nets_;
};

// Which modules a domain learns (Sokoban: all four; others: input, alu).
std::vector<ModuleId> learnable_modules(const Domain& domain);

struct ModuleReport {
    ModuleId module = ModuleId::input;
    std::vector<NetReport> nets;
    std::size_t heldout = 0;
    std::size_t agreement = 0;  // exact matches with the oracle module
    bool passed = false;
    std::string json() const;
};

// Trains the networks of one module in place and checks the assembled
// module against its oracle on fresh samples.
ModuleReport train_data_module(ModuleId module, const Domain& domain, LearnedNets& nets,
                               const TrainingBudget& budget, std::uint64_t seed);

// Exact agreement of the learned module with the oracle on `samples` draws.
std::size_t module_agreement(ModuleId module, const Domain& domain, const LearnedNets& nets, std::size_t samples,
                             std::uint64_t seed);

// One file per module, in the genome format.
void save_module(const LearnedNets& nets, ModuleId module, const std::filesystem::path& path);
void load_module(LearnedNets& nets, ModuleId module, const std::filesystem::path& path);

// Loads `<dir>/<module>.bin` for every learnable module of the domain.
std::shared_ptr<const DataModules> load_learned_modules(const std::shared_ptr<const Domain>& domain,
                                                        const std::filesystem::path& dir);

// Configurations used to train and test the modules: a sampled start
// followed by a random walk of up to 12 moves.
Bits sample_configuration(const Domain& domain, std::mt19937_64& rng);

}  // namespace ncomp
