#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ncomp {

enum class Activation { tanh, leaky_relu, linear, argmax_onehot };

inline constexpr double kLeakySlope = 0.01;

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct LayerSpec {
    std::size_t input_width = 0;
    std::size_t output_width = 0;
    Activation activation = Activation::linear;

    std::size_t param_count() const { return input_width * output_width + output_width; }
    bool operator==(const LayerSpec&) const = default;
};

// Checks widths > 0, consecutive widths chain, argmax_onehot only last.
void validate_layers(std::span<const LayerSpec> layers);
std::size_t param_count(std::span<const LayerSpec> layers);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

// Stateless evaluation over a parameter slice laid out layer by layer as
// row-major weights [out][in] followed by the bias vector.
std::vector<double> mlp_forward(std::span<const LayerSpec> layers, std::span<const double> params,
                                std::span<const double> input);

class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<LayerSpec> layers);

    const std::vector<LayerSpec>& layers() const { return layers_; }
    std::size_t input_width() const { return layers_.front().input_width; }
    std::size_t output_width() const { return layers_.back().output_width; }
    std::size_t param_count() const { return params_.size(); }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    // Uniform in [-scale, scale].
    void init_uniform(std::mt19937_64& rng, double scale = 0.1);

    std::vector<double> forward(std::span<const double> input) const;

    // Activations kept for backpropagation. values[0] is the input,
    // values[k + 1] the output of layer k. A final argmax_onehot layer is
    // recorded as its logits.
    struct Tape {
        std::vector<std::vector<double>> values;
    };
    std::vector<double> forward_logits(std::span<const double> input, Tape& tape) const;

    // Accumulates dLoss/dparams into grad given dLoss/d(final output). For a
    // final argmax_onehot or linear layer the final output is the logit vector.
    void backward(const Tape& tape, std::span<const double> d_output, std::span<double> grad) const;

private:
    std::vector<LayerSpec> layers_;
    std::vector<double> params_;
};

struct AdamState {
    std::size_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-3;

    AdamState() = default;
    explicit AdamState(std::size_t n, double lr = 1e-3)
        : first_moment(n, 0.0), second_moment(n, 0.0), learning_rate(lr) {}
};

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& adam);

// One supervised example. The target is a concatenation of probability
// distributions, one per output group of `group_width` logits.
struct Example {
    std::vector<double> input;
    std::vector<double> target;
};

// Cross-entropy summed over softmax groups. Writes dLoss/dlogits.
double softmax_group_loss(std::span<const double> logits, std::span<const double> target,
                          std::size_t group_width, std::span<double> d_logits);

// Negative log of the probability mass on acceptable classes, summed over
// softmax groups of the given widths. `acceptable` holds 0/1 flags marking
// every class that counts as correct, so one-hot flags give plain
// cross-entropy. Writes dLoss/dlogits.
double mixture_group_loss(std::span<const double> logits, std::span<const double> acceptable,
                          std::span<const std::size_t> groups, std::span<double> d_logits);

// True when the argmax of every group is an acceptable class.
bool groups_correct(std::span<const double> logits, std::span<const double> acceptable,
                    std::span<const std::size_t> groups);

// Mean cross-entropy over the batch and its gradient (not applied).
double batch_gradient(const Mlp& net, std::span<const Example> batch, std::size_t group_width,
                      std::vector<double>& grad);

// One Adam step on mean cross-entropy over the batch. Returns the mean loss
// before the step. Throws NumericError on a non-finite loss.
double supervised_update(Mlp& net, AdamState& adam, std::span<const Example> batch,
                         std::size_t group_width);

}  // namespace ncomp
