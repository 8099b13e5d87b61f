#include "ncomp/smallnet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ncomp/errors.hpp"

namespace ncomp {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::linear: return "linear";
        case Activation::argmax_onehot: return "argmax_onehot";
    }
    return "?";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "leaky_relu") return Activation::leaky_relu;
    if (name == "linear") return Activation::linear;
    if (name == "argmax_onehot") return Activation::argmax_onehot;
    throw ConfigError("unknown activation '" + name + "'");
}

void validate_layers(std::span<const LayerSpec> layers) {
    if (layers.empty()) throw ConfigError("network has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.input_width == 0 || l.output_width == 0) throw ConfigError("layer widths must be positive");
        if (k > 0 && layers[k - 1].output_width != l.input_width)
            throw ConfigError("layer " + std::to_string(k) + " input width does not match previous output");
        if (l.activation == Activation::argmax_onehot && k + 1 != layers.size())
            throw ConfigError("argmax_onehot is only allowed on the final layer");
    }
}

std::size_t param_count(std::span<const LayerSpec> layers) {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.param_count();
    return n;
}

std::size_t argmax_lowest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

namespace {

// out = W x + b
void dense(const LayerSpec& l, const double* p, std::span<const double> x, std::vector<double>& out) {
    out.assign(l.output_width, 0.0);
    const double* bias = p + l.input_width * l.output_width;
    for (std::size_t o = 0; o < l.output_width; ++o) {
        const double* row = p + o * l.input_width;
        double acc = bias[o];
        for (std::size_t i = 0; i < l.input_width; ++i) acc += row[i] * x[i];
        out[o] = acc;
    }
}

void activate(Activation a, std::vector<double>& v) {
    switch (a) {
        case Activation::tanh:
            for (auto& x : v) x = std::tanh(x);
            break;
        case Activation::leaky_relu:
            for (auto& x : v) x = x > 0.0 ? x : kLeakySlope * x;
            break;
        case Activation::linear:
            break;
        case Activation::argmax_onehot: {
            auto k = argmax_lowest(v);
            std::fill(v.begin(), v.end(), 0.0);
            v[k] = 1.0;
            break;
        }
    }
}

}  // namespace

std::vector<double> mlp_forward(std::span<const LayerSpec> layers, std::span<const double> params,
                                std::span<const double> input) {
    validate_layers(layers);
    if (input.size() != layers.front().input_width)
        throw ConfigError("input width " + std::to_string(input.size()) + " != " +
                          std::to_string(layers.front().input_width));
    if (params.size() != param_count(layers)) throw ConfigError("parameter slice has the wrong length");

    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    const double* p = params.data();
    for (const auto& l : layers) {
        dense(l, p, cur, next);
        activate(l.activation, next);
        p += l.param_count();
        cur.swap(next);
    }
    return cur;
}

Mlp::Mlp(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    validate_layers(layers_);
    params_.assign(ncomp::param_count(layers_), 0.0);
}

void Mlp::init_uniform(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& p : params_) p = dist(rng);
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
    return mlp_forward(layers_, params_, input);
}

std::vector<double> Mlp::forward_logits(std::span<const double> input, Tape& tape) const {
    if (input.size() != input_width()) throw ConfigError("input width mismatch");
    tape.values.resize(layers_.size() + 1);
    tape.values[0].assign(input.begin(), input.end());
    const double* p = params_.data();
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& l = layers_[k];
        dense(l, p, tape.values[k], tape.values[k + 1]);
        if (l.activation != Activation::argmax_onehot) activate(l.activation, tape.values[k + 1]);
        p += l.param_count();
    }
    return tape.values.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> d_output, std::span<double> grad) const {
    if (grad.size() != params_.size()) throw ConfigError("gradient buffer has the wrong length");
    std::vector<double> delta(d_output.begin(), d_output.end());
    std::vector<double> d_in;

    std::size_t offset = params_.size();
    for (std::size_t k = layers_.size(); k-- > 0;) {
        const auto& l = layers_[k];
        offset -= l.param_count();
        const auto& out = tape.values[k + 1];
        const auto& in = tape.values[k];

        // Through the nonlinearity, using post-activation values.
        switch (l.activation) {
            case Activation::tanh:
                for (std::size_t o = 0; o < l.output_width; ++o) delta[o] *= 1.0 - out[o] * out[o];
                break;
            case Activation::leaky_relu:
                for (std::size_t o = 0; o < l.output_width; ++o)
                    if (out[o] <= 0.0) delta[o] *= kLeakySlope;
                break;
            case Activation::linear:
            case Activation::argmax_onehot:
                break;
        }

        const double* w = params_.data() + offset;
        double* gw = grad.data() + offset;
        double* gb = gw + l.input_width * l.output_width;
        d_in.assign(k > 0 ? l.input_width : 0, 0.0);
        for (std::size_t o = 0; o < l.output_width; ++o) {
            const double d = delta[o];
            gb[o] += d;
            if (d == 0.0) continue;
            double* grow = gw + o * l.input_width;
            for (std::size_t i = 0; i < l.input_width; ++i) grow[i] += d * in[i];
            if (k > 0) {
                const double* wrow = w + o * l.input_width;
                for (std::size_t i = 0; i < l.input_width; ++i) d_in[i] += d * wrow[i];
            }
        }
        delta.swap(d_in);
    }
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& adam) {
    if (adam.first_moment.size() != params.size()) {
        adam.first_moment.assign(params.size(), 0.0);
        adam.second_moment.assign(params.size(), 0.0);
    }
    ++adam.step_count;
    const double t = static_cast<double>(adam.step_count);
    const double c1 = 1.0 - std::pow(adam.beta1, t);
    const double c2 = 1.0 - std::pow(adam.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        adam.first_moment[i] = adam.beta1 * adam.first_moment[i] + (1.0 - adam.beta1) * grad[i];
        adam.second_moment[i] = adam.beta2 * adam.second_moment[i] + (1.0 - adam.beta2) * grad[i] * grad[i];
        const double m = adam.first_moment[i] / c1;
        const double v = adam.second_moment[i] / c2;
        params[i] -= adam.learning_rate * m / (std::sqrt(v) + adam.epsilon);
    }
}

double softmax_group_loss(std::span<const double> logits, std::span<const double> target,
                          std::size_t group_width, std::span<double> d_logits) {
    if (group_width == 0 || logits.size() % group_width != 0 || target.size() != logits.size())
        throw ConfigError("logit/target widths are not a whole number of groups");
    double loss = 0.0;
    for (std::size_t g = 0; g < logits.size(); g += group_width) {
        double mx = logits[g];
        for (std::size_t j = 1; j < group_width; ++j) mx = std::max(mx, logits[g + j]);
        double z = 0.0;
        for (std::size_t j = 0; j < group_width; ++j) z += std::exp(logits[g + j] - mx);
        const double log_z = mx + std::log(z);
        for (std::size_t j = 0; j < group_width; ++j) {
            const double log_p = logits[g + j] - log_z;
            if (target[g + j] != 0.0) loss -= target[g + j] * log_p;
            d_logits[g + j] = std::exp(log_p) - target[g + j];
        }
    }
    return loss;
}

double mixture_group_loss(std::span<const double> logits, std::span<const double> acceptable,
                          std::span<const std::size_t> groups, std::span<double> d_logits) {
    if (acceptable.size() != logits.size() || d_logits.size() != logits.size())
        throw ConfigError("logit/target widths differ");
    double loss = 0.0;
    std::size_t g = 0;
    for (std::size_t width : groups) {
        if (g + width > logits.size()) throw ConfigError("groups exceed the logit width");
        double mx = logits[g];
        for (std::size_t j = 1; j < width; ++j) mx = std::max(mx, logits[g + j]);
        double z = 0.0, q = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            const double e = std::exp(logits[g + j] - mx);
            d_logits[g + j] = e;
            z += e;
            if (acceptable[g + j] != 0.0) q += e;
        }
        if (q == 0.0) throw ConfigError("group without an acceptable class");
        loss -= std::log(q / z);
        for (std::size_t j = 0; j < width; ++j) {
            const double s = d_logits[g + j] / z;
            d_logits[g + j] = acceptable[g + j] != 0.0 ? s - s * z / q : s;
        }
        g += width;
    }
    if (g != logits.size()) throw ConfigError("groups do not cover the logits");
    return loss;
}

bool groups_correct(std::span<const double> logits, std::span<const double> acceptable,
                    std::span<const std::size_t> groups) {
    std::size_t g = 0;
    for (std::size_t width : groups) {
        const std::size_t k = argmax_lowest(logits.subspan(g, width));
        if (acceptable[g + k] == 0.0) return false;
        g += width;
    }
    return true;
}

double batch_gradient(const Mlp& net, std::span<const Example> batch, std::size_t group_width,
                      std::vector<double>& grad) {
    if (batch.empty()) throw ConfigError("empty training batch");
    grad.assign(net.param_count(), 0.0);
    Mlp::Tape tape;
    std::vector<double> d_logits(net.output_width());
    double total = 0.0;
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const auto& ex : batch) {
        auto logits = net.forward_logits(ex.input, tape);
        total += softmax_group_loss(logits, ex.target, group_width, d_logits);
        for (auto& d : d_logits) d *= scale;
        net.backward(tape, d_logits, grad);
    }
    return total * scale;
}

double supervised_update(Mlp& net, AdamState& adam, std::span<const Example> batch, std::size_t group_width) {
    std::vector<double> grad;
    const double loss = batch_gradient(net, batch, group_width, grad);
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss after " << adam.step_count << " Adam steps (batch of " << batch.size()
            << ", " << net.param_count() << " parameters)";
        throw NumericError(msg.str());
    }
    adam_step(net.params(), grad, adam);
    return loss;
}

}  // namespace ncomp
