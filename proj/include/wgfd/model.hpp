#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wgfd/dataset.hpp"
#include "wgfd/exec.hpp"
#include "wgfd/image.hpp"

namespace wgfd::nn {

// Blocks of [k x k conv (stride 1, zero pad) -> ReLU -> 2x2 max-pool], then
// global average pooling and one sigmoid unit. One config is shared by the
// spatial and wavelet experiments.
struct ModelConfig {
    std::size_t input_side = 64;
    std::vector<std::size_t> channels_per_block = {8, 16, 32};
    std::size_t kernel_size = 3;
    std::size_t dense_hidden = 0; // only the direct head (0) is supported
    std::uint64_t seed = 0;
    static constexpr std::size_t input_channels = 3;

    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename Real>
struct Tensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<Real> data;
};

std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_layout(const ModelConfig& cfg);
std::size_t parameter_count(const ModelConfig& cfg);

template <typename Real>
struct Model {
    ModelConfig config;
    std::vector<Tensor<Real>> params; // conv{b}.weight, conv{b}.bias, ..., head.weight, head.bias

    std::size_t parameter_count() const;
    Tensor<Real>& param(const std::string& name);
};

// Conv weights ~ U(-sqrt(6/fan_in), +), head weights ~ U(-sqrt(3/fan_in), +),
// biases zero. Values are drawn in double, so float and double models built
// from one config agree to float rounding.
template <typename Real>
Model<Real> build_model(const ModelConfig& cfg);

template <typename To, typename From>
Model<To> cast_model(const Model<From>& m) {
    Model<To> out{m.config, {}};
    for (const auto& t : m.params) {
        out.params.push_back({t.name, t.shape, std::vector<To>(t.data.begin(), t.data.end())});
    }
    return out;
}

// N images of 3 x side x side, channel-major.
template <typename Real>
struct Batch {
    std::size_t count = 0;
    std::size_t side = 0;
    std::vector<Real> data;

    std::span<const Real> image(std::size_t i) const {
        const std::size_t n = 3 * side * side;
        return {data.data() + i * n, n};
    }
};

// Packs side x side x 3 tensors (channel-last) into a channel-major batch.
template <typename Real>
Batch<Real> to_batch(std::span<const ImageTensor> images);

template <typename Real>
std::vector<double> forward_logits(const Model<Real>& model, const Batch<Real>& batch, Exec exec = Exec::Parallel);

template <typename Real>
std::vector<double> forward(const Model<Real>& model, const Batch<Real>& batch, Exec exec = Exec::Parallel);

double sigmoid(double z);

// Mean binary cross-entropy on probabilities clamped to [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> probs, std::span<const Label> labels);

// Mean binary cross-entropy evaluated from logits (softplus form).
double bce_with_logits(std::span<const double> logits, std::span<const Label> labels);

// Gradients of the mean BCE with respect to each parameter tensor, in
// parameter order.
struct Gradients {
    std::vector<std::vector<double>> tensors;
    double loss = 0.0;
};

// Per-image gradients are computed independently (in parallel when asked)
// and summed in image order, so the result does not depend on thread count.
template <typename Real>
Gradients backward(const Model<Real>& model, const Batch<Real>& batch, std::span<const Label> labels,
                   Exec exec = Exec::Parallel);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename Real>
struct AdamState {
    std::vector<std::vector<Real>> m, v;
    std::int64_t step = 0;
};

template <typename Real>
AdamState<Real> adam_init(const Model<Real>& model);

template <typename Real>
void adam_step(AdamState<Real>& state, Model<Real>& model, const Gradients& grads, double lr,
               const AdamConfig& cfg = {});

// Largest relative disagreement between analytic gradients and central
// differences of the mean BCE, |a - n| / max(|a|, |n|, 1e-6), over every
// parameter. Meant for small double-precision models.
struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t checked = 0;
};

GradCheckResult gradient_check(const Model<double>& model, const Batch<double>& batch, std::span<const Label> labels,
                               double step = 1e-5);

} // namespace wgfd::nn
