#include "wgfd/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "wgfd/error.hpp"
#include "wgfd/kernels.hpp"
#include "wgfd/rng.hpp"

namespace wgfd::nn {

void ModelConfig::validate() const {
    if (channels_per_block.empty()) throw InvalidArgument("model needs at least one conv block");
    for (auto c : channels_per_block)
        if (c == 0) throw InvalidArgument("conv block with zero channels");
    if (kernel_size == 0 || kernel_size % 2 == 0) throw InvalidArgument("kernel_size must be odd");
    if (dense_hidden != 0) throw InvalidArgument("dense_hidden must be 0 (direct head)");
    const std::size_t divisor = std::size_t{1} << channels_per_block.size();
    if (input_side == 0 || input_side % divisor != 0) {
        throw InvalidArgument("input_side " + std::to_string(input_side) + " is not divisible by " +
                              std::to_string(divisor) + " (2^" + std::to_string(channels_per_block.size()) +
                              " pooling stages)");
    }
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_layout(const ModelConfig& cfg) {
    cfg.validate();
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    std::size_t c_in = ModelConfig::input_channels;
    for (std::size_t b = 0; b < cfg.channels_per_block.size(); ++b) {
        const std::size_t c_out = cfg.channels_per_block[b];
        const std::string prefix = "conv" + std::to_string(b);
        out.push_back({prefix + ".weight", {c_out, c_in, cfg.kernel_size, cfg.kernel_size}});
        out.push_back({prefix + ".bias", {c_out}});
        c_in = c_out;
    }
    out.push_back({"head.weight", {1, c_in}});
    out.push_back({"head.bias", {1}});
    return out;
}

std::size_t parameter_count(const ModelConfig& cfg) {
    std::size_t n = 0;
    for (const auto& [name, shape] : parameter_layout(cfg)) {
        std::size_t e = 1;
        for (auto d : shape) e *= d;
        n += e;
    }
    return n;
}

template <typename Real>
std::size_t Model<Real>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : params) n += t.data.size();
    return n;
}

template <typename Real>
Tensor<Real>& Model<Real>::param(const std::string& name) {
    for (auto& t : params)
        if (t.name == name) return t;
    throw InvalidArgument("no parameter named '" + name + "'");
}

template <typename Real>
Model<Real> build_model(const ModelConfig& cfg) {
    const auto layout = parameter_layout(cfg);
    Model<Real> m{cfg, {}};
    Rng rng(cfg.seed);
    for (const auto& [name, shape] : layout) {
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        Tensor<Real> t{name, shape, std::vector<Real>(n, Real(0))};
        const bool is_weight = name.ends_with(".weight");
        if (is_weight) {
            std::size_t fan_in = 1;
            for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
            const bool head = name.starts_with("head");
            const double bound = std::sqrt((head ? 3.0 : 6.0) / static_cast<double>(fan_in));
            for (auto& v : t.data) v = static_cast<Real>(rng.uniform(-bound, bound));
        }
        m.params.push_back(std::move(t));
    }
    return m;
}

template <typename Real>
Batch<Real> to_batch(std::span<const ImageTensor> images) {
    Batch<Real> b;
    b.count = images.size();
    if (images.empty()) return b;
    b.side = images[0].height;
    const std::size_t plane = b.side * b.side;
    b.data.resize(b.count * 3 * plane);
    for (std::size_t i = 0; i < b.count; ++i) {
        const auto& img = images[i];
        if (img.height != b.side || img.width != b.side || img.channels != 3) {
            throw InvalidArgument("batch images must all be " + std::to_string(b.side) + "x" +
                                  std::to_string(b.side) + "x3");
        }
        Real* dst = b.data.data() + i * 3 * plane;
        for (std::size_t p = 0; p < plane; ++p)
            for (std::size_t c = 0; c < 3; ++c) dst[c * plane + p] = static_cast<Real>(img.data[p * 3 + c]);
    }
    return b;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_labels(std::size_t n, std::size_t m) {
    if (n != m) {
        throw InvalidArgument("length mismatch: " + std::to_string(n) + " predictions vs " + std::to_string(m) +
                              " labels");
    }
    if (n == 0) throw InvalidArgument("empty prediction list");
}

template <typename Real>
struct Trace {
    std::vector<std::vector<Real>> pre;
    std::vector<std::vector<Real>> pooled;
    std::vector<std::vector<std::uint32_t>> argmax;
    std::vector<double> gap;
    double logit = 0.0;
};

template <typename Real>
void check_batch(const Model<Real>& model, const Batch<Real>& batch) {
    if (batch.count == 0) throw InvalidArgument("empty batch");
    if (batch.side != model.config.input_side || batch.data.size() != batch.count * 3 * batch.side * batch.side) {
        throw InvalidArgument("shape mismatch: batch of " + std::to_string(batch.side) + "x" +
                              std::to_string(batch.side) + " images for a model expecting " +
                              std::to_string(model.config.input_side));
    }
}

template <typename Real>
void run_forward(const Model<Real>& model, std::span<const Real> image, Trace<Real>& tr) {
    const auto& cfg = model.config;
    const std::size_t blocks = cfg.channels_per_block.size();
    tr.pre.resize(blocks);
    tr.pooled.resize(blocks);
    tr.argmax.resize(blocks);
    std::span<const Real> in = image;
    std::size_t c_in = ModelConfig::input_channels;
    std::size_t side = cfg.input_side;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t c_out = cfg.channels_per_block[b];
        const auto& w = model.params[2 * b];
        const auto& bias = model.params[2 * b + 1];
        tr.pre[b].assign(c_out * side * side, Real(0));
        kernels::conv_forward<Real>(in, c_in, side, w.data, bias.data, c_out, cfg.kernel_size, tr.pre[b]);
        const std::size_t half = side / 2;
        tr.pooled[b].assign(c_out * half * half, Real(0));
        tr.argmax[b].assign(c_out * half * half, 0);
        kernels::relu_maxpool_forward<Real>(tr.pre[b], c_out, side, tr.pooled[b], tr.argmax[b]);
        in = tr.pooled[b];
        c_in = c_out;
        side = half;
    }
    const std::size_t area = side * side;
    tr.gap.assign(c_in, 0.0);
    const auto& hw = model.params[2 * blocks];
    const auto& hb = model.params[2 * blocks + 1];
    double z = static_cast<double>(hb.data[0]);
    for (std::size_t c = 0; c < c_in; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < area; ++i) s += static_cast<double>(in[c * area + i]);
        tr.gap[c] = s / static_cast<double>(area);
        z += static_cast<double>(hw.data[c]) * tr.gap[c];
    }
    tr.logit = z;
}

// Gradient of the per-image loss with respect to every parameter, written
// into `grad` (flat, parameter order) given dL/dlogit.
template <typename Real>
void run_backward(const Model<Real>& model, std::span<const Real> image, const Trace<Real>& tr, double dz,
                  std::span<double> grad, const std::vector<std::size_t>& offsets) {
    const auto& cfg = model.config;
    const std::size_t blocks = cfg.channels_per_block.size();
    const std::size_t c_last = cfg.channels_per_block.back();
    const std::size_t side_last = cfg.input_side >> blocks;
    const std::size_t area = side_last * side_last;

    const auto& hw = model.params[2 * blocks];
    double* g_hw = grad.data() + offsets[2 * blocks];
    double* g_hb = grad.data() + offsets[2 * blocks + 1];
    g_hb[0] += dz;
    std::vector<Real> d_pooled(c_last * area);
    for (std::size_t c = 0; c < c_last; ++c) {
        g_hw[c] += dz * tr.gap[c];
        const auto d = static_cast<Real>(dz * static_cast<double>(hw.data[c]) / static_cast<double>(area));
        std::fill_n(d_pooled.begin() + static_cast<long>(c * area), area, d);
    }

    std::vector<Real> d_pre;
    std::vector<Real> d_in;
    for (std::size_t bi = blocks; bi-- > 0;) {
        const std::size_t c_out = cfg.channels_per_block[bi];
        const std::size_t c_in = bi == 0 ? ModelConfig::input_channels : cfg.channels_per_block[bi - 1];
        const std::size_t side = cfg.input_side >> bi;
        d_pre.assign(c_out * side * side, Real(0));
        kernels::relu_maxpool_backward<Real>(tr.pre[bi], tr.argmax[bi], d_pooled, d_pre);

        const std::span<const Real> in = bi == 0 ? image : std::span<const Real>(tr.pooled[bi - 1]);
        const auto& w = model.params[2 * bi];
        std::span<double> g_w(grad.data() + offsets[2 * bi], w.data.size());
        std::span<double> g_b(grad.data() + offsets[2 * bi + 1], c_out);
        if (bi == 0) {
            kernels::conv_backward<Real>(in, c_in, side, w.data, c_out, cfg.kernel_size, d_pre, g_w, g_b, {});
        } else {
            d_in.assign(c_in * side * side, Real(0));
            kernels::conv_backward<Real>(in, c_in, side, w.data, c_out, cfg.kernel_size, d_pre, g_w, g_b, d_in);
            d_pooled.swap(d_in);
        }
    }
}

template <typename Fn>
void parallel_for_images(std::size_t n, Exec exec, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

template <typename Real>
std::vector<double> forward_logits(const Model<Real>& model, const Batch<Real>& batch, Exec exec) {
    check_batch(model, batch);
    std::vector<double> z(batch.count);
    parallel_for_images(batch.count, exec, [&](std::size_t i) {
        Trace<Real> tr;
        run_forward(model, batch.image(i), tr);
        z[i] = tr.logit;
    });
    return z;
}

template <typename Real>
std::vector<double> forward(const Model<Real>& model, const Batch<Real>& batch, Exec exec) {
    auto z = forward_logits(model, batch, exec);
    for (auto& v : z) v = sigmoid(v);
    return z;
}

double bce_loss(std::span<const double> probs, std::span<const Label> labels) {
    check_labels(probs.size(), labels.size());
    constexpr double eps = 1e-7;
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], eps, 1.0 - eps);
        s += labels[i] == Label::Fake ? -std::log(p) : -std::log(1.0 - p);
    }
    return s / static_cast<double>(probs.size());
}

double bce_with_logits(std::span<const double> logits, std::span<const Label> labels) {
    check_labels(logits.size(), labels.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double y = labels[i] == Label::Fake ? 1.0 : 0.0;
        s += softplus(logits[i]) - y * logits[i];
    }
    return s / static_cast<double>(logits.size());
}

template <typename Real>
Gradients backward(const Model<Real>& model, const Batch<Real>& batch, std::span<const Label> labels, Exec exec) {
    check_batch(model, batch);
    check_labels(batch.count, labels.size());

    std::vector<std::size_t> offsets;
    std::size_t total = 0;
    for (const auto& t : model.params) {
        offsets.push_back(total);
        total += t.data.size();
    }

    std::vector<std::vector<double>> per_image(batch.count);
    std::vector<double> logits(batch.count);
    parallel_for_images(batch.count, exec, [&](std::size_t i) {
        Trace<Real> tr;
        run_forward(model, batch.image(i), tr);
        logits[i] = tr.logit;
        const double y = labels[i] == Label::Fake ? 1.0 : 0.0;
        per_image[i].assign(total, 0.0);
        run_backward(model, batch.image(i), tr, sigmoid(tr.logit) - y, per_image[i], offsets);
    });

    std::vector<double> sum(total, 0.0);
    for (const auto& g : per_image)
        for (std::size_t k = 0; k < total; ++k) sum[k] += g[k];
    const double inv = 1.0 / static_cast<double>(batch.count);

    Gradients out;
    out.loss = bce_with_logits(logits, labels);
    for (std::size_t t = 0; t < model.params.size(); ++t) {
        const std::size_t n = model.params[t].data.size();
        std::vector<double> g(n);
        for (std::size_t k = 0; k < n; ++k) g[k] = sum[offsets[t] + k] * inv;
        out.tensors.push_back(std::move(g));
    }
    return out;
}

template <typename Real>
AdamState<Real> adam_init(const Model<Real>& model) {
    AdamState<Real> s;
    for (const auto& t : model.params) {
        s.m.emplace_back(t.data.size(), Real(0));
        s.v.emplace_back(t.data.size(), Real(0));
    }
    return s;
}

template <typename Real>
void adam_step(AdamState<Real>& state, Model<Real>& model, const Gradients& grads, double lr,
               const AdamConfig& cfg) {
    if (grads.tensors.size() != model.params.size() || state.m.size() != model.params.size()) {
        throw InvalidArgument("shape mismatch: gradient/optimizer state does not match the model");
    }
    for (std::size_t t = 0; t < model.params.size(); ++t) {
        if (grads.tensors[t].size() != model.params[t].data.size() ||
            state.m[t].size() != model.params[t].data.size()) {
            throw InvalidArgument("shape mismatch in tensor '" + model.params[t].name + "'");
        }
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t ti = 0; ti < model.params.size(); ++ti) {
        auto& p = model.params[ti].data;
        auto& m = state.m[ti];
        auto& v = state.v[ti];
        const auto& g = grads.tensors[ti];
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double mk = cfg.beta1 * static_cast<double>(m[k]) + (1.0 - cfg.beta1) * g[k];
            const double vk = cfg.beta2 * static_cast<double>(v[k]) + (1.0 - cfg.beta2) * g[k] * g[k];
            m[k] = static_cast<Real>(mk);
            v[k] = static_cast<Real>(vk);
            const double update = lr * (mk / c1) / (std::sqrt(vk / c2) + cfg.eps);
            p[k] = static_cast<Real>(static_cast<double>(p[k]) - update);
        }
    }
}

GradCheckResult gradient_check(const Model<double>& model, const Batch<double>& batch, std::span<const Label> labels,
                               double step) {
    const Gradients g = backward(model, batch, labels, Exec::Serial);
    Model<double> probe = model;
    GradCheckResult res;
    auto loss_at = [&] { return bce_with_logits(forward_logits(probe, batch, Exec::Serial), labels); };
    for (std::size_t t = 0; t < probe.params.size(); ++t) {
        auto& data = probe.params[t].data;
        for (std::size_t k = 0; k < data.size(); ++k) {
            const double orig = data[k];
            data[k] = orig + step;
            const double up = loss_at();
            data[k] = orig - step;
            const double down = loss_at();
            data[k] = orig;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = g.tensors[t][k];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            const double rel = std::abs(analytic - numeric) / denom;
            if (rel > res.max_rel_error) {
                res.max_rel_error = rel;
                res.worst_param = probe.params[t].name + "[" + std::to_string(k) + "]";
            }
            ++res.checked;
        }
    }
    return res;
}

#define WGFD_INSTANTIATE(Real)                                                                                  \
    template struct Model<Real>;                                                                                \
    template Model<Real> build_model<Real>(const ModelConfig&);                                                 \
    template Batch<Real> to_batch<Real>(std::span<const ImageTensor>);                                          \
    template std::vector<double> forward_logits<Real>(const Model<Real>&, const Batch<Real>&, Exec);            \
    template std::vector<double> forward<Real>(const Model<Real>&, const Batch<Real>&, Exec);                   \
    template Gradients backward<Real>(const Model<Real>&, const Batch<Real>&, std::span<const Label>, Exec);    \
    template AdamState<Real> adam_init<Real>(const Model<Real>&);                                               \
    template void adam_step<Real>(AdamState<Real>&, Model<Real>&, const Gradients&, double, const AdamConfig&);

WGFD_INSTANTIATE(float)
WGFD_INSTANTIATE(double)

#undef WGFD_INSTANTIATE

} // namespace wgfd::nn
