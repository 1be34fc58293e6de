// Serial vs OpenMP timings for the hot paths, plus the im2col conv kernels
// against their direct-loop references.

#include <benchmark/benchmark.h>

#include <vector>

#include "wgfd/kernels.hpp"
#include "wgfd/model.hpp"
#include "wgfd/pipeline.hpp"
#include "wgfd/rng.hpp"
#include "wgfd/wavelet.hpp"

using namespace wgfd;

namespace {

Exec exec_arg(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

std::vector<ImageTensor> random_images(std::size_t n, std::size_t side) {
    Rng rng(1);
    std::vector<ImageTensor> out(n, ImageTensor(side, side, 3));
    for (auto& img : out)
        for (auto& v : img.data) v = rng.uniform();
    return out;
}

std::vector<float> random_floats(std::size_t n, Rng& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return v;
}

void BM_Dwt2d(benchmark::State& state) {
    Rng rng(2);
    Plane p(256, 256);
    for (auto& v : p.data) v = rng.uniform();
    const auto fb = wavelet::filter_bank("db2");
    for (auto _ : state) {
        auto q = wavelet::dwt2d(p, fb, wavelet::BoundaryMode::Periodization, exec_arg(state));
        benchmark::DoNotOptimize(q.hh.data.data());
    }
}
BENCHMARK(BM_Dwt2d)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_PrepareBatch(benchmark::State& state) {
    const auto imgs = random_images(64, 64);
    const auto dom = DomainKind::wavelet("db2");
    for (auto _ : state) {
        auto out = prepare_batch(imgs, dom, 64, exec_arg(state));
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_PrepareBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ForwardBatch(benchmark::State& state) {
    nn::ModelConfig cfg;
    cfg.input_side = 64;
    const auto model = nn::build_model<float>(cfg);
    const auto imgs = random_images(32, 64);
    const auto batch = nn::to_batch<float>(imgs);
    for (auto _ : state) benchmark::DoNotOptimize(nn::forward(model, batch, exec_arg(state)));
}
BENCHMARK(BM_ForwardBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BackwardBatch(benchmark::State& state) {
    nn::ModelConfig cfg;
    cfg.input_side = 64;
    const auto model = nn::build_model<float>(cfg);
    const auto imgs = random_images(32, 64);
    const auto batch = nn::to_batch<float>(imgs);
    std::vector<Label> labels(32);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2 ? Label::Fake : Label::Real;
    for (auto _ : state) benchmark::DoNotOptimize(nn::backward(model, batch, labels, exec_arg(state)));
}
BENCHMARK(BM_BackwardBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// First conv layer of the default model at 64x64: 3 -> 8 channels.
struct ConvCase {
    std::size_t c_in = 3, c_out = 8, side = 64, k = 3;
    std::vector<float> in, weight, bias, out, d_out, d_in;
    std::vector<double> d_weight, d_bias;

    ConvCase() {
        Rng rng(3);
        in = random_floats(c_in * side * side, rng);
        weight = random_floats(c_out * c_in * k * k, rng);
        bias = random_floats(c_out, rng);
        d_out = random_floats(c_out * side * side, rng);
        out.resize(c_out * side * side);
        d_in.resize(in.size());
        d_weight.resize(weight.size());
        d_bias.resize(c_out);
    }
};

void BM_ConvForward(benchmark::State& state) {
    ConvCase c;
    for (auto _ : state) {
        if (state.range(0))
            kernels::conv_forward<float>(c.in, c.c_in, c.side, c.weight, c.bias, c.c_out, c.k, c.out);
        else
            kernels::conv_forward_reference<float>(c.in, c.c_in, c.side, c.weight, c.bias, c.c_out, c.k, c.out);
        benchmark::DoNotOptimize(c.out.data());
    }
}
BENCHMARK(BM_ConvForward)->ArgName("im2col")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ConvBackward(benchmark::State& state) {
    ConvCase c;
    for (auto _ : state) {
        if (state.range(0))
            kernels::conv_backward<float>(c.in, c.c_in, c.side, c.weight, c.c_out, c.k, c.d_out, c.d_weight,
                                          c.d_bias, c.d_in);
        else
            kernels::conv_backward_reference<float>(c.in, c.c_in, c.side, c.weight, c.c_out, c.k, c.d_out,
                                                    c.d_weight, c.d_bias, c.d_in);
        benchmark::DoNotOptimize(c.d_in.data());
    }
}
BENCHMARK(BM_ConvBackward)->ArgName("im2col")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
