#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Per-image CNN kernels on channel-major (C x S x S) planes. "same" padding
// with zeros, stride 1, odd square kernels of size k. Weights are laid out
// [c_out][c_in][k][k].
//
// The *_reference variants are direct per-output loops kept as a testing
// oracle for the im2col forms.
namespace wgfd::kernels {

template <typename Real>
void conv_forward(std::span<const Real> in, std::size_t c_in, std::size_t side, std::span<const Real> weight,
                  std::span<const Real> bias, std::size_t c_out, std::size_t k, std::span<Real> out);

// Accumulates into d_weight / d_bias (double) and, when d_in is non-empty,
// writes the input gradient.
template <typename Real>
void conv_backward(std::span<const Real> in, std::size_t c_in, std::size_t side, std::span<const Real> weight,
                   std::size_t c_out, std::size_t k, std::span<const Real> d_out, std::span<double> d_weight,
                   std::span<double> d_bias, std::span<Real> d_in);

// 2x2 max pooling of relu(pre). `argmax` stores the flat index into `pre` of
// each window maximum (first maximum on ties).
template <typename Real>
void relu_maxpool_forward(std::span<const Real> pre, std::size_t channels, std::size_t side, std::span<Real> out,
                          std::span<std::uint32_t> argmax);

// Routes d_out back through the pool and the ReLU mask into d_pre (overwritten).
template <typename Real>
void relu_maxpool_backward(std::span<const Real> pre, std::span<const std::uint32_t> argmax,
                           std::span<const Real> d_out, std::span<Real> d_pre);

template <typename Real>
void conv_forward_reference(std::span<const Real> in, std::size_t c_in, std::size_t side,
                            std::span<const Real> weight, std::span<const Real> bias, std::size_t c_out,
                            std::size_t k, std::span<Real> out);

template <typename Real>
void conv_backward_reference(std::span<const Real> in, std::size_t c_in, std::size_t side,
                             std::span<const Real> weight, std::size_t c_out, std::size_t k,
                             std::span<const Real> d_out, std::span<double> d_weight, std::span<double> d_bias,
                             std::span<Real> d_in);

} // namespace wgfd::kernels
