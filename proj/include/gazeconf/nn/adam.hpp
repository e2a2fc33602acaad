#pragma once

#include <cmath>

#include "gazeconf/nn/params.hpp"

namespace gazeconf::nn {

template <typename Scalar>
struct AdamState {
  Vector<Scalar> m;
  Vector<Scalar> v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(Eigen::Index size) : m(Vector<Scalar>::Zero(size)), v(Vector<Scalar>::Zero(size)) {}
  template <typename P>
  explicit AdamState(const ModelParams<P>& params) : AdamState(params.size()) {}
};

// Bias-corrected Adam update in place. Non-finite gradients leave params
// and state untouched and throw.
template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const ModelParams<Scalar>& grads, AdamState<Scalar>& state,
               double lr) {
  if (!params.same_shape(grads) || state.m.size() != params.size())
    throw ContractViolation("adam_step: shape mismatch");
  if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient");
  const auto& g = grads.data().array();
  const Scalar b1 = static_cast<Scalar>(state.beta1);
  const Scalar b2 = static_cast<Scalar>(state.beta2);
  state.t += 1;
  state.m.array() = b1 * state.m.array() + (Scalar(1) - b1) * g;
  state.v.array() = b2 * state.v.array() + (Scalar(1) - b2) * g.square();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const Scalar step = static_cast<Scalar>(lr / c1);
  const Scalar inv_c2 = static_cast<Scalar>(1.0 / c2);
  const Scalar eps = static_cast<Scalar>(state.eps);
  params.data().array() -= step * state.m.array() / ((state.v.array() * inv_c2).sqrt() + eps);
}

}  // namespace gazeconf::nn
