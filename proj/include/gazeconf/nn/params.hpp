#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <string_view>

#include "gazeconf/core.hpp"

namespace gazeconf::nn {

enum class CellKind : std::uint32_t { rnn = 0, gru = 1, lstm = 2 };

inline std::string_view to_string(CellKind kind) {
  switch (kind) {
    case CellKind::rnn: return "rnn";
    case CellKind::gru: return "gru";
    case CellKind::lstm: return "lstm";
  }
  return "?";
}

inline CellKind parse_cell_kind(std::string_view name) {
  if (name == "rnn") return CellKind::rnn;
  if (name == "gru") return CellKind::gru;
  if (name == "lstm") return CellKind::lstm;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected rnn, gru or lstm)");
}

// Gate blocks stacked in W, U and b: rnn [h], gru [z r n], lstm [i f g o].
inline constexpr int gate_count(CellKind kind) {
  return kind == CellKind::rnn ? 1 : kind == CellKind::gru ? 3 : 4;
}

inline constexpr int kNumClasses = 2;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// All weights in one flat buffer so the optimizer, checkpoints and the
// gradient checker can treat the model as a single vector. Layout (each
// block column-major): W (G*H x I), U (G*H x H), b (G*H), V (2 x H), c (2).
// Gradients use the same type.
template <typename Scalar>
class ModelParams {
 public:
  using MatMap = Eigen::Map<Matrix<Scalar>>;
  using ConstMatMap = Eigen::Map<const Matrix<Scalar>>;
  using VecMap = Eigen::Map<Vector<Scalar>>;
  using ConstVecMap = Eigen::Map<const Vector<Scalar>>;

  ModelParams() = default;

  ModelParams(CellKind kind, int input_size, int hidden_size)
      : kind_(kind), input_(input_size), hidden_(hidden_size) {
    if (input_size < 1 || hidden_size < 1) throw ConfigError("model sizes must be positive");
    data_ = Vector<Scalar>::Zero(count(kind, input_size, hidden_size));
  }

  static Eigen::Index count(CellKind kind, int input, int hidden) {
    const Eigen::Index gh = static_cast<Eigen::Index>(gate_count(kind)) * hidden;
    return gh * input + gh * hidden + gh + kNumClasses * hidden + kNumClasses;
  }

  // Uniform in +-1/sqrt(H); LSTM forget-gate bias starts at 1.
  static ModelParams initialized(CellKind kind, int input, int hidden, Rng& rng) {
    ModelParams p(kind, input, hidden);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (Eigen::Index i = 0; i < p.data_.size(); ++i)
      p.data_(i) = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * bound);
    if (kind == CellKind::lstm) p.b().segment(hidden, hidden).setConstant(Scalar(1));
    return p;
  }

  CellKind kind() const { return kind_; }
  int input_size() const { return input_; }
  int hidden_size() const { return hidden_; }
  int gates() const { return gate_count(kind_); }
  Eigen::Index size() const { return data_.size(); }

  Vector<Scalar>& data() { return data_; }
  const Vector<Scalar>& data() const { return data_; }

  MatMap W() { return {data_.data() + off_W(), gh(), input_}; }
  MatMap U() { return {data_.data() + off_U(), gh(), hidden_}; }
  VecMap b() { return {data_.data() + off_b(), gh()}; }
  MatMap V() { return {data_.data() + off_V(), kNumClasses, hidden_}; }
  VecMap c() { return {data_.data() + off_c(), kNumClasses}; }
  ConstMatMap W() const { return {data_.data() + off_W(), gh(), input_}; }
  ConstMatMap U() const { return {data_.data() + off_U(), gh(), hidden_}; }
  ConstVecMap b() const { return {data_.data() + off_b(), gh()}; }
  ConstMatMap V() const { return {data_.data() + off_V(), kNumClasses, hidden_}; }
  ConstVecMap c() const { return {data_.data() + off_c(), kNumClasses}; }

  ModelParams zeros_like() const { return ModelParams(kind_, input_, hidden_); }

  bool same_shape(const ModelParams& o) const {
    return kind_ == o.kind_ && input_ == o.input_ && hidden_ == o.hidden_;
  }

  bool all_finite() const { return data_.allFinite(); }

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out(kind_, input_, hidden_);
    out.data() = data_.template cast<Other>();
    return out;
  }

  bool operator==(const ModelParams& o) const { return same_shape(o) && data_ == o.data_; }

 private:
  Eigen::Index gh() const { return static_cast<Eigen::Index>(gates()) * hidden_; }
  Eigen::Index off_W() const { return 0; }
  Eigen::Index off_U() const { return gh() * input_; }
  Eigen::Index off_b() const { return off_U() + gh() * hidden_; }
  Eigen::Index off_V() const { return off_b() + gh(); }
  Eigen::Index off_c() const { return off_V() + kNumClasses * hidden_; }

  CellKind kind_ = CellKind::gru;
  int input_ = 0;
  int hidden_ = 0;
  Vector<Scalar> data_;
};

}  // namespace gazeconf::nn
