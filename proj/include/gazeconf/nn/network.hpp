#pragma once

// Single-layer recurrent classifier: cell recurrences, classifier head,
// negative log likelihood, and backpropagation through time.
//
// Batches are column-major: one column per sequence. Sequences are sorted
// by length (longest first) so the sequences still running at step t are
// always a prefix of the columns. A finished sequence's column is frozen,
// which makes its final state the state at its own last real row; padding
// is never fed into the recurrence.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gazeconf/nn/params.hpp"
#include "gazeconf/preprocess.hpp"

namespace gazeconf::nn {

template <typename Scalar>
struct SequenceBatch {
  std::vector<Eigen::Index> lengths;   // non-increasing
  std::vector<int> labels;             // 0 = not_confused, 1 = confused
  std::vector<std::size_t> order;      // column j came from input order[j]
  std::vector<Matrix<Scalar>> steps;   // steps[t]: I x active(t)

  Eigen::Index columns() const { return static_cast<Eigen::Index>(lengths.size()); }
  Eigen::Index active(std::size_t t) const { return steps[t].cols(); }
};

template <typename Scalar>
SequenceBatch<Scalar> make_batch(const std::vector<const WindowedItem*>& items) {
  SequenceBatch<Scalar> batch;
  batch.order.resize(items.size());
  std::iota(batch.order.begin(), batch.order.end(), std::size_t{0});
  std::stable_sort(batch.order.begin(), batch.order.end(), [&](std::size_t a, std::size_t b) {
    return items[a]->true_length() > items[b]->true_length();
  });
  for (auto i : batch.order) {
    if (items[i]->true_length() == 0) throw ContractViolation("forward: item with zero rows");
    batch.lengths.push_back(items[i]->true_length());
    batch.labels.push_back(items[i]->label == Label::confused ? 1 : 0);
  }
  const Eigen::Index max_len = batch.lengths.empty() ? 0 : batch.lengths.front();
  const auto width = static_cast<Eigen::Index>(kFeatureCount);
  batch.steps.resize(static_cast<std::size_t>(max_len));
  Eigen::Index active = batch.columns();
  for (Eigen::Index t = 0; t < max_len; ++t) {
    while (active > 0 && batch.lengths[static_cast<std::size_t>(active - 1)] <= t) --active;
    auto& x = batch.steps[static_cast<std::size_t>(t)];
    x.resize(width, active);
    for (Eigen::Index j = 0; j < active; ++j)
      x.col(j) = items[batch.order[static_cast<std::size_t>(j)]]->values.row(t).transpose().template cast<Scalar>();
  }
  return batch;
}

template <typename Scalar>
SequenceBatch<Scalar> make_batch(const std::vector<WindowedItem>& items) {
  std::vector<const WindowedItem*> ptrs;
  for (const auto& it : items) ptrs.push_back(&it);
  return make_batch<Scalar>(ptrs);
}

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return (S(1) + (-x).exp()).inverse();
}

}  // namespace detail

// Activations of one time step over its active columns.
template <typename Scalar>
struct StepCache {
  Matrix<Scalar> h_prev;
  Matrix<Scalar> c_prev;  // lstm
  Matrix<Scalar> gates;   // G*H x n activated gates
  Matrix<Scalar> aux;     // gru: U_n h ; lstm: tanh(c) ; rnn: unused
};

// State after a step. For rnn/gru `c` stays empty.
template <typename Scalar>
struct CellState {
  Matrix<Scalar> h;
  Matrix<Scalar> c;
};

// Advance the first x.cols() columns of `state` by one step.
template <typename Scalar>
void step_forward(const ModelParams<Scalar>& p, const Matrix<Scalar>& x, CellState<Scalar>& state,
                  StepCache<Scalar>* cache) {
  const Eigen::Index n = x.cols();
  const Eigen::Index H = p.hidden_size();
  if (x.rows() != p.input_size() || state.h.rows() != H || state.h.cols() < n)
    throw ContractViolation("cell step: shape mismatch");
  auto h = state.h.leftCols(n);
  if (cache) cache->h_prev = h;
  switch (p.kind()) {
    case CellKind::rnn: {
      Matrix<Scalar> pre = p.W() * x + p.U() * h;
      pre.colwise() += p.b();
      h = pre.array().tanh().matrix();
      if (cache) cache->gates = h;
      break;
    }
    case CellKind::gru: {
      Matrix<Scalar> a = p.W() * x;
      a.colwise() += p.b();
      const Matrix<Scalar> uh = p.U() * h;
      Matrix<Scalar> gates(3 * H, n);
      auto z = gates.topRows(H);
      auto r = gates.middleRows(H, H);
      auto cand = gates.bottomRows(H);
      z = detail::sigmoid((a.topRows(H) + uh.topRows(H)).array()).matrix();
      r = detail::sigmoid((a.middleRows(H, H) + uh.middleRows(H, H)).array()).matrix();
      cand = (a.bottomRows(H).array() + r.array() * uh.bottomRows(H).array()).tanh().matrix();
      const Matrix<Scalar> next =
          ((Scalar(1) - z.array()) * cand.array() + z.array() * h.array()).matrix();
      h = next;
      if (cache) {
        cache->aux = uh.bottomRows(H);
        cache->gates = std::move(gates);
      }
      break;
    }
    case CellKind::lstm: {
      if (state.c.rows() != H || state.c.cols() < n) throw ContractViolation("lstm step: missing cell state");
      auto c = state.c.leftCols(n);
      if (cache) cache->c_prev = c;
      Matrix<Scalar> pre = p.W() * x + p.U() * h;
      pre.colwise() += p.b();
      Matrix<Scalar> gates(4 * H, n);
      gates.topRows(2 * H) = detail::sigmoid(pre.topRows(2 * H).array()).matrix();
      gates.middleRows(2 * H, H) = pre.middleRows(2 * H, H).array().tanh().matrix();
      gates.bottomRows(H) = detail::sigmoid(pre.bottomRows(H).array()).matrix();
      const auto i = gates.topRows(H).array();
      const auto f = gates.middleRows(H, H).array();
      const auto g = gates.middleRows(2 * H, H).array();
      const auto o = gates.bottomRows(H).array();
      c = (f * c.array() + i * g).matrix();
      Matrix<Scalar> tc = c.array().tanh().matrix();
      h = (o * tc.array()).matrix();
      if (cache) {
        cache->aux = std::move(tc);
        cache->gates = std::move(gates);
      }
      break;
    }
  }
}

template <typename Scalar>
CellState<Scalar> zero_state(const ModelParams<Scalar>& p, Eigen::Index columns) {
  CellState<Scalar> s;
  s.h = Matrix<Scalar>::Zero(p.hidden_size(), columns);
  if (p.kind() == CellKind::lstm) s.c = Matrix<Scalar>::Zero(p.hidden_size(), columns);
  return s;
}

// One step on a single input vector.
template <typename Scalar>
CellState<Scalar> cell_step(const Vector<Scalar>& x, CellState<Scalar> state, const ModelParams<Scalar>& p) {
  Matrix<Scalar> xm = x;
  step_forward<Scalar>(p, xm, state, nullptr);
  return state;
}

template <typename Scalar>
struct ForwardCache {
  std::vector<StepCache<Scalar>> steps;
  Matrix<Scalar> h_final;    // H x B
  Matrix<Scalar> log_probs;  // 2 x B
};

// Column-wise log-softmax of head(h).
template <typename Scalar>
Matrix<Scalar> head_log_probs(const ModelParams<Scalar>& p, const Matrix<Scalar>& h) {
  Matrix<Scalar> logits = p.V() * h;
  logits.colwise() += p.c();
  const Eigen::Array<Scalar, 1, Eigen::Dynamic> m = logits.colwise().maxCoeff().array();
  const Eigen::Array<Scalar, 1, Eigen::Dynamic> lse =
      m + (logits.array().rowwise() - m).exp().colwise().sum().log();
  return (logits.array().rowwise() - lse).matrix();
}

// Log-probabilities (rows: not_confused, confused) per batch column.
template <typename Scalar>
Matrix<Scalar> forward_batch(const ModelParams<Scalar>& p, const SequenceBatch<Scalar>& batch,
                             ForwardCache<Scalar>* cache = nullptr) {
  if (batch.columns() == 0) throw ContractViolation("forward: empty batch");
  auto state = zero_state(p, batch.columns());
  if (cache) cache->steps.assign(batch.steps.size(), {});
  for (std::size_t t = 0; t < batch.steps.size(); ++t)
    step_forward(p, batch.steps[t], state, cache ? &cache->steps[t] : nullptr);
  Matrix<Scalar> log_probs = head_log_probs(p, state.h);
  if (cache) {
    cache->h_final = state.h;
    cache->log_probs = log_probs;
  }
  return log_probs;
}

template <typename Scalar>
struct ItemForward {
  Vector<Scalar> log_probs;
  ForwardCache<Scalar> cache;
  SequenceBatch<Scalar> batch;
};

template <typename Scalar>
ItemForward<Scalar> forward(const WindowedItem& item, const ModelParams<Scalar>& p) {
  ItemForward<Scalar> out;
  out.batch = make_batch<Scalar>(std::vector<const WindowedItem*>{&item});
  out.log_probs = forward_batch(p, out.batch, &out.cache).col(0);
  return out;
}

// Mean negative log likelihood of the labelled class.
template <typename Scalar>
Scalar nll_loss(const Matrix<Scalar>& log_probs, const std::vector<int>& labels) {
  if (labels.empty() || static_cast<Eigen::Index>(labels.size()) != log_probs.cols())
    throw ContractViolation("nll_loss: label count mismatch");
  Scalar total = 0;
  for (std::size_t j = 0; j < labels.size(); ++j)
    total -= log_probs(labels[j], static_cast<Eigen::Index>(j));
  return total / static_cast<Scalar>(labels.size());
}

// Exact gradient of nll_loss (mean over the batch) for the forward pass
// recorded in `cache`.
template <typename Scalar>
ModelParams<Scalar> backward(const ModelParams<Scalar>& p, const SequenceBatch<Scalar>& batch,
                             const ForwardCache<Scalar>& cache) {
  const Eigen::Index H = p.hidden_size();
  const Eigen::Index B = batch.columns();
  ModelParams<Scalar> grad = p.zeros_like();
  auto gW = grad.W();
  auto gU = grad.U();
  auto gb = grad.b();

  Matrix<Scalar> dlogits = cache.log_probs.array().exp().matrix();
  for (Eigen::Index j = 0; j < B; ++j) dlogits(batch.labels[static_cast<std::size_t>(j)], j) -= Scalar(1);
  dlogits /= static_cast<Scalar>(B);
  grad.V().noalias() = dlogits * cache.h_final.transpose();
  grad.c() = dlogits.rowwise().sum();

  Matrix<Scalar> dH = p.V().transpose() * dlogits;
  Matrix<Scalar> dC;
  if (p.kind() == CellKind::lstm) dC = Matrix<Scalar>::Zero(H, B);

  for (std::size_t t = batch.steps.size(); t-- > 0;) {
    const auto& sc = cache.steps[t];
    const auto& x = batch.steps[t];
    const Eigen::Index n = x.cols();
    auto dh = dH.leftCols(n);
    switch (p.kind()) {
      case CellKind::rnn: {
        const Matrix<Scalar> dpre = (dh.array() * (Scalar(1) - sc.gates.array().square())).matrix();
        gW.noalias() += dpre * x.transpose();
        gU.noalias() += dpre * sc.h_prev.transpose();
        gb += dpre.rowwise().sum();
        dh = p.U().transpose() * dpre;
        break;
      }
      case CellKind::gru: {
        const auto z = sc.gates.topRows(H).array();
        const auto r = sc.gates.middleRows(H, H).array();
        const auto cand = sc.gates.bottomRows(H).array();
        Matrix<Scalar> dA(3 * H, n);
        dA.topRows(H) = (dh.array() * (sc.h_prev.array() - cand) * z * (Scalar(1) - z)).matrix();
        dA.bottomRows(H) = (dh.array() * (Scalar(1) - z) * (Scalar(1) - cand.square())).matrix();
        dA.middleRows(H, H) = (dA.bottomRows(H).array() * sc.aux.array() * r * (Scalar(1) - r)).matrix();
        Matrix<Scalar> dUh = dA;
        dUh.bottomRows(H) = (dA.bottomRows(H).array() * r).matrix();
        gW.noalias() += dA * x.transpose();
        gb += dA.rowwise().sum();
        gU.noalias() += dUh * sc.h_prev.transpose();
        Matrix<Scalar> carried = (dh.array() * z).matrix();
        carried.noalias() += p.U().transpose() * dUh;
        dh = carried;
        break;
      }
      case CellKind::lstm: {
        const auto i = sc.gates.topRows(H).array();
        const auto f = sc.gates.middleRows(H, H).array();
        const auto g = sc.gates.middleRows(2 * H, H).array();
        const auto o = sc.gates.bottomRows(H).array();
        const auto tc = sc.aux.array();
        auto dc_state = dC.leftCols(n);
        const Matrix<Scalar> dc = (dc_state.array() + dh.array() * o * (Scalar(1) - tc.square())).matrix();
        Matrix<Scalar> dpre(4 * H, n);
        dpre.topRows(H) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
        dpre.middleRows(H, H) = (dc.array() * sc.c_prev.array() * f * (Scalar(1) - f)).matrix();
        dpre.middleRows(2 * H, H) = (dc.array() * i * (Scalar(1) - g.square())).matrix();
        dpre.bottomRows(H) = (dh.array() * tc * o * (Scalar(1) - o)).matrix();
        gW.noalias() += dpre * x.transpose();
        gU.noalias() += dpre * sc.h_prev.transpose();
        gb += dpre.rowwise().sum();
        dh = p.U().transpose() * dpre;
        dc_state = (dc.array() * f).matrix();
        break;
      }
    }
  }
  return grad;
}

// Loss and gradient of a batch in one call.
template <typename Scalar>
Scalar loss_and_gradient(const ModelParams<Scalar>& p, const SequenceBatch<Scalar>& batch,
                         ModelParams<Scalar>& grad) {
  ForwardCache<Scalar> cache;
  forward_batch(p, batch, &cache);
  grad = backward(p, batch, cache);
  return nll_loss(cache.log_probs, batch.labels);
}

// P(confused) per item, in input order.
template <typename Scalar>
std::vector<double> predict_confused(const ModelParams<Scalar>& p, const std::vector<const WindowedItem*>& items,
                                     std::size_t chunk = 256) {
  std::vector<double> scores(items.size());
  for (std::size_t start = 0; start < items.size(); start += chunk) {
    const auto end = std::min(items.size(), start + chunk);
    std::vector<const WindowedItem*> part(items.begin() + static_cast<std::ptrdiff_t>(start),
                                          items.begin() + static_cast<std::ptrdiff_t>(end));
    const auto batch = make_batch<Scalar>(part);
    const Matrix<Scalar> lp = forward_batch(p, batch);
    for (Eigen::Index j = 0; j < batch.columns(); ++j)
      scores[start + batch.order[static_cast<std::size_t>(j)]] = std::exp(static_cast<double>(lp(1, j)));
  }
  return scores;
}

}  // namespace gazeconf::nn
