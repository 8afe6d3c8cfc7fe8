#pragma once

#include "evbat/nn/tensor.hpp"

#include <random>
#include <string>
#include <vector>

namespace evbat::nn {

/// Gated recurrent unit over (features x batch) step matrices, gates fused as
/// [update; reset; candidate] rows for single-GEMM steps:
///   z = sigmoid(Wz x + bz + Uz h + cz)
///   r = sigmoid(Wr x + br + Ur h + cr)
///   n = tanh(Wn x + bn + r .* (Un h + cn))
///   h' = (1 - z) .* n + z .* h
/// Backward-through-time accumulates exact gradients for the whole sequence.
class Gru {
 public:
  Gru(const std::string& name, int input_size, int hidden_size,
      std::mt19937_64& rng);

  struct Cache {
    std::vector<Eigen::MatrixXd> h;   // T+1 states, h[0] is the initial state
    std::vector<Eigen::MatrixXd> z, r, n;
    std::vector<Eigen::MatrixXd> hn;  // Un h + cn, pre reset gating
    const std::vector<Eigen::MatrixXd>* inputs = nullptr;
  };

  /// Runs the full sequence from a zero initial state; returns the final
  /// hidden state. Throws std::runtime_error if the state goes non-finite.
  const Eigen::MatrixXd& forward(const std::vector<Eigen::MatrixXd>& x_seq,
                                 Cache& cache) const;

  /// One step from an explicit previous state.
  Eigen::MatrixXd step(const Eigen::MatrixXd& x_t,
                       const Eigen::MatrixXd& h_prev) const;

  /// dh_seq[t] is dL/dh_t fed from above at step t (empty matrix = zero).
  /// Returns dL/dx_t for every step and accumulates parameter gradients.
  std::vector<Eigen::MatrixXd> backward(
      const Cache& cache, const std::vector<Eigen::MatrixXd>& dh_seq);

  /// Convenience for encoders: gradient arrives only at the final state.
  std::vector<Eigen::MatrixXd> backward_from_last(const Cache& cache,
                                                  const Eigen::MatrixXd& dh_last);

  TensorRefs params() { return {&w_in, &w_hid, &b_in, &b_hid}; }

  Tensor w_in;   // (3H x in)
  Tensor w_hid;  // (3H x H)
  Tensor b_in;   // (3H x 1)
  Tensor b_hid;  // (3H x 1)
  int input_size;
  int hidden_size;
};

}  // namespace evbat::nn
