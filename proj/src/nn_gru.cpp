#include "evbat/nn/gru.hpp"

#include <stdexcept>

namespace evbat::nn {

Gru::Gru(const std::string& name, int in_size, int hidden, std::mt19937_64& rng)
    : w_in(name + ".w_in", 3 * hidden, in_size),
      w_hid(name + ".w_hid", 3 * hidden, hidden),
      b_in(name + ".b_in", 3 * hidden, 1),
      b_hid(name + ".b_hid", 3 * hidden, 1),
      input_size(in_size),
      hidden_size(hidden) {
  init_glorot(w_in, rng);
  init_glorot(w_hid, rng);
}

const Eigen::MatrixXd& Gru::forward(const std::vector<Eigen::MatrixXd>& x_seq,
                                    Cache& cache) const {
  if (x_seq.empty()) {
    throw std::invalid_argument("Gru " + w_in.name + ": empty sequence");
  }
  const Eigen::Index batch = x_seq.front().cols();
  const int H = hidden_size;
  const std::size_t steps = x_seq.size();

  cache.inputs = &x_seq;
  cache.h.assign(steps + 1, Eigen::MatrixXd());
  cache.z.assign(steps, Eigen::MatrixXd());
  cache.r.assign(steps, Eigen::MatrixXd());
  cache.n.assign(steps, Eigen::MatrixXd());
  cache.hn.assign(steps, Eigen::MatrixXd());
  cache.h[0] = Eigen::MatrixXd::Zero(H, batch);

  Eigen::MatrixXd gates_x(3 * H, batch);
  Eigen::MatrixXd gates_h(3 * H, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    const Eigen::MatrixXd& x_t = x_seq[t];
    if (x_t.rows() != input_size || x_t.cols() != batch) {
      throw std::invalid_argument("Gru " + w_in.name + ": shape mismatch at step " +
                                  std::to_string(t));
    }
    const Eigen::MatrixXd& h_prev = cache.h[t];
    gates_x.noalias() = w_in.value * x_t;
    gates_x.colwise() += b_in.value.col(0);
    gates_h.noalias() = w_hid.value * h_prev;
    gates_h.colwise() += b_hid.value.col(0);

    cache.z[t] = (1.0 / (1.0 + (-(gates_x.topRows(H) + gates_h.topRows(H))).array().exp())).matrix();
    cache.r[t] = (1.0 / (1.0 + (-(gates_x.middleRows(H, H) + gates_h.middleRows(H, H))).array().exp())).matrix();
    cache.hn[t] = gates_h.bottomRows(H);
    cache.n[t] = (gates_x.bottomRows(H).array() +
                  cache.r[t].array() * cache.hn[t].array())
                     .tanh()
                     .matrix();
    cache.h[t + 1] = ((1.0 - cache.z[t].array()) * cache.n[t].array() +
                      cache.z[t].array() * h_prev.array())
                         .matrix();
    if (!cache.h[t + 1].allFinite()) {
      throw std::runtime_error("Gru " + w_in.name + ": non-finite state at step " +
                               std::to_string(t));
    }
  }
  return cache.h.back();
}

Eigen::MatrixXd Gru::step(const Eigen::MatrixXd& x_t,
                          const Eigen::MatrixXd& h_prev) const {
  const int H = hidden_size;
  Eigen::MatrixXd gates_x = w_in.value * x_t;
  gates_x.colwise() += b_in.value.col(0);
  Eigen::MatrixXd gates_h = w_hid.value * h_prev;
  gates_h.colwise() += b_hid.value.col(0);
  const Eigen::ArrayXXd z =
      1.0 / (1.0 + (-(gates_x.topRows(H) + gates_h.topRows(H))).array().exp());
  const Eigen::ArrayXXd r =
      1.0 /
      (1.0 + (-(gates_x.middleRows(H, H) + gates_h.middleRows(H, H))).array().exp());
  const Eigen::ArrayXXd n =
      (gates_x.bottomRows(H).array() + r * gates_h.bottomRows(H).array()).tanh();
  Eigen::MatrixXd h = ((1.0 - z) * n + z * h_prev.array()).matrix();
  if (!h.allFinite()) {
    throw std::runtime_error("Gru " + w_in.name + ": non-finite state");
  }
  return h;
}

std::vector<Eigen::MatrixXd> Gru::backward(
    const Cache& cache, const std::vector<Eigen::MatrixXd>& dh_seq) {
  if (cache.inputs == nullptr) {
    throw std::logic_error("Gru backward without forward");
  }
  const std::vector<Eigen::MatrixXd>& x_seq = *cache.inputs;
  const std::size_t steps = x_seq.size();
  if (dh_seq.size() != steps) {
    throw std::invalid_argument("Gru backward: dh_seq length mismatch");
  }
  const int H = hidden_size;
  const Eigen::Index batch = x_seq.front().cols();

  std::vector<Eigen::MatrixXd> dx(steps);
  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(H, batch);
  Eigen::MatrixXd dgates_x(3 * H, batch);
  Eigen::MatrixXd dgates_h(3 * H, batch);

  for (std::size_t ti = steps; ti-- > 0;) {
    if (dh_seq[ti].size() > 0) {
      dh += dh_seq[ti];
    }
    const auto z = cache.z[ti].array();
    const auto r = cache.r[ti].array();
    const auto n = cache.n[ti].array();
    const auto hn = cache.hn[ti].array();
    const auto h_prev = cache.h[ti];

    const Eigen::ArrayXXd dn_pre =
        dh.array() * (1.0 - z) * (1.0 - n.square());
    const Eigen::ArrayXXd dz_pre =
        dh.array() * (h_prev.array() - n) * z * (1.0 - z);
    const Eigen::ArrayXXd dr_pre = dn_pre * hn * r * (1.0 - r);
    const Eigen::ArrayXXd dhn = dn_pre * r;

    dgates_x.topRows(H) = dz_pre.matrix();
    dgates_x.middleRows(H, H) = dr_pre.matrix();
    dgates_x.bottomRows(H) = dn_pre.matrix();
    dgates_h.topRows(H) = dz_pre.matrix();
    dgates_h.middleRows(H, H) = dr_pre.matrix();
    dgates_h.bottomRows(H) = dhn.matrix();

    w_in.grad.noalias() += dgates_x * x_seq[ti].transpose();
    b_in.grad.col(0) += dgates_x.rowwise().sum();
    w_hid.grad.noalias() += dgates_h * h_prev.transpose();
    b_hid.grad.col(0) += dgates_h.rowwise().sum();

    dx[ti].noalias() = w_in.value.transpose() * dgates_x;
    Eigen::MatrixXd dh_prev = (dh.array() * z).matrix();
    dh_prev.noalias() += w_hid.value.transpose() * dgates_h;
    dh = std::move(dh_prev);
  }
  return dx;
}

std::vector<Eigen::MatrixXd> Gru::backward_from_last(
    const Cache& cache, const Eigen::MatrixXd& dh_last) {
  std::vector<Eigen::MatrixXd> dh_seq(cache.z.size());
  dh_seq.back() = dh_last;
  return backward(cache, dh_seq);
}

}  // namespace evbat::nn
