#include "evbat/batching.hpp"

namespace evbat {

std::vector<Eigen::MatrixXd> sequence_batch(
    std::span<const ChargingSnippet* const> snippets,
    std::span<const int> channels, const NormStats& stats) {
  const auto batch = static_cast<Eigen::Index>(snippets.size());
  const auto n_ch = static_cast<Eigen::Index>(channels.size());
  std::vector<Eigen::MatrixXd> seq(kSnippetLength);
  for (auto& m : seq) {
    m.resize(n_ch, batch);
  }
  for (Eigen::Index j = 0; j < batch; ++j) {
    const SeriesMatrix& series = snippets[j]->series();
    for (Eigen::Index c = 0; c < n_ch; ++c) {
      const int ch = channels[c];
      const double mean = stats.mean(ch);
      const double inv_std = 1.0 / stats.std_dev(ch);
      for (int t = 0; t < kSnippetLength; ++t) {
        seq[t](c, j) = (series(t, ch) - mean) * inv_std;
      }
    }
  }
  return seq;
}

Eigen::MatrixXd flattened_batch(std::span<const ChargingSnippet* const> snippets,
                                std::span<const int> channels,
                                const NormStats& stats) {
  const auto batch = static_cast<Eigen::Index>(snippets.size());
  const auto n_ch = static_cast<Eigen::Index>(channels.size());
  Eigen::MatrixXd out(kSnippetLength * n_ch, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const SeriesMatrix& series = snippets[j]->series();
    for (Eigen::Index c = 0; c < n_ch; ++c) {
      const int ch = channels[c];
      const double mean = stats.mean(ch);
      const double inv_std = 1.0 / stats.std_dev(ch);
      for (int t = 0; t < kSnippetLength; ++t) {
        out(static_cast<Eigen::Index>(t) * n_ch + c, j) =
            (series(t, ch) - mean) * inv_std;
      }
    }
  }
  return out;
}

std::vector<const ChargingSnippet*> collect_snippets(
    std::span<const Vehicle* const> vehicles) {
  std::vector<const ChargingSnippet*> out;
  for (const Vehicle* v : vehicles) {
    for (const ChargingSnippet& s : v->snippets) {
      out.push_back(&s);
    }
  }
  return out;
}

}  // namespace evbat
