#pragma once

#include "evbat/normalize.hpp"
#include "evbat/snippet.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace evbat {

/// Per-timestep (channels x batch) matrices of normalized values for the
/// chosen channels, one matrix per snippet row.
std::vector<Eigen::MatrixXd> sequence_batch(
    std::span<const ChargingSnippet* const> snippets,
    std::span<const int> channels, const NormStats& stats);

/// Normalized values flattened to one (len * channels) column per snippet,
/// timestep-major.
Eigen::MatrixXd flattened_batch(std::span<const ChargingSnippet* const> snippets,
                                std::span<const int> channels,
                                const NormStats& stats);

/// All snippets of the given vehicles, in vehicle order.
std::vector<const ChargingSnippet*> collect_snippets(
    std::span<const Vehicle* const> vehicles);

}  // namespace evbat
