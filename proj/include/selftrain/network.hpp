#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

#include "selftrain/activation.hpp"

namespace selftrain {

// One-hidden-layer network g(W;x) = (1/K) sum_j phi(w_j' x), top layer fixed
// to 1, no biases. Columns of `weights` are the neurons. Evaluation is pure.
struct NetworkModel {
    Eigen::MatrixXd weights;  // d x K
    Activation activation = Activation::ReLU;

    Eigen::Index input_dim() const { return weights.rows(); }
    Eigen::Index neuron_count() const { return weights.cols(); }
};

double forward(const NetworkModel& model, const Eigen::VectorXd& x);

// Row n of X is one input; exact composition of forward over rows.
Eigen::VectorXd forward_batch(const NetworkModel& model, const Eigen::MatrixXd& X);

// FNV-1a over dims and raw entry bytes; identifies the weights that produced
// a set of pseudo labels.
std::uint64_t weights_hash(const Eigen::MatrixXd& weights);

// CSV with header line `d,K,activation`, then d rows of K comma-separated
// decimals. 17 significant digits make the round trip bit-faithful.
void save_weights_csv(const std::filesystem::path& path, const NetworkModel& model);
NetworkModel load_weights_csv(const std::filesystem::path& path);

}  // namespace selftrain
