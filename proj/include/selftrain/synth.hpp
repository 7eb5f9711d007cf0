#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "selftrain/network.hpp"
#include "selftrain/rng.hpp"

namespace selftrain {

struct GaussianSpec {
    int dim = 0;
    double std = 1.0;  // delta for labeled, delta_tilde for unlabeled
};

struct LabeledSet {
    Eigen::MatrixXd inputs;  // N x d
    Eigen::VectorXd labels;  // N
    GaussianSpec spec;

    Eigen::Index size() const { return inputs.rows(); }
};

struct UnlabeledSet {
    Eigen::MatrixXd inputs;  // M x d
    GaussianSpec spec;

    Eigen::Index size() const { return inputs.rows(); }
};

struct PseudoLabeledSet {
    Eigen::MatrixXd inputs;        // M x d
    Eigen::VectorXd pseudo_labels;  // M
    std::uint64_t source_weights_hash = 0;

    Eigen::Index size() const { return inputs.rows(); }
};

// Entries i.i.d. uniform on [-half_range, half_range]; the synthetic protocol
// default is half_range = 2.5.
Eigen::MatrixXd sample_ground_truth(int d, int K, double half_range, RngSeed seed);

// i.i.d. rows ~ N(0, std^2 I_d). Draws standard normals and scales, so runs
// with different std share randomness under a common seed.
Eigen::MatrixXd sample_inputs(Eigen::Index n, const GaussianSpec& spec, RngSeed seed);

Eigen::VectorXd label_with(const NetworkModel& teacher, const Eigen::MatrixXd& inputs);

LabeledSet make_labeled_set(const NetworkModel& teacher, Eigen::Index n,
                            const GaussianSpec& spec, RngSeed seed);
UnlabeledSet make_unlabeled_set(Eigen::Index n, const GaussianSpec& spec, RngSeed seed);

PseudoLabeledSet pseudo_label(const NetworkModel& current, const UnlabeledSet& unlabeled);

// T disjoint index subsets, each of size floor(n/T); the n mod T leftover
// indices are unused. A random permutation chunked.
std::vector<std::vector<Eigen::Index>> partition_disjoint(Eigen::Index n, int T, RngSeed seed);

// CSV `x_1..x_d,y` (labeled) / `x_1..x_d` (unlabeled), sidecar JSON
// {d, std, n, seed} next to the data file.
void save_labeled_csv(const std::filesystem::path& path, const LabeledSet& set, RngSeed seed);
void save_unlabeled_csv(const std::filesystem::path& path, const UnlabeledSet& set, RngSeed seed);
LabeledSet load_labeled_csv(const std::filesystem::path& path);
UnlabeledSet load_unlabeled_csv(const std::filesystem::path& path);

}  // namespace selftrain
