#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "selftrain/risk.hpp"
#include "selftrain/synth.hpp"

namespace selftrain {

struct TrainConfig {
    double eta = 0.1;            // step size, > 0
    double beta = 0.0;           // heavy-ball momentum, in [0,1)
    int T = 10;                  // inner mini-batch steps per outer loop
    int L_max = 1000;            // max outer loops
    double rel_tol = 1e-4;       // outer relative-change stop
    RiskWeights weights{1.0};
    bool repartition_each_outer = true;
    RngSeed seed;

    void validate() const;
};

enum class StopReason { Converged, MaxIterations };

struct OuterRecord {
    double dist_to_wstar = std::numeric_limits<double>::quiet_NaN();
    double dist_to_wbar = std::numeric_limits<double>::quiet_NaN();
    double risk = 0.0;
    double rel_change = 0.0;
};

struct TrainTrace {
    std::vector<OuterRecord> outer;
    StopReason stop_reason = StopReason::MaxIterations;
    long total_inner_steps = 0;

    std::vector<double> distances_to_wstar() const;
};

struct TrainResult {
    Eigen::MatrixXd weights;
    TrainTrace trace;
};

// Optional reference points recorded in the trace: the ground truth and the
// convex-combination target lambda_hat W* + (1 - lambda_hat) W0.
struct TrainReferences {
    std::optional<Eigen::MatrixXd> w_star;
    std::optional<Eigen::MatrixXd> w_bar;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int outer, int inner);
    int outer_index;
    int inner_index;
};

struct BatchView {
    Eigen::Ref<const Eigen::MatrixXd> X;
    Eigen::Ref<const Eigen::VectorXd> y;
};

// T heavy-ball updates W <- W - eta * grad + beta (W - W_prev), batch t at
// step t; pseudo labels stay fixed for the whole inner loop. Returns the
// final two iterates so momentum can carry across outer loops.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> inner_loop(
    const Eigen::MatrixXd& W_start, const Eigen::MatrixXd& W_prev, Activation act,
    std::span<const BatchView> labeled_batches, std::span<const BatchView> pseudo_batches,
    const TrainConfig& cfg, int outer_index = 0);

// The outer pseudo-label loop: relabel all unlabeled data with the current
// iterate, partition both sets into T disjoint batches, run the inner loop,
// record the trace; stop on relative outer change <= rel_tol or L_max.
TrainResult self_train(const Eigen::MatrixXd& initial, Activation act,
                       const LabeledSet& labeled, const UnlabeledSet& unlabeled,
                       const TrainConfig& cfg, const TrainReferences& refs = {});

// min(1, sqrt(N / (2 K d)))
double default_lambda(Eigen::Index N, int K, int d);

// eta = (sqrt(gamma_max) + sqrt(gamma_min))^-2, beta = (1 - sqrt(eta gamma_min))^2
std::pair<double, double> theory_step_and_momentum(double gamma_min, double gamma_max);

// CSV `outer_iter,dist_to_wstar,dist_to_wbar,risk,rel_change`
void save_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);

}  // namespace selftrain
