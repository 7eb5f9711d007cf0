#pragma once

#include <vector>

#include <Eigen/Core>

#include "selftrain/network.hpp"
#include "selftrain/rng.hpp"
#include "selftrain/synth.hpp"

namespace selftrain {

// lambda + lambda_tilde = 1, enforced at construction.
class RiskWeights {
public:
    explicit RiskWeights(double lambda);

    double lambda() const { return lambda_; }
    double lambda_tilde() const { return 1.0 - lambda_; }

private:
    double lambda_;
};

struct McSpec {
    Eigen::Index n_samples = 1;
    RngSeed seed;
};

// lambda/(2N) sum (y_n - g(W;x_n))^2 + lambda_tilde/(2M) sum (y~_m - g(W;x~_m))^2
double empirical_risk(const NetworkModel& model, const LabeledSet& labeled,
                      const PseudoLabeledSet& pseudo, RiskWeights weights);

// Exact analytic gradient of empirical_risk (up to the ReLU kink convention):
// column k is lambda/(KN) sum (g-y) phi'(w_k'x) x + lambda_tilde/(KM) sum (...).
Eigen::MatrixXd empirical_gradient(const NetworkModel& model, const LabeledSet& labeled,
                                   const PseudoLabeledSet& pseudo, RiskWeights weights);

// Unbiased Monte-Carlo estimate of
//   (lambda/2) E_x (g(target;x)-g(W;x))^2 + (lambda_tilde/2) E_x~ (...).
// Deterministic per mc.seed regardless of thread count.
double population_risk_mc(const NetworkModel& model, const Eigen::MatrixXd& target,
                          const GaussianSpec& labeled_spec, const GaussianSpec& unlabeled_spec,
                          RiskWeights weights, const McSpec& mc);

// E[phi(a'x) phi(b'x)] for x ~ N(0, delta^2 I), ReLU:
//   (delta^2 |a||b| / 2pi) (sin t + (pi - t) cos t), t = angle(a,b).
double relu_gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double delta);

// Closed-form generalization function E (g(W*;x) - g(W;x))^2 for ReLU,
// x ~ N(0, delta^2 I); the symmetric double sum over the kernel above.
double generalization_fn_closed(const Eigen::MatrixXd& W, const Eigen::MatrixXd& W_star,
                                double delta);

enum class GfMethod { Closed, MonteCarlo };

struct GfScanRow {
    double distance = 0.0;
    double gf_normalized = 0.0;
    double gf_raw_mean = 0.0;
    double gf_raw_std = 0.0;
};

// For each radius r: average GF(W* + U) over random directions U with
// |U|_F = r |W*|_F, then normalize the mean column by its maximum.
std::vector<GfScanRow> gf_vs_distance_scan(const Eigen::MatrixXd& W_star,
                                           const std::vector<double>& radii,
                                           int trials_per_radius, double delta,
                                           GfMethod method, RngSeed seed,
                                           Eigen::Index mc_samples = 100000);

void save_gf_scan_csv(const std::filesystem::path& path, const std::vector<GfScanRow>& rows);

}  // namespace selftrain
