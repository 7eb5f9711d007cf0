#pragma once

#include <Eigen/Core>

#include "selftrain/activation.hpp"
#include "selftrain/rng.hpp"
#include "selftrain/synth.hpp"
#include "selftrain/tensor3.hpp"

// Data-parallel sample loops. The production kernels are OpenMP-parallel over
// fixed-size sample blocks with an ordered block reduction, so the result is
// bitwise identical for any thread count. A straightforward serial
// implementation of each kernel lives in kernels::serial and is kept as the
// reference for tests and the benchmark.
namespace selftrain::kernels {

inline constexpr Eigen::Index block_size = 1024;

// out(n) = (1/K) sum_j phi(w_j' x_n)
Eigen::VectorXd forward_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                              Activation act);

// sum_n (g(W;x_n) - y_n)^2
double residual_sq_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& W, Activation act);

// column k: sum_n (g(W;x_n) - y_n) * phi'(w_k' x_n) * x_n   (unscaled)
Eigen::MatrixXd residual_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& W, Activation act);

// mean over n draws x ~ N(0, std^2 I) of (g(Wa;x) - g(Wb;x))^2; the per-block
// generator derivation makes serial and parallel runs bitwise identical.
double mc_sq_diff_mean(const Eigen::MatrixXd& Wa, const Eigen::MatrixXd& Wb,
                       Activation act, const GaussianSpec& spec, Eigen::Index n,
                       RngSeed seed, std::string_view purpose);

// sum_n y_n x_n
Eigen::VectorXd weighted_input_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// sum_n y_n (x_n x_n' - delta^2 I)
Eigen::MatrixXd weighted_cov_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 double delta);

// Third-Hermite projected moment: sum_n y_n [ p^3 - delta^2 (p ot~ I) ] over
// rows p of P. (v ot~ I)_{abc} = v_a d_{bc} + v_b d_{ac} + v_c d_{ab}.
Tensor3 projected_third_moment_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                                   double delta);

// Fourth-Hermite contraction against direction a: with s = a'p,
// sum_n y_n [ s p^3 - delta^2 ( s (p ot~ I) + sym(a,p,p) ) + delta^4 (a ot~ I) ].
// Carries the neuron directions for activations whose third-Hermite
// coefficient vanishes (ReLU).
Tensor3 direction_tensor_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& a, double delta);

namespace serial {

Eigen::VectorXd forward_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                              Activation act);
double residual_sq_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& W, Activation act);
Eigen::MatrixXd residual_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& W, Activation act);
double mc_sq_diff_mean(const Eigen::MatrixXd& Wa, const Eigen::MatrixXd& Wb,
                       Activation act, const GaussianSpec& spec, Eigen::Index n,
                       RngSeed seed, std::string_view purpose);
Eigen::VectorXd weighted_input_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
Eigen::MatrixXd weighted_cov_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 double delta);
Tensor3 projected_third_moment_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                                   double delta);
Tensor3 direction_tensor_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& a, double delta);

}  // namespace serial

}  // namespace selftrain::kernels
