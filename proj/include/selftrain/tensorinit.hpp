#pragma once

#include <vector>

#include <Eigen/Core>

#include "selftrain/activation.hpp"
#include "selftrain/rng.hpp"
#include "selftrain/synth.hpp"
#include "selftrain/tensor3.hpp"

namespace selftrain {

struct MomentEstimates {
    Eigen::VectorXd m1;      // length d
    Eigen::MatrixXd m2;      // d x d, exactly symmetrized
    Tensor3 m3_projected;    // K x K x K, symmetric direction tensor
    double delta = 1.0;
};

struct Subspace {
    Eigen::MatrixXd basis;  // d x K, orthonormal columns
};

struct DecompResult {
    std::vector<Eigen::VectorXd> unit_vectors;  // in R^K
    std::vector<double> magnitudes;             // |alpha_1,j|
    std::vector<int> signs;                     // sign(alpha_1,j / alpha_2,j)
};

// Per-output-unit moment scales for y = (1/K) sum phi(w'x), x ~ N(0,delta^2 I):
//   M1 = sum_j psi1 |w_j| wbar_j,   M2 = sum_j psi2 |w_j| wbar_j wbar_j'.
// ReLU: psi1 = delta^2/(2K), psi2 = delta^3/(sqrt(2*pi) K), psi3 = 0 (the
// third-Hermite coefficient of ReLU vanishes, so the directions come from the
// fourth-Hermite contraction instead).
struct PsiConstants {
    double psi1 = 0.0;
    double psi2 = 0.0;
    double psi3 = 0.0;
};
PsiConstants psi_constants(Activation act, double delta, int K);

struct MomentOptions {
    int quality = 0;  // reserved
};

// Subroutine: M1 from D1, M2 from D2 (delta^2 I centering, symmetrized),
// subspace = top-K eigenvectors of M2 by absolute eigenvalue, direction
// tensor from D3 projected through the subspace.
std::pair<MomentEstimates, Subspace> estimate_moments(const LabeledSet& d1,
                                                      const LabeledSet& d2,
                                                      const LabeledSet& d3,
                                                      double delta, int K,
                                                      RngSeed seed);

struct PowerOptions {
    int n_restarts = 20;
    int n_iters = 100;
    double tol = 1e-10;
};

struct TensorEigenpair {
    Eigen::VectorXd vector;
    double value = 0.0;
};

// Robust tensor power method with deflation: K rounds, each picking the best
// of n_restarts random starts by |T(u,u,u)|, then deflating.
std::vector<TensorEigenpair> tensor_power_decompose(const Tensor3& tensor, int n_restarts,
                                                    int n_iters, double tol, RngSeed seed);
std::vector<TensorEigenpair> tensor_power_decompose(const Tensor3& tensor,
                                                    const PowerOptions& opts, RngSeed seed);

struct RecoveredWeights {
    Eigen::MatrixXd w0;        // d x K
    std::vector<int> signs;    // s_j = sign(alpha_1j / alpha_2j)
    double condition_number = 0.0;
};

// Candidate directions wbar_j = basis * u_j; two least-squares problems fit
// alpha_1 against M1 (scale psi1) and alpha_2 against M2 (scale psi2); output
// column j is sign(alpha_2j) alpha_1j wbar_j.
RecoveredWeights recover_weights(const Subspace& subspace,
                                 const std::vector<Eigen::VectorXd>& decomp_vectors,
                                 const Eigen::VectorXd& m1, const Eigen::MatrixXd& m2,
                                 double psi1, double psi2);

struct TensorInitDiagnostics {
    Eigen::Index n_used = 0;
    double subspace_residual = 0.0;       // |M2 - V L V'|_F / |M2|_F
    double decomposition_residual = 0.0;  // |T - sum v_j u_j^3|_F / |T|_F
    double condition_number = 0.0;        // of the direction design matrix
};

// Full pipeline: split the labeled set in three near-equal disjoint parts,
// estimate moments, decompose, recover magnitudes and signs.
Eigen::MatrixXd tensor_initialize(const LabeledSet& labeled, int K, RngSeed seed,
                                  const PowerOptions& opts = {},
                                  TensorInitDiagnostics* diagnostics = nullptr);

}  // namespace selftrain
