#pragma once

#include <map>
#include <utility>

#include <Eigen/Core>

#include "selftrain/activation.hpp"

namespace selftrain {

// Singular-value summary of a weight matrix: sigma_K the smallest singular
// value, kappa = sigma_1/sigma_K, gamma = prod_i sigma_i/sigma_K.
struct SpectrumParams {
    double sigma_K = 1.0;
    double kappa = 1.0;
    double gamma = 1.0;
    int K = 1;
    int d = 1;
};

SpectrumParams spectrum_of(const Eigen::MatrixXd& W);

// H_r(delta) = E_{z~N(0,delta^2)} [ phi'(sigma_K z) z^r ].  ReLU uses closed
// half-Gaussian moments (H0 = 1/2, H1 = delta/sqrt(2pi), H2 = delta^2/2,
// independent of sigma_K); other activations go through Gauss-Hermite
// quadrature with `nodes` points.
double moment_H(int r, double delta, double sigma_K, Activation act, int nodes = 200);

// J_r(delta) = E [ phi'^2(sigma_K z) z^r ]; equals H_r exactly for ReLU.
double moment_J(int r, double delta, double sigma_K, Activation act, int nodes = 200);

// Plain Gauss-Hermite evaluation of H_r / J_r regardless of activation.
// For ReLU the integrand is discontinuous and the H1/J1 values carry O(1e-3)
// error at 200 nodes; the closed forms above are exact.
double moment_H_gauss_hermite(int r, double delta, double sigma_K, Activation act,
                              int nodes = 200);
double moment_J_gauss_hermite(int r, double delta, double sigma_K, Activation act,
                              int nodes = 200);

// Physicists' Gauss-Hermite rule (weight e^{-t^2}) by Golub-Welsch.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite_rule(int nodes);

// rho(delta) = min{ J0 - H0^2 - H1^2, J2 - H1^2 - H2^2, H0 H2 - H1^2 }.
double rho(double delta, double sigma_K, Activation act);

// lambda_hat = lambda delta^2 / (lambda delta^2 + lambda_tilde delta_tilde^2)
double lambda_hat(double lambda, double delta, double delta_tilde);

// mu = sqrt( (lambda delta^2 + lt dt^2) / (lambda rho(delta) + lt rho(dt)) )
double mu(double delta, double delta_tilde, double lambda,
          Activation act = Activation::ReLU, double sigma_K = 1.0);

// Hessian spectrum bounds:
//   gamma_min = (lambda rho(delta) + lt rho(dt)) / (12 kappa^2 gamma K^2)
//   gamma_max = 7 (lambda delta^2 + lt dt^2) / K
std::pair<double, double> hessian_bounds(double lambda, double delta, double delta_tilde,
                                         const SpectrumParams& spectrum,
                                         Activation act = Activation::ReLU);

// N* = kappa_poly * mu_star^2 * K^3 * d * log_q
double sample_complexity_Nstar(double mu_star, int K, int d, double kappa_poly, double log_q);

// Per-outer-loop contraction factor
//   (1 + c lambda_hat / sqrt(N) + c (1 - lambda_hat) / sqrt(M)) * mu sqrt(K) (1 - lambda_hat)
double predicted_outer_factor(double mu, int K, double lambda_hat, double M, double N,
                              double kappa_const);

struct TheoryBundle {
    std::map<int, double> H;
    std::map<int, double> J;
    double rho = 0.0;
    double mu = 0.0;
    double lambda_hat = 0.0;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double N_star = 0.0;
    double predicted_outer_rate = 0.0;
};

TheoryBundle make_theory_bundle(double lambda, double delta, double delta_tilde,
                                const SpectrumParams& spectrum, double N, double M,
                                double kappa_poly = 1.0, double log_q = 1.0,
                                Activation act = Activation::ReLU);

}  // namespace selftrain
