#include "selftrain/theory.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace selftrain {

namespace {
constexpr double pi = 3.14159265358979323846;
}

SpectrumParams spectrum_of(const Eigen::MatrixXd& W) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    const Eigen::VectorXd s = svd.singularValues();
    SpectrumParams out;
    out.K = static_cast<int>(W.cols());
    out.d = static_cast<int>(W.rows());
    const double sK = s(s.size() - 1);
    if (!(sK > 0.0)) throw std::invalid_argument("spectrum_of: rank-deficient weight matrix");
    out.sigma_K = sK;
    out.kappa = s(0) / sK;
    double gamma = 1.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) gamma *= s(i) / sK;
    out.gamma = gamma;
    return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite_rule(int nodes) {
    if (nodes < 1) throw std::invalid_argument("gauss_hermite_rule: nodes >= 1");
    // Golub-Welsch on the Jacobi matrix of the Hermite recurrence.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nodes, nodes);
    for (int i = 1; i < nodes; ++i) {
        const double b = std::sqrt(i / 2.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Eigen::VectorXd x = es.eigenvalues();
    Eigen::VectorXd w(nodes);
    const double mu0 = std::sqrt(pi);  // integral of e^{-t^2}
    for (int i = 0; i < nodes; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        w(i) = mu0 * v0 * v0;
    }
    return {x, w};
}

namespace {

double quad_moment(int r, double delta, double sigma_K, Activation act, int nodes,
                   bool squared) {
    auto [x, w] = gauss_hermite_rule(nodes);
    // z = sqrt(2) delta t maps e^{-t^2} onto the N(0, delta^2) density
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double z = std::sqrt(2.0) * delta * x(i);
        double f = activation_derivative(act, sigma_K * z);
        if (squared) f *= f;
        acc += w(i) * f * std::pow(z, r);
    }
    return acc / std::sqrt(pi);
}

void check_moment_args(int r, double delta, double sigma_K) {
    if (r < 0 || r > 2) throw std::invalid_argument("moment: r must be 0, 1 or 2");
    if (!(delta > 0.0)) throw std::invalid_argument("moment: delta must be > 0");
    if (!(sigma_K > 0.0)) throw std::invalid_argument("moment: sigma_K must be > 0");
}

}  // namespace

double moment_H_gauss_hermite(int r, double delta, double sigma_K, Activation act, int nodes) {
    check_moment_args(r, delta, sigma_K);
    return quad_moment(r, delta, sigma_K, act, nodes, false);
}

double moment_J_gauss_hermite(int r, double delta, double sigma_K, Activation act, int nodes) {
    check_moment_args(r, delta, sigma_K);
    return quad_moment(r, delta, sigma_K, act, nodes, true);
}

double moment_H(int r, double delta, double sigma_K, Activation act, int nodes) {
    check_moment_args(r, delta, sigma_K);
    if (act == Activation::ReLU) {
        // phi'(sigma_K z) = 1{z > 0}: half-Gaussian moments, scale-invariant in sigma_K
        switch (r) {
            case 0: return 0.5;
            case 1: return delta / std::sqrt(2.0 * pi);
            default: return delta * delta / 2.0;
        }
    }
    return moment_H_gauss_hermite(r, delta, sigma_K, act, nodes);
}

double moment_J(int r, double delta, double sigma_K, Activation act, int nodes) {
    check_moment_args(r, delta, sigma_K);
    if (act == Activation::ReLU) return moment_H(r, delta, sigma_K, act, nodes);
    return moment_J_gauss_hermite(r, delta, sigma_K, act, nodes);
}

double rho(double delta, double sigma_K, Activation act) {
    const double H0 = moment_H(0, delta, sigma_K, act);
    const double H1 = moment_H(1, delta, sigma_K, act);
    const double H2 = moment_H(2, delta, sigma_K, act);
    const double J0 = moment_J(0, delta, sigma_K, act);
    const double J2 = moment_J(2, delta, sigma_K, act);
    return std::min({J0 - H0 * H0 - H1 * H1, J2 - H1 * H1 - H2 * H2, H0 * H2 - H1 * H1});
}

double lambda_hat(double lambda, double delta, double delta_tilde) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("lambda_hat: lambda in [0,1]");
    const double num = lambda * delta * delta;
    const double den = num + (1.0 - lambda) * delta_tilde * delta_tilde;
    if (den <= 0.0) throw std::domain_error("lambda_hat: both weighted variances are zero");
    return num / den;
}

double mu(double delta, double delta_tilde, double lambda, Activation act, double sigma_K) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("mu: lambda in [0,1]");
    const double num = lambda * delta * delta + (1.0 - lambda) * delta_tilde * delta_tilde;
    const double den = lambda * rho(delta, sigma_K, act) +
                       (1.0 - lambda) * rho(delta_tilde, sigma_K, act);
    if (den <= 0.0)
        throw std::domain_error("mu: curvature constant is non-positive for this activation");
    return std::sqrt(num / den);
}

std::pair<double, double> hessian_bounds(double lambda, double delta, double delta_tilde,
                                         const SpectrumParams& spectrum, Activation act) {
    if (!(spectrum.kappa >= 1.0 && spectrum.gamma >= 1.0 && spectrum.sigma_K > 0.0))
        throw std::invalid_argument("hessian_bounds: invalid spectrum");
    const double K = static_cast<double>(spectrum.K);
    const double rho_mix = lambda * rho(delta, spectrum.sigma_K, act) +
                           (1.0 - lambda) * rho(delta_tilde, spectrum.sigma_K, act);
    const double var_mix =
        lambda * delta * delta + (1.0 - lambda) * delta_tilde * delta_tilde;
    const double gamma_min =
        rho_mix / (12.0 * spectrum.kappa * spectrum.kappa * spectrum.gamma * K * K);
    const double gamma_max = 7.0 * var_mix / K;
    return {gamma_min, gamma_max};
}

double sample_complexity_Nstar(double mu_star, int K, int d, double kappa_poly, double log_q) {
    if (!(mu_star > 0.0 && K >= 1 && d >= 1 && kappa_poly > 0.0 && log_q > 0.0))
        throw std::invalid_argument("sample_complexity_Nstar: all inputs must be positive");
    const double Kd = static_cast<double>(K);
    return kappa_poly * mu_star * mu_star * Kd * Kd * Kd * static_cast<double>(d) * log_q;
}

double predicted_outer_factor(double mu, int K, double lambda_hat, double M, double N,
                              double kappa_const) {
    if (!(M >= 1.0 && N >= 1.0))
        throw std::invalid_argument("predicted_outer_factor: M, N >= 1");
    return (1.0 + kappa_const * lambda_hat / std::sqrt(N) +
            kappa_const * (1.0 - lambda_hat) / std::sqrt(M)) *
           mu * std::sqrt(static_cast<double>(K)) * (1.0 - lambda_hat);
}

TheoryBundle make_theory_bundle(double lambda, double delta, double delta_tilde,
                                const SpectrumParams& spectrum, double N, double M,
                                double kappa_poly, double log_q, Activation act) {
    TheoryBundle b;
    for (int r = 0; r <= 2; ++r) {
        b.H[r] = moment_H(r, delta, spectrum.sigma_K, act);
        b.J[r] = moment_J(r, delta, spectrum.sigma_K, act);
    }
    b.rho = rho(delta, spectrum.sigma_K, act);
    b.mu = mu(delta, delta_tilde, lambda, act, spectrum.sigma_K);
    b.lambda_hat = selftrain::lambda_hat(lambda, delta, delta_tilde);
    std::tie(b.gamma_min, b.gamma_max) =
        hessian_bounds(lambda, delta, delta_tilde, spectrum, act);
    const double mu_star = mu(std::min(delta, 1.0), std::min(delta_tilde, 1.0), lambda, act,
                              spectrum.sigma_K);
    b.N_star = sample_complexity_Nstar(mu_star, spectrum.K, spectrum.d, kappa_poly, log_q);
    b.predicted_outer_rate = predicted_outer_factor(b.mu, spectrum.K, b.lambda_hat,
                                                    std::max(M, 1.0), std::max(N, 1.0), 1.0);
    return b;
}

}  // namespace selftrain
