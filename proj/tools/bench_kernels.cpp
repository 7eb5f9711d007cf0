// Compares the OpenMP kernels against the serial reference implementations:
// wall time for both variants plus the worst relative disagreement.
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "selftrain/kernels.hpp"

using namespace selftrain;
namespace chrono = std::chrono;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
    const auto t0 = chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = chrono::steady_clock::now();
    return chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max({a.norm(), b.norm(), 1e-300});
    return (a - b).norm() / scale;
}

void report(const char* name, Eigen::Index n, Eigen::Index d, Eigen::Index K,
            double serial_ms, double parallel_ms, double diff) {
    std::cout << name << ',' << n << ',' << d << ',' << K << ',' << serial_ms << ','
              << parallel_ms << ',' << serial_ms / parallel_ms << ',' << diff << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const Eigen::Index n = quick ? 4096 : 200000;
    const Eigen::Index d = 50;
    const Eigen::Index K = 10;
    const int reps = quick ? 2 : 5;

#ifdef _OPENMP
    std::cout << "# threads=" << omp_get_max_threads() << " n=" << n << "\n";
#endif
    std::cout << "kernel,n,d,K,serial_ms,parallel_ms,speedup,max_rel_diff\n";

    RngSeed seed{42, 0};
    auto eng = make_engine(seed, "bench");
    const Eigen::MatrixXd X = draw_standard_normal(eng, n, d);
    const Eigen::MatrixXd W = draw_standard_normal(eng, d, K);
    const Eigen::MatrixXd Wt = draw_standard_normal(eng, d, K);
    const Eigen::VectorXd y = kernels::serial::forward_batch(X.topRows(n), Wt, Activation::ReLU);

    {
        Eigen::VectorXd a, b;
        const double ts = time_ms([&] { a = kernels::serial::forward_batch(X, W, Activation::ReLU); }, reps);
        const double tp = time_ms([&] { b = kernels::forward_batch(X, W, Activation::ReLU); }, reps);
        report("forward_batch", n, d, K, ts, tp, rel_diff(a, b));
    }
    {
        Eigen::MatrixXd a, b;
        const double ts = time_ms([&] { a = kernels::serial::residual_gradient(X, y, W, Activation::ReLU); }, reps);
        const double tp = time_ms([&] { b = kernels::residual_gradient(X, y, W, Activation::ReLU); }, reps);
        report("residual_gradient", n, d, K, ts, tp, rel_diff(a, b));
    }
    {
        double a = 0, b = 0;
        const double ts = time_ms([&] { a = kernels::serial::residual_sq_sum(X, y, W, Activation::ReLU); }, reps);
        const double tp = time_ms([&] { b = kernels::residual_sq_sum(X, y, W, Activation::ReLU); }, reps);
        report("residual_sq_sum", n, d, K, ts, tp, rel_diff(a, b));
    }
    {
        double a = 0, b = 0;
        GaussianSpec spec{static_cast<int>(d), 1.0};
        const double ts = time_ms([&] { a = kernels::serial::mc_sq_diff_mean(W, Wt, Activation::ReLU, spec, n, seed, "bench-mc"); }, reps);
        const double tp = time_ms([&] { b = kernels::mc_sq_diff_mean(W, Wt, Activation::ReLU, spec, n, seed, "bench-mc"); }, reps);
        report("mc_sq_diff_mean", n, d, K, ts, tp, rel_diff(a, b));
    }
    {
        Eigen::MatrixXd a, b;
        const double ts = time_ms([&] { a = kernels::serial::weighted_cov_sum(X, y, 1.0); }, reps);
        const double tp = time_ms([&] { b = kernels::weighted_cov_sum(X, y, 1.0); }, reps);
        report("weighted_cov_sum", n, d, K, ts, tp, rel_diff(a, b));
    }
    {
        const Eigen::MatrixXd P = X.leftCols(K);
        Eigen::VectorXd dir = draw_standard_normal_vector(eng, K);
        dir.normalize();
        Tensor3 a, b;
        const double ts = time_ms([&] { a = kernels::serial::direction_tensor_sum(P, y, dir, 1.0); }, reps);
        const double tp = time_ms([&] { b = kernels::direction_tensor_sum(P, y, dir, 1.0); }, reps);
        Tensor3 diff = a;
        for (std::size_t i = 0; i < diff.data().size(); ++i) diff.data()[i] -= b.data()[i];
        const double dnorm = diff.frobenius_norm() / std::max(1e-300, a.frobenius_norm());
        report("direction_tensor_sum", n, d, K, ts, tp, dnorm);
    }
    return 0;
}
