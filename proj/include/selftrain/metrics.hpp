#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace selftrain {

struct AlignedDistance {
    double value = 0.0;
    std::vector<int> permutation;  // column j of A pairs with column perm[j] of B
};

// min over column permutations pi of sqrt(sum_j |a_j - b_pi(j)|^2), solved as
// a linear assignment problem on the squared-distance cost matrix.
AlignedDistance permutation_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// permutation_distance(W, W_star) / |W_star|_F
double relative_error(const Eigen::MatrixXd& W, const Eigen::MatrixXd& W_star);

// relative_error <= 1e-2
bool success(const Eigen::MatrixXd& W, const Eigen::MatrixXd& W_star);
inline constexpr double success_threshold = 1e-2;

struct FitResult {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares of y on x = 1/sqrt(M). R^2 defined as 1 when the
// total variance is 0.
FitResult fit_inverse_sqrt(const std::vector<std::pair<long, double>>& points);

struct RateEstimate {
    double rate = 0.0;
    int first = 0;  // window actually used, inclusive indices into the series
    int last = 0;
};

// Geometric mean of successive distance ratios over the first `window`
// entries; entries below 1e-12 are excluded.
RateEstimate convergence_rate(std::span<const double> distances, int window);
inline constexpr double rate_distance_floor = 1e-12;

// Pearson correlation coefficient of paired samples.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

// Minimum-cost assignment on a square cost matrix; returns row -> column.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace selftrain
