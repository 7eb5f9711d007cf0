#include "selftrain/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace selftrain {

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    // Kuhn-Munkres with row/column potentials, O(n^3).
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw std::invalid_argument("solve_assignment: square matrix required");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

AlignedDistance permutation_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument("permutation_distance: shape mismatch");
    const int K = static_cast<int>(A.cols());
    Eigen::MatrixXd cost(K, K);
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) cost(j, k) = (A.col(j) - B.col(k)).squaredNorm();
    AlignedDistance out;
    out.permutation = solve_assignment(cost);
    double total = 0.0;
    for (int j = 0; j < K; ++j) total += cost(j, out.permutation[static_cast<std::size_t>(j)]);
    out.value = std::sqrt(std::max(0.0, total));
    return out;
}

double relative_error(const Eigen::MatrixXd& W, const Eigen::MatrixXd& W_star) {
    const double base = W_star.norm();
    if (base == 0.0) throw std::invalid_argument("relative_error: zero ground truth");
    return permutation_distance(W, W_star).value / base;
}

bool success(const Eigen::MatrixXd& W, const Eigen::MatrixXd& W_star) {
    return relative_error(W, W_star) <= success_threshold;
}

FitResult fit_inverse_sqrt(const std::vector<std::pair<long, double>>& points) {
    if (points.size() < 2)
        throw std::invalid_argument("fit_inverse_sqrt: need at least 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& [m, y] : points) {
        if (m <= 0) throw std::invalid_argument("fit_inverse_sqrt: M must be positive");
        const double x = 1.0 / std::sqrt(static_cast<double>(m));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0)
        throw std::invalid_argument("fit_inverse_sqrt: need at least 2 distinct M values");
    FitResult fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / n;
    for (const auto& [m, y] : points) {
        const double x = 1.0 / std::sqrt(static_cast<double>(m));
        const double e = y - (fit.intercept + fit.slope * x);
        ss_res += e * e;
        ss_tot += (y - ymean) * (y - ymean);
    }
    fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

RateEstimate convergence_rate(std::span<const double> distances, int window) {
    const int limit = std::min<int>(window, static_cast<int>(distances.size()));
    std::vector<std::pair<int, double>> usable;
    for (int i = 0; i < limit; ++i)
        if (distances[static_cast<std::size_t>(i)] > rate_distance_floor)
            usable.emplace_back(i, distances[static_cast<std::size_t>(i)]);
    if (usable.size() < 2)
        throw std::invalid_argument("convergence_rate: fewer than 2 usable entries");
    double log_sum = 0.0;
    for (std::size_t i = 1; i < usable.size(); ++i)
        log_sum += std::log(usable[i].second / usable[i - 1].second);
    RateEstimate est;
    est.rate = std::exp(log_sum / static_cast<double>(usable.size() - 1));
    est.first = usable.front().first;
    est.last = usable.back().first;
    return est;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson_correlation: need matched samples");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson_correlation: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace selftrain
