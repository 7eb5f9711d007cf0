#include "selftrain/kernels.hpp"

#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace selftrain::kernels {

namespace {

inline Eigen::Index n_blocks(Eigen::Index n) { return (n + block_size - 1) / block_size; }

inline void check_xy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& W) {
    if (X.cols() != W.rows())
        throw std::invalid_argument("kernel: input width does not match weight rows");
    if (X.rows() != y.size())
        throw std::invalid_argument("kernel: label count does not match input rows");
}

// phi applied in place, then row sums accumulated neuron-by-neuron so every
// row uses the same summation order as the single-sample forward pass.
inline Eigen::VectorXd block_predictions(const Eigen::MatrixXd& Xb, const Eigen::MatrixXd& W,
                                         Activation act, Eigen::MatrixXd& Z) {
    Z.noalias() = Xb * W;
    const Eigen::Index K = W.cols();
    Eigen::VectorXd pred = Eigen::VectorXd::Zero(Xb.rows());
    if (act == Activation::ReLU) {
        for (Eigen::Index j = 0; j < K; ++j)
            pred.array() += Z.col(j).array().max(0.0);
    } else {
        for (Eigen::Index j = 0; j < K; ++j)
            pred.array() += 1.0 / (1.0 + (-Z.col(j).array()).exp());
    }
    pred /= static_cast<double>(K);
    return pred;
}

inline void block_activation_derivative(Eigen::MatrixXd& Z, Activation act) {
    if (act == Activation::ReLU) {
        Z = (Z.array() > 0.0).cast<double>();
    } else {
        Z = (1.0 / (1.0 + (-Z.array()).exp())).matrix();
        Z = (Z.array() * (1.0 - Z.array())).matrix();
    }
}

}  // namespace

Eigen::VectorXd forward_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                              Activation act) {
    if (X.cols() != W.rows())
        throw std::invalid_argument("forward_batch: input width does not match weight rows");
    const Eigen::Index n = X.rows();
    Eigen::VectorXd out(n);
    const Eigen::Index nb = n_blocks(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        Eigen::MatrixXd Z;
        out.segment(lo, len) = block_predictions(X.middleRows(lo, len), W, act, Z);
    }
    return out;
}

double residual_sq_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& W, Activation act) {
    check_xy(X, y, W);
    const Eigen::Index n = X.rows();
    const Eigen::Index nb = n_blocks(n);
    std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        Eigen::MatrixXd Z;
        Eigen::VectorXd r = block_predictions(X.middleRows(lo, len), W, act, Z)
                            - y.segment(lo, len);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < len; ++i) acc += r(i) * r(i);
        partial[static_cast<std::size_t>(b)] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;  // fixed block order
    return total;
}

Eigen::MatrixXd residual_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& W, Activation act) {
    check_xy(X, y, W);
    const Eigen::Index n = X.rows();
    const Eigen::Index nb = n_blocks(n);
    std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        auto Xb = X.middleRows(lo, len);
        Eigen::MatrixXd Z;
        Eigen::VectorXd r = block_predictions(Xb, W, act, Z) - y.segment(lo, len);
        block_activation_derivative(Z, act);
        Z.array().colwise() *= r.array();
        partial[static_cast<std::size_t>(b)].noalias() = Xb.transpose() * Z;
    }
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(W.rows(), W.cols());
    for (const auto& g : partial) grad += g;
    return grad;
}

double mc_sq_diff_mean(const Eigen::MatrixXd& Wa, const Eigen::MatrixXd& Wb,
                       Activation act, const GaussianSpec& spec, Eigen::Index n,
                       RngSeed seed, std::string_view purpose) {
    if (Wa.rows() != Wb.rows() || Wa.rows() != spec.dim)
        throw std::invalid_argument("mc_sq_diff_mean: dimension mismatch");
    if (n < 1) throw std::invalid_argument("mc_sq_diff_mean: need n >= 1");
    const Eigen::Index nb = n_blocks(n);
    std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        auto eng = make_engine(substream(seed, static_cast<std::uint64_t>(b)), purpose);
        Eigen::MatrixXd Xb = draw_standard_normal(eng, len, spec.dim);
        Xb *= spec.std;
        Eigen::MatrixXd Z;
        Eigen::VectorXd ga = block_predictions(Xb, Wa, act, Z);
        Eigen::VectorXd gb = block_predictions(Xb, Wb, act, Z);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < len; ++i) {
            const double diff = ga(i) - gb(i);
            acc += diff * diff;
        }
        partial[static_cast<std::size_t>(b)] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total / static_cast<double>(n);
}

Eigen::VectorXd weighted_input_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("weighted_input_sum: size mismatch");
    const Eigen::Index n = X.rows();
    const Eigen::Index nb = n_blocks(n);
    std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        partial[static_cast<std::size_t>(b)].noalias() =
            X.middleRows(lo, len).transpose() * y.segment(lo, len);
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.cols());
    for (const auto& v : partial) out += v;
    return out;
}

Eigen::MatrixXd weighted_cov_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 double delta) {
    if (X.rows() != y.size()) throw std::invalid_argument("weighted_cov_sum: size mismatch");
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Eigen::Index nb = n_blocks(n);
    std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(nb));
    std::vector<double> ysum(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        auto Xb = X.middleRows(lo, len);
        auto yb = y.segment(lo, len);
        partial[static_cast<std::size_t>(b)].noalias() =
            Xb.transpose() * (Xb.array().colwise() * yb.array()).matrix();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < len; ++i) acc += yb(i);
        ysum[static_cast<std::size_t>(b)] = acc;
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    double ytotal = 0.0;
    for (Eigen::Index b = 0; b < nb; ++b) {
        out += partial[static_cast<std::size_t>(b)];
        ytotal += ysum[static_cast<std::size_t>(b)];
    }
    out -= delta * delta * ytotal * Eigen::MatrixXd::Identity(d, d);
    return out;
}

namespace {

// sum over rows p of y * [ p^3 - delta^2 (p ot~ I) ]
void third_moment_block(const Eigen::MatrixXd& P, const Eigen::VectorXd& y, double delta,
                        Eigen::Index lo, Eigen::Index len, Tensor3& acc) {
    const Eigen::Index K = P.cols();
    const double d2 = delta * delta;
    for (Eigen::Index r = lo; r < lo + len; ++r) {
        const double w = y(r);
        if (w == 0.0) continue;
        for (Eigen::Index i = 0; i < K; ++i) {
            const double pi = P(r, i);
            for (Eigen::Index j = 0; j < K; ++j) {
                const double pij = pi * P(r, j);
                for (Eigen::Index k = 0; k < K; ++k) {
                    double v = pij * P(r, k);
                    if (j == k) v -= d2 * pi;
                    if (i == k) v -= d2 * P(r, j);
                    if (i == j) v -= d2 * P(r, k);
                    acc(i, j, k) += w * v;
                }
            }
        }
    }
}

// sum over rows p of y * [ s p^3 - delta^2 (s (p ot~ I) + sym(a,p,p)) + delta^4 (a ot~ I) ],
// s = a'p
void direction_tensor_block(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& a, double delta, Eigen::Index lo,
                            Eigen::Index len, Tensor3& acc) {
    const Eigen::Index K = P.cols();
    const double d2 = delta * delta;
    const double d4 = d2 * d2;
    for (Eigen::Index r = lo; r < lo + len; ++r) {
        const double w = y(r);
        if (w == 0.0) continue;
        double s = 0.0;
        for (Eigen::Index i = 0; i < K; ++i) s += a(i) * P(r, i);
        for (Eigen::Index i = 0; i < K; ++i) {
            const double pi = P(r, i);
            const double ai = a(i);
            for (Eigen::Index j = 0; j < K; ++j) {
                const double pj = P(r, j);
                const double aj = a(j);
                for (Eigen::Index k = 0; k < K; ++k) {
                    const double pk = P(r, k);
                    double v = s * pi * pj * pk;
                    if (j == k) v += -d2 * s * pi + d4 * ai;
                    if (i == k) v += -d2 * s * pj + d4 * aj;
                    if (i == j) v += -d2 * s * pk + d4 * a(k);
                    v -= d2 * (ai * pj * pk + pi * aj * pk + pi * pj * a(k));
                    acc(i, j, k) += w * v;
                }
            }
        }
    }
}

template <typename BlockFn>
Tensor3 blocked_tensor_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                           BlockFn&& fn) {
    if (P.rows() != y.size()) throw std::invalid_argument("tensor kernel: size mismatch");
    const Eigen::Index n = P.rows();
    const Eigen::Index K = P.cols();
    const Eigen::Index nb = n_blocks(n);
    std::vector<Tensor3> partial(static_cast<std::size_t>(nb), Tensor3(K));
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        fn(lo, len, partial[static_cast<std::size_t>(b)]);
    }
    Tensor3 out(K);
    for (const auto& t : partial) out += t;
    return out;
}

}  // namespace

Tensor3 projected_third_moment_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                                   double delta) {
    return blocked_tensor_sum(P, y, [&](Eigen::Index lo, Eigen::Index len, Tensor3& acc) {
        third_moment_block(P, y, delta, lo, len, acc);
    });
}

Tensor3 direction_tensor_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& a, double delta) {
    if (a.size() != P.cols())
        throw std::invalid_argument("direction_tensor_sum: contraction vector length");
    return blocked_tensor_sum(P, y, [&](Eigen::Index lo, Eigen::Index len, Tensor3& acc) {
        direction_tensor_block(P, y, a, delta, lo, len, acc);
    });
}

namespace serial {

Eigen::VectorXd forward_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                              Activation act) {
    if (X.cols() != W.rows())
        throw std::invalid_argument("forward_batch: input width does not match weight rows");
    const Eigen::Index n = X.rows();
    const Eigen::Index K = W.cols();
    const Eigen::Index d = W.rows();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < K; ++j) {
            double z = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) z += X(i, c) * W(c, j);
            sum += activation_value(act, z);
        }
        out(i) = sum / static_cast<double>(K);
    }
    return out;
}

double residual_sq_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& W, Activation act) {
    check_xy(X, y, W);
    Eigen::VectorXd pred = serial::forward_batch(X, W, act);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double r = pred(i) - y(i);
        acc += r * r;
    }
    return acc;
}

Eigen::MatrixXd residual_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& W, Activation act) {
    check_xy(X, y, W);
    const Eigen::Index n = X.rows();
    const Eigen::Index K = W.cols();
    const Eigen::Index d = W.rows();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(d, K);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        Eigen::VectorXd z(K);
        for (Eigen::Index j = 0; j < K; ++j) {
            double acc = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) acc += X(i, c) * W(c, j);
            z(j) = acc;
            sum += activation_value(act, acc);
        }
        const double r = sum / static_cast<double>(K) - y(i);
        for (Eigen::Index j = 0; j < K; ++j) {
            const double g = r * activation_derivative(act, z(j));
            if (g == 0.0) continue;
            for (Eigen::Index c = 0; c < d; ++c) grad(c, j) += g * X(i, c);
        }
    }
    return grad;
}

double mc_sq_diff_mean(const Eigen::MatrixXd& Wa, const Eigen::MatrixXd& Wb,
                       Activation act, const GaussianSpec& spec, Eigen::Index n,
                       RngSeed seed, std::string_view purpose) {
    if (Wa.rows() != Wb.rows() || Wa.rows() != spec.dim)
        throw std::invalid_argument("mc_sq_diff_mean: dimension mismatch");
    if (n < 1) throw std::invalid_argument("mc_sq_diff_mean: need n >= 1");
    const Eigen::Index nb = n_blocks(n);
    double total = 0.0;
    for (Eigen::Index b = 0; b < nb; ++b) {
        const Eigen::Index lo = b * block_size;
        const Eigen::Index len = std::min(block_size, n - lo);
        auto eng = make_engine(substream(seed, static_cast<std::uint64_t>(b)), purpose);
        Eigen::MatrixXd Xb = draw_standard_normal(eng, len, spec.dim);
        Xb *= spec.std;
        Eigen::MatrixXd Z;
        Eigen::VectorXd ga = block_predictions(Xb, Wa, act, Z);
        Eigen::VectorXd gb = block_predictions(Xb, Wb, act, Z);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < len; ++i) {
            const double diff = ga(i) - gb(i);
            acc += diff * diff;
        }
        total += acc;
    }
    return total / static_cast<double>(n);
}

Eigen::VectorXd weighted_input_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("weighted_input_sum: size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index c = 0; c < X.cols(); ++c) out(c) += y(i) * X(i, c);
    return out;
}

Eigen::MatrixXd weighted_cov_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 double delta) {
    if (X.rows() != y.size()) throw std::invalid_argument("weighted_cov_sum: size mismatch");
    const Eigen::Index d = X.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    const double d2 = delta * delta;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) out(r, c) += y(i) * X(i, r) * X(i, c);
        for (Eigen::Index r = 0; r < d; ++r) out(r, r) -= y(i) * d2;
    }
    return out;
}

Tensor3 projected_third_moment_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                                   double delta) {
    if (P.rows() != y.size()) throw std::invalid_argument("tensor kernel: size mismatch");
    Tensor3 acc(P.cols());
    third_moment_block(P, y, delta, 0, P.rows(), acc);
    return acc;
}

Tensor3 direction_tensor_sum(const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& a, double delta) {
    if (P.rows() != y.size()) throw std::invalid_argument("tensor kernel: size mismatch");
    if (a.size() != P.cols())
        throw std::invalid_argument("direction_tensor_sum: contraction vector length");
    Tensor3 acc(P.cols());
    direction_tensor_block(P, y, a, delta, 0, P.rows(), acc);
    return acc;
}

}  // namespace serial

}  // namespace selftrain::kernels
