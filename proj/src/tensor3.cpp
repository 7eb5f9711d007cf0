#include "selftrain/tensor3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selftrain {

Tensor3& Tensor3::operator+=(const Tensor3& other) {
    if (other.n_ != n_) throw std::invalid_argument("Tensor3: size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor3& Tensor3::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double Tensor3::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Tensor3::symmetry_residual() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i)
        for (Eigen::Index j = i; j < n_; ++j)
            for (Eigen::Index k = j; k < n_; ++k) {
                const Tensor3& t = *this;
                const double vals[6] = {t(i, j, k), t(i, k, j), t(j, i, k),
                                        t(j, k, i), t(k, i, j), t(k, j, i)};
                auto [lo, hi] = std::minmax_element(std::begin(vals), std::end(vals));
                worst = std::max(worst, *hi - *lo);
            }
    return worst;
}

void Tensor3::symmetrize() {
    for (Eigen::Index i = 0; i < n_; ++i)
        for (Eigen::Index j = i; j < n_; ++j)
            for (Eigen::Index k = j; k < n_; ++k) {
                Tensor3& t = *this;
                const double avg = (t(i, j, k) + t(i, k, j) + t(j, i, k) + t(j, k, i) +
                                    t(k, i, j) + t(k, j, i)) / 6.0;
                t(i, j, k) = t(i, k, j) = t(j, i, k) = t(j, k, i) = t(k, i, j) = t(k, j, i) = avg;
            }
}

Eigen::VectorXd Tensor3::contract_uu(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n_; ++j) {
            double inner = 0.0;
            for (Eigen::Index k = 0; k < n_; ++k) inner += (*this)(i, j, k) * u(k);
            acc += inner * u(j);
        }
        out(i) = acc;
    }
    return out;
}

double Tensor3::contract_uuu(const Eigen::VectorXd& u) const {
    return contract_uu(u).dot(u);
}

void Tensor3::deflate(const Eigen::VectorXd& u, double value) {
    for (Eigen::Index i = 0; i < n_; ++i)
        for (Eigen::Index j = 0; j < n_; ++j)
            for (Eigen::Index k = 0; k < n_; ++k)
                (*this)(i, j, k) -= value * u(i) * u(j) * u(k);
}

Tensor3 Tensor3::rank_one(const Eigen::VectorXd& u, double value) {
    Tensor3 t(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        for (Eigen::Index j = 0; j < u.size(); ++j)
            for (Eigen::Index k = 0; k < u.size(); ++k)
                t(i, j, k) = value * u(i) * u(j) * u(k);
    return t;
}

}  // namespace selftrain
