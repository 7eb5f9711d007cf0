#pragma once

#include <vector>

#include <Eigen/Core>

namespace selftrain {

// Dense cubic tensor of side n, flat storage, (i,j,k) row-major.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(Eigen::Index n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

    Eigen::Index dim() const { return n_; }

    double& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
        return data_[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
    }
    double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
        return data_[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void setZero() { std::fill(data_.begin(), data_.end(), 0.0); }

    Tensor3& operator+=(const Tensor3& other);
    Tensor3& operator*=(double s);

    double frobenius_norm() const;

    // Max deviation from full index-permutation symmetry.
    double symmetry_residual() const;

    // Average over the 6 index permutations.
    void symmetrize();

    // v_i = sum_{j,k} T(i,j,k) u_j u_k
    Eigen::VectorXd contract_uu(const Eigen::VectorXd& u) const;

    // sum_{i,j,k} T(i,j,k) u_i u_j u_k
    double contract_uuu(const Eigen::VectorXd& u) const;

    // T -= value * u (x) u (x) u
    void deflate(const Eigen::VectorXd& u, double value);

    static Tensor3 rank_one(const Eigen::VectorXd& u, double value);

private:
    Eigen::Index n_ = 0;
    std::vector<double> data_;
};

}  // namespace selftrain
