#include "selftrain/tensorinit.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "selftrain/kernels.hpp"

namespace selftrain {

namespace {
constexpr double pi = 3.14159265358979323846;
}

PsiConstants psi_constants(Activation act, double delta, int K) {
    if (act != Activation::ReLU)
        throw std::invalid_argument("psi_constants: only ReLU is supported");
    if (!(delta > 0.0)) throw std::invalid_argument("psi_constants: delta > 0");
    if (K < 1) throw std::invalid_argument("psi_constants: K >= 1");
    PsiConstants psi;
    const double Kd = static_cast<double>(K);
    psi.psi1 = delta * delta / (2.0 * Kd);
    psi.psi2 = delta * delta * delta / (std::sqrt(2.0 * pi) * Kd);
    // ReLU has no third-Hermite component; the direction tensor is built from
    // the fourth-Hermite contraction instead.
    psi.psi3 = 0.0;
    return psi;
}

std::pair<MomentEstimates, Subspace> estimate_moments(const LabeledSet& d1,
                                                      const LabeledSet& d2,
                                                      const LabeledSet& d3,
                                                      double delta, int K,
                                                      RngSeed seed) {
    if (d1.size() < 1 || d2.size() < 1 || d3.size() < 1)
        throw std::invalid_argument("estimate_moments: empty split");
    const Eigen::Index d = d1.inputs.cols();
    if (d2.inputs.cols() != d || d3.inputs.cols() != d)
        throw std::invalid_argument("estimate_moments: split width mismatch");
    if (K > d) throw std::invalid_argument("estimate_moments: K must be <= d");
    if (!(delta > 0.0)) throw std::invalid_argument("estimate_moments: delta > 0");

    MomentEstimates est;
    est.delta = delta;
    est.m1 = kernels::weighted_input_sum(d1.inputs, d1.labels) / static_cast<double>(d1.size());
    Eigen::MatrixXd m2 =
        kernels::weighted_cov_sum(d2.inputs, d2.labels, delta) / static_cast<double>(d2.size());
    est.m2 = 0.5 * (m2 + m2.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.m2);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("estimate_moments: eigendecomposition failed");
    // top-K eigenvectors by absolute eigenvalue
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    Subspace sub;
    sub.basis.resize(d, K);
    for (int j = 0; j < K; ++j) sub.basis.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);

    const Eigen::MatrixXd P = d3.inputs * sub.basis;
    auto eng = make_engine(seed, "init-contraction");
    Eigen::VectorXd a = draw_standard_normal_vector(eng, K);
    const double an = a.norm();
    a = an > 0.0 ? Eigen::VectorXd(a / an) : Eigen::VectorXd::Unit(K, 0);
    est.m3_projected = kernels::direction_tensor_sum(P, d3.labels, a, delta);
    est.m3_projected *= 1.0 / static_cast<double>(d3.size());
    est.m3_projected.symmetrize();
    return {std::move(est), std::move(sub)};
}

std::vector<TensorEigenpair> tensor_power_decompose(const Tensor3& tensor, int n_restarts,
                                                    int n_iters, double tol, RngSeed seed) {
    if (tensor.dim() < 1) throw std::invalid_argument("tensor_power_decompose: empty tensor");
    if (n_restarts < 1 || n_iters < 1 || !(tol > 0.0))
        throw std::invalid_argument("tensor_power_decompose: bad options");
    const double scale = std::max(1.0, tensor.frobenius_norm());
    if (tensor.symmetry_residual() > 1e-8 * scale)
        throw std::invalid_argument("tensor_power_decompose: tensor is not symmetric");

    const Eigen::Index K = tensor.dim();
    Tensor3 work = tensor;
    auto eng = make_engine(seed, "power-restart");
    std::vector<TensorEigenpair> pairs;
    pairs.reserve(static_cast<std::size_t>(K));
    for (Eigen::Index comp = 0; comp < K; ++comp) {
        Eigen::VectorXd best_u = Eigen::VectorXd::Unit(K, 0);
        double best_val = 0.0;
        bool have_best = false;
        for (int r = 0; r < n_restarts; ++r) {
            Eigen::VectorXd u = draw_standard_normal_vector(eng, K);
            double nrm = u.norm();
            u = nrm > 0.0 ? Eigen::VectorXd(u / nrm) : Eigen::VectorXd::Unit(K, 0);
            for (int it = 0; it < n_iters; ++it) {
                Eigen::VectorXd next = work.contract_uu(u);
                const double nn = next.norm();
                if (nn < 1e-300) break;  // degenerate direction, e.g. zero tensor
                next /= nn;
                const double step = (next - u).norm();
                u = next;
                if (step < tol) break;
            }
            const double val = work.contract_uuu(u);
            if (!have_best || std::abs(val) > std::abs(best_val)) {
                have_best = true;
                best_val = val;
                best_u = u;
            }
        }
        pairs.push_back(TensorEigenpair{best_u, best_val});
        work.deflate(best_u, best_val);
    }
    return pairs;
}

std::vector<TensorEigenpair> tensor_power_decompose(const Tensor3& tensor,
                                                    const PowerOptions& opts, RngSeed seed) {
    return tensor_power_decompose(tensor, opts.n_restarts, opts.n_iters, opts.tol, seed);
}

RecoveredWeights recover_weights(const Subspace& subspace,
                                 const std::vector<Eigen::VectorXd>& decomp_vectors,
                                 const Eigen::VectorXd& m1, const Eigen::MatrixXd& m2,
                                 double psi1, double psi2) {
    const Eigen::Index d = subspace.basis.rows();
    const Eigen::Index K = subspace.basis.cols();
    if (static_cast<Eigen::Index>(decomp_vectors.size()) != K)
        throw std::invalid_argument("recover_weights: need K direction vectors");
    if (m1.size() != d || m2.rows() != d || m2.cols() != d)
        throw std::invalid_argument("recover_weights: moment shape mismatch");
    if (!(psi1 != 0.0 && psi2 != 0.0))
        throw std::invalid_argument("recover_weights: psi1, psi2 must be non-zero");

    Eigen::MatrixXd Wbar(d, K);
    for (Eigen::Index j = 0; j < K; ++j) Wbar.col(j) = subspace.basis * decomp_vectors[static_cast<std::size_t>(j)];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Wbar);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond < 1e10))
        throw std::runtime_error(
            "recover_weights: direction design matrix is rank deficient (condition number " +
            std::to_string(cond) + ")");

    const Eigen::VectorXd alpha1 =
        (psi1 * Wbar).colPivHouseholderQr().solve(m1);

    Eigen::MatrixXd A2(d * d, K);
    for (Eigen::Index j = 0; j < K; ++j) {
        const Eigen::MatrixXd outer = Wbar.col(j) * Wbar.col(j).transpose();
        A2.col(j) = psi2 * Eigen::Map<const Eigen::VectorXd>(outer.data(), d * d);
    }
    const Eigen::VectorXd alpha2 =
        A2.colPivHouseholderQr().solve(Eigen::Map<const Eigen::VectorXd>(m2.data(), d * d));

    RecoveredWeights out;
    out.condition_number = cond;
    out.w0.resize(d, K);
    out.signs.resize(static_cast<std::size_t>(K));
    for (Eigen::Index j = 0; j < K; ++j) {
        const double a1 = alpha1(j);
        const double a2 = alpha2(j);
        const int sign_a2 = a2 < 0.0 ? -1 : 1;
        out.signs[static_cast<std::size_t>(j)] = (a1 / (a2 == 0.0 ? 1.0 : a2)) < 0.0 ? -1 : 1;
        out.w0.col(j) = sign_a2 * a1 * Wbar.col(j);
    }
    return out;
}

Eigen::MatrixXd tensor_initialize(const LabeledSet& labeled, int K, RngSeed seed,
                                  const PowerOptions& opts,
                                  TensorInitDiagnostics* diagnostics) {
    const Eigen::Index N = labeled.size();
    if (K < 1) throw std::invalid_argument("tensor_initialize: K >= 1");
    if (N < 3 * K)
        throw std::invalid_argument("tensor_initialize: need N >= 3K labeled samples");
    const Eigen::Index chunk = N / 3;

    auto slice = [&](Eigen::Index lo) {
        LabeledSet part;
        part.inputs = labeled.inputs.middleRows(lo, chunk);
        part.labels = labeled.labels.segment(lo, chunk);
        part.spec = labeled.spec;
        return part;
    };
    const LabeledSet d1 = slice(0);
    const LabeledSet d2 = slice(chunk);
    const LabeledSet d3 = slice(2 * chunk);
    const double delta = labeled.spec.std;

    auto [est, sub] = estimate_moments(d1, d2, d3, delta, K, seed);
    auto pairs = tensor_power_decompose(est.m3_projected, opts, substream(seed, 1));
    std::vector<Eigen::VectorXd> dirs;
    dirs.reserve(pairs.size());
    for (const auto& p : pairs) dirs.push_back(p.vector);

    const PsiConstants psi = psi_constants(Activation::ReLU, delta, K);
    RecoveredWeights rec = recover_weights(sub, dirs, est.m1, est.m2, psi.psi1, psi.psi2);

    if (diagnostics) {
        diagnostics->n_used = 3 * chunk;
        const Eigen::MatrixXd core = sub.basis.transpose() * est.m2 * sub.basis;
        const double m2norm = est.m2.norm();
        diagnostics->subspace_residual =
            m2norm > 0.0 ? (est.m2 - sub.basis * core * sub.basis.transpose()).norm() / m2norm
                         : 0.0;
        Tensor3 resid = est.m3_projected;
        for (const auto& p : pairs) resid.deflate(p.vector, p.value);
        const double tnorm = est.m3_projected.frobenius_norm();
        diagnostics->decomposition_residual =
            tnorm > 0.0 ? resid.frobenius_norm() / tnorm : 0.0;
        diagnostics->condition_number = rec.condition_number;
    }
    return rec.w0;
}

}  // namespace selftrain
