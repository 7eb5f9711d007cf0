#include "selftrain/selftrain.hpp"

#include <cmath>
#include <string>

#include "selftrain/csv.hpp"
#include "selftrain/kernels.hpp"
#include "selftrain/metrics.hpp"

namespace selftrain {

void TrainConfig::validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("TrainConfig: eta must be > 0");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("TrainConfig: beta in [0,1)");
    if (T < 1) throw std::invalid_argument("TrainConfig: T >= 1");
    if (L_max < 1) throw std::invalid_argument("TrainConfig: L_max >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("TrainConfig: rel_tol > 0");
}

DivergenceError::DivergenceError(int outer, int inner)
    : std::runtime_error("divergence: non-finite iterate at outer " + std::to_string(outer) +
                         ", inner step " + std::to_string(inner)),
      outer_index(outer),
      inner_index(inner) {}

std::vector<double> TrainTrace::distances_to_wstar() const {
    std::vector<double> out;
    out.reserve(outer.size());
    for (const auto& rec : outer) out.push_back(rec.dist_to_wstar);
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> inner_loop(
    const Eigen::MatrixXd& W_start, const Eigen::MatrixXd& W_prev_in, Activation act,
    std::span<const BatchView> labeled_batches, std::span<const BatchView> pseudo_batches,
    const TrainConfig& cfg, int outer_index) {
    const double lam = cfg.weights.lambda();
    const double lam_t = cfg.weights.lambda_tilde();
    if (lam > 0.0 && static_cast<int>(labeled_batches.size()) != cfg.T)
        throw std::invalid_argument("inner_loop: need T labeled batches");
    if (lam_t > 0.0 && static_cast<int>(pseudo_batches.size()) != cfg.T)
        throw std::invalid_argument("inner_loop: need T pseudo batches");

    const double K = static_cast<double>(W_start.cols());
    Eigen::MatrixXd W = W_start;
    Eigen::MatrixXd W_prev = W_prev_in;
    Eigen::MatrixXd grad(W.rows(), W.cols());
    for (int t = 0; t < cfg.T; ++t) {
        grad.setZero();
        if (lam > 0.0) {
            const auto& b = labeled_batches[static_cast<std::size_t>(t)];
            grad += (lam / (K * static_cast<double>(b.X.rows()))) *
                    kernels::residual_gradient(b.X, b.y, W, act);
        }
        if (lam_t > 0.0) {
            const auto& b = pseudo_batches[static_cast<std::size_t>(t)];
            grad += (lam_t / (K * static_cast<double>(b.X.rows()))) *
                    kernels::residual_gradient(b.X, b.y, W, act);
        }
        Eigen::MatrixXd W_next = W - cfg.eta * grad + cfg.beta * (W - W_prev);
        if (!W_next.allFinite()) throw DivergenceError(outer_index, t);
        W_prev.swap(W);
        W.swap(W_next);
    }
    return {W, W_prev};
}

namespace {

// Rows listed in `subsets` copied into contiguous chunks, so batch t is the
// zero-copy block [t*chunk, (t+1)*chunk).
void gather_permuted(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const std::vector<std::vector<Eigen::Index>>& subsets,
                     Eigen::MatrixXd& Xout, Eigen::VectorXd& yout) {
    const Eigen::Index chunk = static_cast<Eigen::Index>(subsets.front().size());
    const Eigen::Index total = chunk * static_cast<Eigen::Index>(subsets.size());
    Xout.resize(total, X.cols());
    yout.resize(total);
    Eigen::Index row = 0;
    for (const auto& subset : subsets)
        for (Eigen::Index idx : subset) {
            Xout.row(row) = X.row(idx);
            yout(row) = y(idx);
            ++row;
        }
}

}  // namespace

TrainResult self_train(const Eigen::MatrixXd& initial, Activation act,
                       const LabeledSet& labeled, const UnlabeledSet& unlabeled,
                       const TrainConfig& cfg, const TrainReferences& refs) {
    cfg.validate();
    const double lam = cfg.weights.lambda();
    const double lam_t = cfg.weights.lambda_tilde();
    const Eigen::Index N = labeled.size();
    const Eigen::Index M = unlabeled.size();
    const bool use_unlabeled = lam_t > 0.0;
    if (lam > 0.0) {
        if (labeled.inputs.cols() != initial.rows())
            throw std::invalid_argument("self_train: labeled width does not match weights");
        if (N < cfg.T)
            throw std::invalid_argument("self_train: N < T with lambda > 0");
    }
    if (use_unlabeled) {
        if (unlabeled.inputs.cols() != initial.rows())
            throw std::invalid_argument("self_train: unlabeled width does not match weights");
        if (M < cfg.T)
            throw std::invalid_argument("self_train: M < T with lambda_tilde > 0");
    }

    Eigen::MatrixXd W = initial;
    Eigen::MatrixXd W_prev = initial;  // first update is a plain GD step
    Eigen::VectorXd pseudo;            // labels fixed for one whole inner loop
    Eigen::MatrixXd Xl_perm, Xu_perm;
    Eigen::VectorXd yl_perm, yu_perm;
    TrainResult result;
    TrainTrace& trace = result.trace;
    trace.stop_reason = StopReason::MaxIterations;

    const std::uint64_t tag_lab = fnv1a64("partition-labeled");
    const std::uint64_t tag_unl = fnv1a64("partition-unlabeled");

    for (int ell = 0; ell < cfg.L_max; ++ell) {
        const Eigen::MatrixXd W_outer_start = W;
        if (use_unlabeled) pseudo = kernels::forward_batch(unlabeled.inputs, W, act);

        const bool redraw = ell == 0 || cfg.repartition_each_outer;
        if (redraw) {
            const std::uint64_t e = static_cast<std::uint64_t>(ell);
            if (lam > 0.0) {
                auto parts = partition_disjoint(N, cfg.T, substream(cfg.seed, mix_u64(tag_lab, e)));
                gather_permuted(labeled.inputs, labeled.labels, parts, Xl_perm, yl_perm);
            }
            if (use_unlabeled) {
                auto parts = partition_disjoint(M, cfg.T, substream(cfg.seed, mix_u64(tag_unl, e)));
                gather_permuted(unlabeled.inputs, pseudo, parts, Xu_perm, yu_perm);
            }
        } else if (use_unlabeled) {
            // same partition, labels refreshed from the new teacher
            const std::uint64_t e = 0;
            auto parts = partition_disjoint(M, cfg.T, substream(cfg.seed, mix_u64(tag_unl, e)));
            Eigen::Index row = 0;
            for (const auto& subset : parts)
                for (Eigen::Index idx : subset) yu_perm(row++) = pseudo(idx);
        }

        std::vector<BatchView> lab_batches, unl_batches;
        if (lam > 0.0) {
            const Eigen::Index chunk = Xl_perm.rows() / cfg.T;
            for (int t = 0; t < cfg.T; ++t)
                lab_batches.push_back(BatchView{Xl_perm.middleRows(t * chunk, chunk),
                                                yl_perm.segment(t * chunk, chunk)});
        }
        if (use_unlabeled) {
            const Eigen::Index chunk = Xu_perm.rows() / cfg.T;
            for (int t = 0; t < cfg.T; ++t)
                unl_batches.push_back(BatchView{Xu_perm.middleRows(t * chunk, chunk),
                                                yu_perm.segment(t * chunk, chunk)});
        }

        std::tie(W, W_prev) = inner_loop(W, W_prev, act, lab_batches, unl_batches, cfg, ell);
        trace.total_inner_steps += cfg.T;

        OuterRecord rec;
        const double denom = W_outer_start.norm();
        const double change = (W - W_outer_start).norm();
        rec.rel_change = denom > 0.0 ? change / denom : (change > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        double risk = 0.0;
        if (lam > 0.0)
            risk += lam / (2.0 * static_cast<double>(N)) *
                    kernels::residual_sq_sum(labeled.inputs, labeled.labels, W, act);
        if (use_unlabeled)
            risk += lam_t / (2.0 * static_cast<double>(M)) *
                    kernels::residual_sq_sum(unlabeled.inputs, pseudo, W, act);
        rec.risk = risk;
        if (refs.w_star) rec.dist_to_wstar = permutation_distance(W, *refs.w_star).value;
        if (refs.w_bar) rec.dist_to_wbar = permutation_distance(W, *refs.w_bar).value;
        trace.outer.push_back(rec);

        if (rec.rel_change <= cfg.rel_tol) {
            trace.stop_reason = StopReason::Converged;
            break;
        }
    }
    result.weights = std::move(W);
    return result;
}

double default_lambda(Eigen::Index N, int K, int d) {
    if (N < 1 || K < 1 || d < 1) throw std::invalid_argument("default_lambda: N, K, d >= 1");
    return std::min(1.0, std::sqrt(static_cast<double>(N) / (2.0 * K * d)));
}

std::pair<double, double> theory_step_and_momentum(double gamma_min, double gamma_max) {
    if (!(gamma_min > 0.0 && gamma_max >= gamma_min))
        throw std::invalid_argument("theory_step_and_momentum: need 0 < gamma_min <= gamma_max");
    const double root = std::sqrt(gamma_max) + std::sqrt(gamma_min);
    const double eta = 1.0 / (root * root);
    const double beta_root = 1.0 - std::sqrt(eta * gamma_min);
    return {eta, beta_root * beta_root};
}

void save_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
    CsvTable table;
    table.header = {"outer_iter", "dist_to_wstar", "dist_to_wbar", "risk", "rel_change"};
    for (std::size_t i = 0; i < trace.outer.size(); ++i) {
        const auto& rec = trace.outer[i];
        table.rows.push_back({std::to_string(i), format_g17(rec.dist_to_wstar),
                              format_g17(rec.dist_to_wbar), format_g17(rec.risk),
                              format_g17(rec.rel_change)});
    }
    write_csv(path, table);
}

}  // namespace selftrain
