#include "selftrain/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "selftrain/csv.hpp"
#include "selftrain/kernels.hpp"

namespace selftrain {

RiskWeights::RiskWeights(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("RiskWeights: lambda must be in [0,1]");
}

namespace {

void check_risk_inputs(const NetworkModel& model, const LabeledSet& labeled,
                       const PseudoLabeledSet& pseudo, RiskWeights weights) {
    if (weights.lambda() > 0.0) {
        if (labeled.size() < 1)
            throw std::invalid_argument("empirical risk: empty labeled set with lambda > 0");
        if (labeled.inputs.cols() != model.input_dim())
            throw std::invalid_argument("empirical risk: labeled input width mismatch");
    }
    if (weights.lambda_tilde() > 0.0) {
        if (pseudo.size() < 1)
            throw std::invalid_argument("empirical risk: empty pseudo set with lambda_tilde > 0");
        if (pseudo.inputs.cols() != model.input_dim())
            throw std::invalid_argument("empirical risk: pseudo input width mismatch");
    }
}

}  // namespace

double empirical_risk(const NetworkModel& model, const LabeledSet& labeled,
                      const PseudoLabeledSet& pseudo, RiskWeights weights) {
    check_risk_inputs(model, labeled, pseudo, weights);
    double risk = 0.0;
    if (weights.lambda() > 0.0) {
        const double sum = kernels::residual_sq_sum(labeled.inputs, labeled.labels,
                                                    model.weights, model.activation);
        risk += weights.lambda() / (2.0 * static_cast<double>(labeled.size())) * sum;
    }
    if (weights.lambda_tilde() > 0.0) {
        const double sum = kernels::residual_sq_sum(pseudo.inputs, pseudo.pseudo_labels,
                                                    model.weights, model.activation);
        risk += weights.lambda_tilde() / (2.0 * static_cast<double>(pseudo.size())) * sum;
    }
    return risk;
}

Eigen::MatrixXd empirical_gradient(const NetworkModel& model, const LabeledSet& labeled,
                                   const PseudoLabeledSet& pseudo, RiskWeights weights) {
    check_risk_inputs(model, labeled, pseudo, weights);
    const double K = static_cast<double>(model.neuron_count());
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(model.input_dim(), model.neuron_count());
    if (weights.lambda() > 0.0) {
        grad += (weights.lambda() / (K * static_cast<double>(labeled.size()))) *
                kernels::residual_gradient(labeled.inputs, labeled.labels, model.weights,
                                           model.activation);
    }
    if (weights.lambda_tilde() > 0.0) {
        grad += (weights.lambda_tilde() / (K * static_cast<double>(pseudo.size()))) *
                kernels::residual_gradient(pseudo.inputs, pseudo.pseudo_labels, model.weights,
                                           model.activation);
    }
    return grad;
}

double population_risk_mc(const NetworkModel& model, const Eigen::MatrixXd& target,
                          const GaussianSpec& labeled_spec, const GaussianSpec& unlabeled_spec,
                          RiskWeights weights, const McSpec& mc) {
    if (target.rows() != model.input_dim() || target.cols() != model.neuron_count())
        throw std::invalid_argument("population_risk_mc: target shape mismatch");
    if (mc.n_samples < 1) throw std::invalid_argument("population_risk_mc: n_samples >= 1");
    double risk = 0.0;
    if (weights.lambda() > 0.0) {
        if (labeled_spec.dim != model.input_dim())
            throw std::invalid_argument("population_risk_mc: labeled spec dim mismatch");
        risk += 0.5 * weights.lambda() *
                kernels::mc_sq_diff_mean(target, model.weights, model.activation, labeled_spec,
                                         mc.n_samples, mc.seed, "mc-labeled");
    }
    if (weights.lambda_tilde() > 0.0) {
        if (unlabeled_spec.dim != model.input_dim())
            throw std::invalid_argument("population_risk_mc: unlabeled spec dim mismatch");
        risk += 0.5 * weights.lambda_tilde() *
                kernels::mc_sq_diff_mean(target, model.weights, model.activation, unlabeled_spec,
                                         mc.n_samples, mc.seed, "mc-unlabeled");
    }
    return risk;
}

double relu_gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double delta) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;  // phi(0'x) is identically 0
    double c = a.dot(b) / (na * nb);
    c = std::clamp(c, -1.0, 1.0);
    const double theta = std::acos(c);
    const double pi = 3.14159265358979323846;
    return delta * delta * na * nb / (2.0 * pi) *
           (std::sin(theta) + (pi - theta) * std::cos(theta));
}

double generalization_fn_closed(const Eigen::MatrixXd& W, const Eigen::MatrixXd& W_star,
                                double delta) {
    if (W.rows() != W_star.rows() || W.cols() != W_star.cols())
        throw std::invalid_argument("generalization_fn_closed: shape mismatch");
    if (!(delta > 0.0)) throw std::invalid_argument("generalization_fn_closed: delta > 0");
    const Eigen::Index K = W.cols();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < K; ++j)
        for (Eigen::Index k = 0; k < K; ++k)
            acc += relu_gaussian_kernel(W.col(j), W.col(k), delta) -
                   2.0 * relu_gaussian_kernel(W.col(j), W_star.col(k), delta) +
                   relu_gaussian_kernel(W_star.col(j), W_star.col(k), delta);
    return acc / static_cast<double>(K * K);
}

std::vector<GfScanRow> gf_vs_distance_scan(const Eigen::MatrixXd& W_star,
                                           const std::vector<double>& radii,
                                           int trials_per_radius, double delta,
                                           GfMethod method, RngSeed seed,
                                           Eigen::Index mc_samples) {
    const double base = W_star.norm();
    std::vector<GfScanRow> rows;
    rows.reserve(radii.size());
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        const double r = radii[ri];
        double sum = 0.0, sumsq = 0.0;
        const int trials = r == 0.0 ? 1 : trials_per_radius;
        for (int t = 0; t < trials; ++t) {
            RngSeed dir_seed = substream(seed, ri * 65536 + static_cast<std::uint64_t>(t));
            auto eng = make_engine(dir_seed, "gf-direction");
            Eigen::MatrixXd U = draw_standard_normal(eng, W_star.rows(), W_star.cols());
            const double un = U.norm();
            Eigen::MatrixXd W = W_star;
            if (r > 0.0 && un > 0.0) W += U * (r * base / un);
            double gf;
            if (method == GfMethod::Closed) {
                gf = generalization_fn_closed(W, W_star, delta);
            } else {
                NetworkModel m{W, Activation::ReLU};
                GaussianSpec spec{static_cast<int>(W.rows()), delta};
                gf = 2.0 * population_risk_mc(m, W_star, spec, spec, RiskWeights(1.0),
                                              McSpec{mc_samples, dir_seed});
            }
            sum += gf;
            sumsq += gf * gf;
        }
        GfScanRow row;
        row.distance = r * base;
        row.gf_raw_mean = sum / trials;
        row.gf_raw_std =
            trials > 1 ? std::sqrt(std::max(0.0, (sumsq - sum * sum / trials) / (trials - 1)))
                       : 0.0;
        rows.push_back(row);
    }
    double max_mean = 0.0;
    for (const auto& row : rows) max_mean = std::max(max_mean, row.gf_raw_mean);
    for (auto& row : rows) row.gf_normalized = max_mean > 0.0 ? row.gf_raw_mean / max_mean : 0.0;
    return rows;
}

void save_gf_scan_csv(const std::filesystem::path& path, const std::vector<GfScanRow>& rows) {
    CsvTable table;
    table.header = {"distance", "gf_normalized", "gf_raw_mean", "gf_raw_std"};
    for (const auto& row : rows)
        table.rows.push_back({format_g17(row.distance), format_g17(row.gf_normalized),
                              format_g17(row.gf_raw_mean), format_g17(row.gf_raw_std)});
    write_csv(path, table);
}

}  // namespace selftrain
