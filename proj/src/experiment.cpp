#include "selftrain/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "selftrain/csv.hpp"
#include "selftrain/metrics.hpp"
#include "selftrain/tensorinit.hpp"
#include "selftrain/theory.hpp"

namespace selftrain {

using nlohmann::json;

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::GfLinearity: return "GfLinearity";
        case ExperimentKind::ErrorVsM: return "ErrorVsM";
        case ExperimentKind::RateVsM: return "RateVsM";
        case ExperimentKind::DeltaSweep: return "DeltaSweep";
        case ExperimentKind::LambdaSweep: return "LambdaSweep";
        case ExperimentKind::PhaseTransition: return "PhaseTransition";
        case ExperimentKind::LandscapeSlice: return "LandscapeSlice";
    }
    return "?";
}

ExperimentKind experiment_from_name(const std::string& name) {
    for (auto kind : {ExperimentKind::GfLinearity, ExperimentKind::ErrorVsM,
                      ExperimentKind::RateVsM, ExperimentKind::DeltaSweep,
                      ExperimentKind::LambdaSweep, ExperimentKind::PhaseTransition,
                      ExperimentKind::LandscapeSlice})
        if (experiment_name(kind) == name) return kind;
    throw std::invalid_argument("unknown experiment: " + name);
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) { ok = true; break; }
        if (!ok) throw std::invalid_argument("unknown config key " + where + "." + it.key());
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    reject_unknown_keys(j, {"experiment", "d", "K", "d_grid", "N_grid", "M_grid", "delta",
                            "delta_tilde", "delta_tilde_grid", "lambda_policy", "trials",
                            "master_seed", "train", "init", "fixed_teacher",
                            "teacher_half_range", "rate_window", "gf_radii", "workers",
                            "output_dir"},
                        "config");
    ExperimentConfig cfg;
    if (j.contains("experiment")) cfg.experiment = experiment_from_name(j.at("experiment"));
    if (j.contains("d")) cfg.d = j.at("d");
    if (j.contains("K")) cfg.K = j.at("K");
    if (j.contains("d_grid")) cfg.d_grid = j.at("d_grid").get<std::vector<int>>();
    if (j.contains("N_grid")) cfg.N_grid = j.at("N_grid").get<std::vector<long>>();
    if (j.contains("M_grid")) cfg.M_grid = j.at("M_grid").get<std::vector<long>>();
    if (j.contains("delta")) cfg.delta = j.at("delta");
    if (j.contains("delta_tilde")) cfg.delta_tilde = j.at("delta_tilde");
    if (j.contains("delta_tilde_grid"))
        cfg.delta_tilde_grid = j.at("delta_tilde_grid").get<std::vector<double>>();
    if (j.contains("lambda_policy")) {
        const json& lp = j.at("lambda_policy");
        reject_unknown_keys(lp, {"type", "value", "grid"}, "lambda_policy");
        const std::string type = lp.at("type");
        if (type == "default") {
            cfg.lambda_policy.type = LambdaPolicy::Type::Default;
        } else if (type == "fixed") {
            cfg.lambda_policy.type = LambdaPolicy::Type::Fixed;
            cfg.lambda_policy.value = lp.at("value");
        } else if (type == "grid") {
            cfg.lambda_policy.type = LambdaPolicy::Type::Grid;
            cfg.lambda_policy.grid = lp.at("grid").get<std::vector<double>>();
        } else {
            throw std::invalid_argument("lambda_policy.type must be default|fixed|grid");
        }
    }
    if (j.contains("trials")) cfg.trials = j.at("trials");
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("train")) {
        const json& t = j.at("train");
        reject_unknown_keys(t, {"eta", "beta", "T", "L_max", "rel_tol",
                                "repartition_each_outer"},
                            "train");
        if (t.contains("eta")) {
            if (t.at("eta").is_string()) {
                if (t.at("eta") != "theory")
                    throw std::invalid_argument("train.eta must be a number or \"theory\"");
                cfg.train.theory_eta = true;
            } else {
                cfg.train.theory_eta = false;
                cfg.train.eta = t.at("eta");
            }
        }
        if (t.contains("beta")) {
            if (t.at("beta").is_string()) {
                if (t.at("beta") != "theory")
                    throw std::invalid_argument("train.beta must be a number or \"theory\"");
                cfg.train.heavy_ball = true;
            } else {
                cfg.train.heavy_ball = false;
                cfg.train.beta = t.at("beta");
            }
        }
        if (t.contains("T")) cfg.train.T = t.at("T");
        if (t.contains("L_max")) cfg.train.L_max = t.at("L_max");
        if (t.contains("rel_tol")) cfg.train.rel_tol = t.at("rel_tol");
        if (t.contains("repartition_each_outer"))
            cfg.train.repartition_each_outer = t.at("repartition_each_outer");
    }
    if (j.contains("init")) {
        const json& in = j.at("init");
        reject_unknown_keys(in, {"policy", "radius"}, "init");
        if (in.contains("policy")) {
            const std::string p = in.at("policy");
            if (p == "perturbed_truth") cfg.init.type = InitPolicy::Type::PerturbedTruth;
            else if (p == "tensor") cfg.init.type = InitPolicy::Type::Tensor;
            else throw std::invalid_argument("init.policy must be perturbed_truth|tensor");
        }
        if (in.contains("radius")) cfg.init.radius = in.at("radius");
    }
    if (j.contains("fixed_teacher")) cfg.fixed_teacher = j.at("fixed_teacher");
    if (j.contains("teacher_half_range")) cfg.teacher_half_range = j.at("teacher_half_range");
    if (j.contains("rate_window")) cfg.rate_window = j.at("rate_window");
    if (j.contains("gf_radii")) cfg.gf_radii = j.at("gf_radii").get<std::vector<double>>();
    if (j.contains("workers")) cfg.workers = j.at("workers");
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir");

    if (cfg.d < 1 || cfg.K < 1) throw std::invalid_argument("config: d, K must be >= 1");
    if (cfg.trials < 1) throw std::invalid_argument("config: trials >= 1");
    if (cfg.N_grid.empty() || cfg.M_grid.empty())
        throw std::invalid_argument("config: N_grid and M_grid must be non-empty");
    if (cfg.init.type == InitPolicy::Type::PerturbedTruth &&
        !(cfg.init.radius > 0.0 && cfg.init.radius <= 1.0))
        throw std::invalid_argument("config: init.radius must be in (0,1]");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open config: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_experiment_config(text);
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = experiment_name(cfg.experiment);
    j["d"] = cfg.d;
    j["K"] = cfg.K;
    j["d_grid"] = cfg.d_grid;
    j["N_grid"] = cfg.N_grid;
    j["M_grid"] = cfg.M_grid;
    j["delta"] = cfg.delta;
    j["delta_tilde"] = cfg.delta_tilde;
    j["delta_tilde_grid"] = cfg.delta_tilde_grid;
    switch (cfg.lambda_policy.type) {
        case LambdaPolicy::Type::Default: j["lambda_policy"] = {{"type", "default"}}; break;
        case LambdaPolicy::Type::Fixed:
            j["lambda_policy"] = {{"type", "fixed"}, {"value", cfg.lambda_policy.value}};
            break;
        case LambdaPolicy::Type::Grid:
            j["lambda_policy"] = {{"type", "grid"}, {"grid", cfg.lambda_policy.grid}};
            break;
    }
    j["trials"] = cfg.trials;
    j["master_seed"] = cfg.master_seed;
    j["train"] = {{"eta", cfg.train.theory_eta ? json("theory") : json(cfg.train.eta)},
                  {"beta", cfg.train.heavy_ball ? json("theory") : json(cfg.train.beta)},
                  {"T", cfg.train.T},
                  {"L_max", cfg.train.L_max},
                  {"rel_tol", cfg.train.rel_tol},
                  {"repartition_each_outer", cfg.train.repartition_each_outer}};
    j["init"] = {{"policy", cfg.init.type == InitPolicy::Type::Tensor ? "tensor"
                                                                      : "perturbed_truth"},
                 {"radius", cfg.init.radius}};
    j["fixed_teacher"] = cfg.fixed_teacher;
    j["teacher_half_range"] = cfg.teacher_half_range;
    j["rate_window"] = cfg.rate_window;
    j["gf_radii"] = cfg.gf_radii;
    return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    return fnv1a64(canonical_config_json(cfg));
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SELFTRAIN_LAB_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

double lambda_for_point(const ExperimentConfig& cfg, long N, long M, double explicit_lambda) {
    if (M == 0) return 1.0;  // no unlabeled term: pure supervised
    switch (cfg.lambda_policy.type) {
        case LambdaPolicy::Type::Default:
            return default_lambda(N, cfg.K, cfg.d);
        case LambdaPolicy::Type::Fixed:
            return cfg.lambda_policy.value;
        case LambdaPolicy::Type::Grid:
            return explicit_lambda;
    }
    return 1.0;
}

std::vector<ParamPoint> build_points(const ExperimentConfig& cfg) {
    std::vector<ParamPoint> points;
    switch (cfg.experiment) {
        case ExperimentKind::ErrorVsM:
        case ExperimentKind::RateVsM: {
            for (long N : cfg.N_grid)
                for (long M : cfg.M_grid)
                    points.push_back(ParamPoint{cfg.d, cfg.K, N, M, cfg.delta, cfg.delta_tilde,
                                                lambda_for_point(cfg, N, M, 1.0)});
            break;
        }
        case ExperimentKind::DeltaSweep: {
            std::vector<double> grid = cfg.delta_tilde_grid;
            if (grid.empty()) grid = {0.25, 0.5, 1.0, 2.0, 4.0};
            for (double dt : grid)
                points.push_back(ParamPoint{cfg.d, cfg.K, cfg.N_grid.front(), cfg.M_grid.front(),
                                            cfg.delta, dt,
                                            lambda_for_point(cfg, cfg.N_grid.front(),
                                                             cfg.M_grid.front(), 1.0)});
            break;
        }
        case ExperimentKind::LambdaSweep: {
            if (cfg.lambda_policy.type != LambdaPolicy::Type::Grid ||
                cfg.lambda_policy.grid.empty())
                throw std::invalid_argument("LambdaSweep requires lambda_policy.type == grid");
            for (long N : cfg.N_grid)
                for (double lam : cfg.lambda_policy.grid)
                    points.push_back(ParamPoint{cfg.d, cfg.K, N, cfg.M_grid.front(), cfg.delta,
                                                cfg.delta_tilde, lam});
            break;
        }
        default:
            throw std::invalid_argument("run_experiment: " + experiment_name(cfg.experiment) +
                                        " has a dedicated runner");
    }
    return points;
}

Eigen::MatrixXd perturbed_truth_init(const Eigen::MatrixXd& w_star, double radius,
                                     RngSeed seed) {
    auto eng = make_engine(seed, "init-perturbation");
    Eigen::MatrixXd U = draw_standard_normal(eng, w_star.rows(), w_star.cols());
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    // uniform in the relative-radius ball
    const double frac =
        radius * std::pow(uni(eng), 1.0 / static_cast<double>(w_star.size()));
    const double un = U.norm();
    if (un == 0.0) return w_star;
    return w_star + U * (frac * w_star.norm() / un);
}

struct TrialOutcome {
    TrialRecord record;
};

TrialRecord run_single_trial(const ExperimentConfig& cfg, const ParamPoint& pt,
                             int point_index, int trial) {
    TrialRecord rec;
    rec.point_index = point_index;
    rec.trial = trial;
    rec.point = pt;
    // Trial streams depend on the trial index only, so grid points share
    // randomness (common random numbers across M / delta_tilde sweeps).
    const RngSeed trial_seed{cfg.master_seed, static_cast<std::uint64_t>(trial)};
    rec.seed_stream = trial_seed.stream;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const RngSeed teacher_seed =
            cfg.fixed_teacher ? RngSeed{cfg.master_seed, 0} : trial_seed;
        const Eigen::MatrixXd w_star =
            sample_ground_truth(pt.d, pt.K, cfg.teacher_half_range, teacher_seed);
        const NetworkModel teacher{w_star, Activation::ReLU};

        const LabeledSet labeled = make_labeled_set(
            teacher, pt.N, GaussianSpec{pt.d, pt.delta}, substream(trial_seed, fnv1a64("labeled")));
        UnlabeledSet unlabeled;
        unlabeled.spec = GaussianSpec{pt.d, pt.delta_tilde};
        unlabeled.inputs.resize(0, pt.d);
        if (pt.M > 0)
            unlabeled = make_unlabeled_set(pt.M, GaussianSpec{pt.d, pt.delta_tilde},
                                           substream(trial_seed, fnv1a64("unlabeled")));

        Eigen::MatrixXd w0;
        if (cfg.init.type == InitPolicy::Type::PerturbedTruth) {
            w0 = perturbed_truth_init(w_star, cfg.init.radius,
                                      substream(trial_seed, fnv1a64("init")));
        } else {
            w0 = tensor_initialize(labeled, pt.K, substream(trial_seed, fnv1a64("tensorinit")));
        }

        TrainConfig tc;
        tc.weights = RiskWeights(pt.lambda);
        tc.T = cfg.train.T;
        tc.L_max = cfg.train.L_max;
        tc.rel_tol = cfg.train.rel_tol;
        tc.repartition_each_outer = cfg.train.repartition_each_outer;
        tc.seed = substream(trial_seed, fnv1a64("train"));
        if (cfg.train.theory_eta || cfg.train.heavy_ball) {
            const SpectrumParams spec = spectrum_of(w0);
            auto [gmin, gmax] = hessian_bounds(pt.lambda, pt.delta, pt.delta_tilde, spec);
            auto [eta, beta] = theory_step_and_momentum(gmin, gmax);
            tc.eta = cfg.train.theory_eta ? eta : cfg.train.eta;
            tc.beta = cfg.train.heavy_ball ? beta : cfg.train.beta;
        } else {
            tc.eta = cfg.train.eta;
            tc.beta = cfg.train.beta;
        }

        TrainReferences refs;
        refs.w_star = w_star;
        const double lhat =
            pt.M > 0 ? lambda_hat(pt.lambda, pt.delta, pt.delta_tilde) : 1.0;
        refs.w_bar = lhat * w_star + (1.0 - lhat) * w0;

        const TrainResult res = self_train(w0, Activation::ReLU, labeled, unlabeled, tc, refs);
        rec.final_rel_error = relative_error(res.weights, w_star);
        rec.stop_reason = res.trace.stop_reason;
        rec.outer_iters = static_cast<int>(res.trace.outer.size());
        try {
            const auto dists = res.trace.distances_to_wstar();
            rec.rate = convergence_rate(dists, cfg.rate_window).rate;
        } catch (const std::invalid_argument&) {
            // fewer than 2 usable distances: rate stays NaN
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        rec.error = msg;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return rec;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    if (v.empty()) {
        mean = sd = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const std::vector<ParamPoint> points = build_points(cfg);
    const int trials = cfg.trials;
    const long n_items = static_cast<long>(points.size()) * trials;
    ExperimentResult result;
    result.trials.resize(static_cast<std::size_t>(n_items));
    const int workers = resolve_workers(cfg.workers);

#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (long item = 0; item < n_items; ++item) {
        const int point_index = static_cast<int>(item / trials);
        const int trial = static_cast<int>(item % trials);
        result.trials[static_cast<std::size_t>(item)] =
            run_single_trial(cfg, points[static_cast<std::size_t>(point_index)], point_index,
                             trial);
    }

    for (std::size_t p = 0; p < points.size(); ++p) {
        AggregateRow row;
        row.point = points[p];
        std::vector<double> errs, rates;
        int successes = 0, counted = 0;
        for (int t = 0; t < trials; ++t) {
            const TrialRecord& rec = result.trials[p * static_cast<std::size_t>(trials) +
                                                   static_cast<std::size_t>(t)];
            if (rec.failed) continue;
            ++counted;
            errs.push_back(rec.final_rel_error);
            if (std::isfinite(rec.rate)) rates.push_back(rec.rate);
            if (rec.final_rel_error <= success_threshold) ++successes;
        }
        row.trials = counted;
        mean_std(errs, row.err_mean, row.err_std);
        row.err_median = median_of(errs);
        mean_std(rates, row.rate_mean, row.rate_std);
        row.rate_median = median_of(rates);
        row.rate_count = static_cast<int>(rates.size());
        row.success_fraction = counted > 0 ? static_cast<double>(successes) / counted : 0.0;
        result.aggregates.push_back(row);
    }

    if (cfg.experiment == ExperimentKind::ErrorVsM || cfg.experiment == ExperimentKind::RateVsM) {
        for (long N : cfg.N_grid) {
            std::vector<std::pair<long, double>> err_pts, rate_pts;
            for (const auto& row : result.aggregates) {
                if (row.point.N != N || row.point.M <= 0) continue;
                err_pts.emplace_back(row.point.M, row.err_median);
                if (row.rate_count > 0) rate_pts.emplace_back(row.point.M, row.rate_median);
            }
            auto add_fit = [&](const char* what, const std::vector<std::pair<long, double>>& pts) {
                if (pts.size() < 2) return;
                const FitResult fit = fit_inverse_sqrt(pts);
                result.fits.push_back(FitRow{what, N, fit.intercept, fit.slope, fit.r_squared});
            };
            add_fit("err_median", err_pts);
            add_fit("rate_median", rate_pts);
        }
    }

    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path dir(cfg.output_dir);
    write_trials_csv(dir / "trials.csv", cfg, result.trials);
    write_aggregate_csv(dir / "aggregate.csv", cfg, result.aggregates);
    if (!result.fits.empty()) write_fits_csv(dir / "fits.csv", result.fits);
    return result;
}

std::vector<PhaseCell> run_phase_transition(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::PhaseTransition)
        throw std::invalid_argument("run_phase_transition: wrong experiment kind");
    std::vector<int> dims = cfg.d_grid.empty() ? std::vector<int>{cfg.d} : cfg.d_grid;

    std::vector<ParamPoint> points;
    for (int d : dims)
        for (long N : cfg.N_grid)
            for (long M : cfg.M_grid) {
                ParamPoint pt{d, cfg.K, N, M, cfg.delta, cfg.delta_tilde, 1.0};
                if (M == 0) {
                    pt.lambda = 1.0;
                } else {
                    switch (cfg.lambda_policy.type) {
                        case LambdaPolicy::Type::Default:
                            pt.lambda = default_lambda(N, cfg.K, d);
                            break;
                        case LambdaPolicy::Type::Fixed:
                            pt.lambda = cfg.lambda_policy.value;
                            break;
                        case LambdaPolicy::Type::Grid:
                            throw std::invalid_argument(
                                "PhaseTransition does not take a lambda grid");
                    }
                }
                points.push_back(pt);
            }

    const int trials = cfg.trials;
    const long n_items = static_cast<long>(points.size()) * trials;
    std::vector<TrialRecord> rows(static_cast<std::size_t>(n_items));
    const int workers = resolve_workers(cfg.workers);

#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (long item = 0; item < n_items; ++item) {
        const int point_index = static_cast<int>(item / trials);
        const int trial = static_cast<int>(item % trials);
        rows[static_cast<std::size_t>(item)] = run_single_trial(
            cfg, points[static_cast<std::size_t>(point_index)], point_index, trial);
    }

    std::vector<PhaseCell> cells;
    for (std::size_t p = 0; p < points.size(); ++p) {
        PhaseCell cell{points[p].d, points[p].N, points[p].M, 0.0};
        int ok = 0, counted = 0;
        for (int t = 0; t < trials; ++t) {
            const TrialRecord& rec =
                rows[p * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)];
            if (rec.failed) continue;
            ++counted;
            if (rec.final_rel_error <= success_threshold) ++ok;
        }
        cell.success_fraction = counted > 0 ? static_cast<double>(ok) / counted : 0.0;
        cells.push_back(cell);
    }

    std::filesystem::create_directories(cfg.output_dir);
    write_phase_csv(std::filesystem::path(cfg.output_dir) / "phase.csv", cells);
    write_trials_csv(std::filesystem::path(cfg.output_dir) / "trials.csv", cfg, rows);
    return cells;
}

std::vector<LandscapeRow> run_landscape_slice(const NetworkModel& w_a,
                                              const Eigen::MatrixXd& w_b, int n_points,
                                              const LabeledSet& labeled,
                                              const UnlabeledSet& unlabeled,
                                              RiskWeights weights, const McSpec& mc) {
    if (w_a.weights.rows() != w_b.rows() || w_a.weights.cols() != w_b.cols())
        throw std::invalid_argument("run_landscape_slice: endpoint shape mismatch");
    if (n_points < 2) throw std::invalid_argument("run_landscape_slice: n_points >= 2");

    PseudoLabeledSet pseudo;
    if (weights.lambda_tilde() > 0.0) pseudo = pseudo_label(w_a, unlabeled);

    const double lhat = weights.lambda_tilde() > 0.0
                            ? lambda_hat(weights.lambda(), labeled.spec.std, unlabeled.spec.std)
                            : 1.0;
    const Eigen::MatrixXd target = lhat * w_b + (1.0 - lhat) * w_a.weights;

    std::vector<LandscapeRow> rows;
    rows.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double t = -0.25 + 1.5 * static_cast<double>(i) / (n_points - 1);
        NetworkModel model{(1.0 - t) * w_a.weights + t * w_b, w_a.activation};
        LandscapeRow row;
        row.t = t;
        row.empirical_risk = empirical_risk(model, labeled, pseudo, weights);
        row.population_risk_mc = population_risk_mc(model, target, labeled.spec,
                                                    unlabeled.spec, weights, mc);
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::vector<std::string> point_fields(const ParamPoint& pt) {
    return {std::to_string(pt.d),     std::to_string(pt.K),
            std::to_string(pt.N),     std::to_string(pt.M),
            format_g17(pt.delta),     format_g17(pt.delta_tilde),
            format_g17(pt.lambda)};
}

}  // namespace

void write_trials_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                      const std::vector<TrialRecord>& rows) {
    CsvTable table;
    table.header = {"experiment", "point",  "trial", "seed_stream", "d", "K", "N", "M",
                    "delta", "delta_tilde", "lambda", "final_rel_error", "rate",
                    "stop_reason", "outer_iters", "failed", "error", "wall_ms"};
    for (const auto& rec : rows) {
        std::vector<std::string> row{experiment_name(cfg.experiment),
                                     std::to_string(rec.point_index),
                                     std::to_string(rec.trial),
                                     std::to_string(rec.seed_stream)};
        auto pf = point_fields(rec.point);
        row.insert(row.end(), pf.begin(), pf.end());
        row.push_back(format_g17(rec.final_rel_error));
        row.push_back(format_g17(rec.rate));
        row.push_back(rec.stop_reason == StopReason::Converged ? "converged" : "max_iterations");
        row.push_back(std::to_string(rec.outer_iters));
        row.push_back(rec.failed ? "1" : "0");
        row.push_back(rec.error);
        row.push_back(format_g17(rec.wall_ms));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

void write_aggregate_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                         const std::vector<AggregateRow>& rows) {
    CsvTable table;
    table.header = {"experiment", "d", "K", "N", "M", "delta", "delta_tilde", "lambda",
                    "trials", "err_mean", "err_std", "err_median", "rate_mean", "rate_std",
                    "rate_median", "rate_count", "success_fraction", "config_hash"};
    const std::string hash = std::to_string(config_hash(cfg));
    for (const auto& agg : rows) {
        std::vector<std::string> row{experiment_name(cfg.experiment)};
        auto pf = point_fields(agg.point);
        row.insert(row.end(), pf.begin(), pf.end());
        row.push_back(std::to_string(agg.trials));
        row.push_back(format_g17(agg.err_mean));
        row.push_back(format_g17(agg.err_std));
        row.push_back(format_g17(agg.err_median));
        row.push_back(format_g17(agg.rate_mean));
        row.push_back(format_g17(agg.rate_std));
        row.push_back(format_g17(agg.rate_median));
        row.push_back(std::to_string(agg.rate_count));
        row.push_back(format_g17(agg.success_fraction));
        row.push_back(hash);
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

void write_fits_csv(const std::filesystem::path& path, const std::vector<FitRow>& rows) {
    CsvTable table;
    table.header = {"quantity", "N", "intercept", "slope", "r_squared"};
    for (const auto& fit : rows)
        table.rows.push_back({fit.quantity, std::to_string(fit.N), format_g17(fit.intercept),
                              format_g17(fit.slope), format_g17(fit.r_squared)});
    write_csv(path, table);
}

void write_phase_csv(const std::filesystem::path& path, const std::vector<PhaseCell>& rows) {
    CsvTable table;
    table.header = {"d", "N", "M", "success_fraction"};
    for (const auto& cell : rows)
        table.rows.push_back({std::to_string(cell.d), std::to_string(cell.N),
                              std::to_string(cell.M), format_g17(cell.success_fraction)});
    write_csv(path, table);
}

void write_landscape_csv(const std::filesystem::path& path,
                         const std::vector<LandscapeRow>& rows) {
    CsvTable table;
    table.header = {"t", "empirical_risk", "population_risk_mc"};
    for (const auto& row : rows)
        table.rows.push_back({format_g17(row.t), format_g17(row.empirical_risk),
                              format_g17(row.population_risk_mc)});
    write_csv(path, table);
}

}  // namespace selftrain
