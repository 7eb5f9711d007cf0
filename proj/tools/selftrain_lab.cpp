// selftrain-lab: data generation, training, tensor initialization, theory
// tables and experiment sweeps for one-hidden-layer ReLU teacher-student
// recovery on Gaussian data. All outputs are CSV.
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "selftrain/csv.hpp"
#include "selftrain/experiment.hpp"
#include "selftrain/metrics.hpp"
#include "selftrain/selftrain.hpp"
#include "selftrain/tensorinit.hpp"
#include "selftrain/theory.hpp"

namespace fs = std::filesystem;
using namespace selftrain;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_divergence = 3;

struct GenArgs {
    int d = 50, K = 10;
    long N = 1000, M = 0;
    double delta = 1.0, delta_tilde = 1.0, half_range = 2.5;
    std::uint64_t seed = 1;
    std::string out = "data";
};

int cmd_gen(const GenArgs& a) {
    fs::create_directories(a.out);
    const RngSeed seed{a.seed, 0};
    const Eigen::MatrixXd w_star =
        sample_ground_truth(a.d, a.K, a.half_range, substream(seed, fnv1a64("teacher")));
    const NetworkModel teacher{w_star, Activation::ReLU};
    save_weights_csv(fs::path(a.out) / "teacher.csv", teacher);

    const RngSeed lab_seed = substream(seed, fnv1a64("labeled"));
    const LabeledSet labeled =
        make_labeled_set(teacher, a.N, GaussianSpec{a.d, a.delta}, lab_seed);
    save_labeled_csv(fs::path(a.out) / "labeled.csv", labeled, lab_seed);

    if (a.M > 0) {
        const RngSeed unl_seed = substream(seed, fnv1a64("unlabeled"));
        const UnlabeledSet unlabeled =
            make_unlabeled_set(a.M, GaussianSpec{a.d, a.delta_tilde}, unl_seed);
        save_unlabeled_csv(fs::path(a.out) / "unlabeled.csv", unlabeled, unl_seed);
    }
    std::cout << "wrote teacher.csv, labeled.csv"
              << (a.M > 0 ? ", unlabeled.csv" : "") << " under " << a.out << "\n";
    return exit_ok;
}

struct TrainArgs {
    std::string labeled, unlabeled, init, wstar;
    double lambda = -1.0;  // <0: default policy
    std::string eta = "theory";
    std::string beta = "0";
    int T = 10, L_max = 1000;
    double rel_tol = 1e-4;
    bool repartition = true;
    std::uint64_t seed = 1;
    std::string out = "train_out";
};

int cmd_train(const TrainArgs& a) {
    const LabeledSet labeled = load_labeled_csv(a.labeled);
    UnlabeledSet unlabeled;
    unlabeled.spec = GaussianSpec{static_cast<int>(labeled.inputs.cols()), 1.0};
    unlabeled.inputs.resize(0, labeled.inputs.cols());
    if (!a.unlabeled.empty()) unlabeled = load_unlabeled_csv(a.unlabeled);

    const NetworkModel init = load_weights_csv(a.init);
    const int K = static_cast<int>(init.neuron_count());
    const int d = static_cast<int>(init.input_dim());

    TrainConfig cfg;
    double lambda = a.lambda;
    if (unlabeled.size() == 0) lambda = 1.0;
    else if (lambda < 0.0) lambda = default_lambda(labeled.size(), K, d);
    cfg.weights = RiskWeights(lambda);
    cfg.T = a.T;
    cfg.L_max = a.L_max;
    cfg.rel_tol = a.rel_tol;
    cfg.repartition_each_outer = a.repartition;
    cfg.seed = RngSeed{a.seed, 0};

    if (a.eta == "theory" || a.beta == "theory") {
        const SpectrumParams spec = spectrum_of(init.weights);
        auto [gmin, gmax] =
            hessian_bounds(lambda, labeled.spec.std, unlabeled.spec.std, spec);
        auto [eta, beta] = theory_step_and_momentum(gmin, gmax);
        cfg.eta = a.eta == "theory" ? eta : std::stod(a.eta);
        cfg.beta = a.beta == "theory" ? beta : std::stod(a.beta);
    } else {
        cfg.eta = std::stod(a.eta);
        cfg.beta = std::stod(a.beta);
    }

    TrainReferences refs;
    if (!a.wstar.empty()) {
        const NetworkModel truth = load_weights_csv(a.wstar);
        refs.w_star = truth.weights;
        const double lhat = unlabeled.size() > 0
                                ? lambda_hat(lambda, labeled.spec.std, unlabeled.spec.std)
                                : 1.0;
        refs.w_bar = lhat * truth.weights + (1.0 - lhat) * init.weights;
    }

    const TrainResult res =
        self_train(init.weights, init.activation, labeled, unlabeled, cfg, refs);
    fs::create_directories(a.out);
    save_trace_csv(fs::path(a.out) / "trace.csv", res.trace);
    save_weights_csv(fs::path(a.out) / "final.csv",
                     NetworkModel{res.weights, init.activation});
    std::cout << "eta=" << cfg.eta << " beta=" << cfg.beta << " lambda=" << lambda
              << " outer_iters=" << res.trace.outer.size() << " stop="
              << (res.trace.stop_reason == StopReason::Converged ? "converged"
                                                                 : "max_iterations")
              << "\n";
    if (refs.w_star)
        std::cout << "final_rel_error=" << relative_error(res.weights, *refs.w_star) << "\n";
    return exit_ok;
}

struct InitArgs {
    std::string labeled;
    int K = 10;
    std::uint64_t seed = 1;
    std::string out = "w0.csv";
    int n_restarts = 20, n_iters = 100;
    double tol = 1e-10;
};

int cmd_init(const InitArgs& a) {
    const LabeledSet labeled = load_labeled_csv(a.labeled);
    PowerOptions opts{a.n_restarts, a.n_iters, a.tol};
    TensorInitDiagnostics diag;
    const Eigen::MatrixXd w0 =
        tensor_initialize(labeled, a.K, RngSeed{a.seed, 0}, opts, &diag);
    save_weights_csv(a.out, NetworkModel{w0, Activation::ReLU});
    nlohmann::json report{{"n_used", diag.n_used},
                          {"subspace_residual", diag.subspace_residual},
                          {"decomposition_residual", diag.decomposition_residual},
                          {"condition_number", diag.condition_number}};
    std::cout << report.dump() << "\n";
    return exit_ok;
}

struct RhoArgs {
    std::string activation = "relu";
    std::vector<double> deltas;
    int grid = 0;
    double grid_max = 2.0;
    double sigma_K = 1.0;
    std::string out;
};

int cmd_rho(const RhoArgs& a) {
    const Activation act = activation_from_name(a.activation);
    std::vector<double> deltas = a.deltas;
    if (a.grid > 0) {
        deltas.clear();
        for (int i = 1; i <= a.grid; ++i)
            deltas.push_back(a.grid_max * static_cast<double>(i) / a.grid);
    }
    if (deltas.empty()) deltas = {1.0};
    CsvTable table;
    table.header = {"delta", "H0", "H1", "H2", "J0", "J2", "rho"};
    for (double delta : deltas) {
        table.rows.push_back({format_g17(delta),
                              format_g17(moment_H(0, delta, a.sigma_K, act)),
                              format_g17(moment_H(1, delta, a.sigma_K, act)),
                              format_g17(moment_H(2, delta, a.sigma_K, act)),
                              format_g17(moment_J(0, delta, a.sigma_K, act)),
                              format_g17(moment_J(2, delta, a.sigma_K, act)),
                              format_g17(rho(delta, a.sigma_K, act))});
    }
    if (a.out.empty()) {
        for (std::size_t i = 0; i < table.header.size(); ++i)
            std::cout << (i ? "," : "") << table.header[i];
        std::cout << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i];
            std::cout << "\n";
        }
    } else {
        write_csv(a.out, table);
    }
    return exit_ok;
}

struct ExpArgs {
    std::string name;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    int trials = 0;
};

int cmd_exp(const ExpArgs& a) {
    ExperimentConfig cfg;
    if (!a.config.empty()) cfg = load_experiment_config(a.config);
    if (!a.name.empty()) cfg.experiment = experiment_from_name(a.name);
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.seed_set) cfg.master_seed = a.seed;
    if (a.workers > 0) cfg.workers = a.workers;
    if (a.trials > 0) cfg.trials = a.trials;

    switch (cfg.experiment) {
        case ExperimentKind::PhaseTransition: {
            const auto cells = run_phase_transition(cfg);
            std::cout << "phase grid: " << cells.size() << " cells -> " << cfg.output_dir
                      << "/phase.csv\n";
            break;
        }
        case ExperimentKind::GfLinearity: {
            std::vector<double> radii = cfg.gf_radii;
            if (radii.empty())
                for (int i = 0; i <= 10; ++i) radii.push_back(0.05 * i);
            const RngSeed seed{cfg.master_seed, 0};
            const Eigen::MatrixXd w_star = sample_ground_truth(
                cfg.d, cfg.K, cfg.teacher_half_range, substream(seed, fnv1a64("teacher")));
            const auto rows = gf_vs_distance_scan(w_star, radii, cfg.trials, cfg.delta,
                                                  GfMethod::Closed,
                                                  substream(seed, fnv1a64("gf")));
            fs::create_directories(cfg.output_dir);
            save_gf_scan_csv(fs::path(cfg.output_dir) / "gf_scan.csv", rows);
            std::cout << "gf scan: " << rows.size() << " radii -> " << cfg.output_dir
                      << "/gf_scan.csv\n";
            break;
        }
        case ExperimentKind::LandscapeSlice: {
            const RngSeed seed{cfg.master_seed, 0};
            const Eigen::MatrixXd w_star = sample_ground_truth(
                cfg.d, cfg.K, cfg.teacher_half_range, substream(seed, fnv1a64("teacher")));
            const NetworkModel teacher{w_star, Activation::ReLU};
            const LabeledSet labeled =
                make_labeled_set(teacher, cfg.N_grid.front(), GaussianSpec{cfg.d, cfg.delta},
                                 substream(seed, fnv1a64("labeled")));
            const long M = cfg.M_grid.front();
            UnlabeledSet unlabeled;
            unlabeled.spec = GaussianSpec{cfg.d, cfg.delta_tilde};
            unlabeled.inputs.resize(0, cfg.d);
            if (M > 0)
                unlabeled = make_unlabeled_set(M, GaussianSpec{cfg.d, cfg.delta_tilde},
                                               substream(seed, fnv1a64("unlabeled")));
            auto eng = make_engine(seed, "init-perturbation");
            Eigen::MatrixXd U = draw_standard_normal(eng, w_star.rows(), w_star.cols());
            const Eigen::MatrixXd w_a =
                w_star + U * (cfg.init.radius * w_star.norm() / U.norm());
            const double lambda =
                M > 0 ? default_lambda(labeled.size(), cfg.K, cfg.d) : 1.0;
            const auto rows = run_landscape_slice(
                NetworkModel{w_a, Activation::ReLU}, w_star, 31, labeled, unlabeled,
                RiskWeights(lambda), McSpec{20000, substream(seed, fnv1a64("mc"))});
            fs::create_directories(cfg.output_dir);
            write_landscape_csv(fs::path(cfg.output_dir) / "landscape.csv", rows);
            std::cout << "landscape slice -> " << cfg.output_dir << "/landscape.csv\n";
            break;
        }
        default: {
            const ExperimentResult res = run_experiment(cfg);
            std::cout << experiment_name(cfg.experiment) << ": " << res.trials.size()
                      << " trials over " << res.aggregates.size() << " grid points -> "
                      << cfg.output_dir << "\n";
            break;
        }
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-training laboratory for one-hidden-layer ReLU networks"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* sgen = app.add_subcommand("gen", "generate teacher weights and datasets");
    sgen->add_option("--d", gen.d);
    sgen->add_option("--K", gen.K);
    sgen->add_option("--N", gen.N);
    sgen->add_option("--M", gen.M);
    sgen->add_option("--delta", gen.delta);
    sgen->add_option("--delta-tilde", gen.delta_tilde);
    sgen->add_option("--half-range", gen.half_range);
    sgen->add_option("--seed", gen.seed);
    sgen->add_option("--out", gen.out);

    TrainArgs train;
    auto* strain = app.add_subcommand("train", "run iterative self-training");
    strain->add_option("--labeled", train.labeled)->required();
    strain->add_option("--unlabeled", train.unlabeled);
    strain->add_option("--init", train.init)->required();
    strain->add_option("--wstar", train.wstar);
    strain->add_option("--lambda", train.lambda);
    strain->add_option("--eta", train.eta);
    strain->add_option("--beta", train.beta);
    strain->add_option("--T", train.T);
    strain->add_option("--outer", train.L_max);
    strain->add_option("--tol", train.rel_tol);
    strain->add_flag("--repartition,!--no-repartition", train.repartition);
    strain->add_option("--seed", train.seed);
    strain->add_option("--out", train.out);

    InitArgs init;
    auto* sinit = app.add_subcommand("init", "tensor-moment initialization");
    sinit->add_option("--labeled", init.labeled)->required();
    sinit->add_option("--K", init.K)->required();
    sinit->add_option("--seed", init.seed);
    sinit->add_option("--out", init.out);
    sinit->add_option("--restarts", init.n_restarts);
    sinit->add_option("--iters", init.n_iters);
    sinit->add_option("--tol", init.tol);

    RhoArgs rho;
    auto* srho = app.add_subcommand("rho", "Gaussian moment and curvature tables");
    srho->add_option("--activation", rho.activation);
    srho->add_option("--delta", rho.deltas);
    srho->add_option("--grid", rho.grid);
    srho->add_option("--grid-max", rho.grid_max);
    srho->add_option("--sigma-K", rho.sigma_K);
    srho->add_option("--out", rho.out);

    ExpArgs exp;
    auto* sexp = app.add_subcommand("exp", "run an experiment sweep");
    sexp->add_option("name", exp.name,
                     "GfLinearity|ErrorVsM|RateVsM|DeltaSweep|LambdaSweep|PhaseTransition|"
                     "LandscapeSlice");
    sexp->add_option("--config", exp.config);
    sexp->add_option("--out", exp.out);
    sexp->add_option("--seed", exp.seed)->each([&](const std::string&) { exp.seed_set = true; });
    sexp->add_option("--workers", exp.workers);
    sexp->add_option("--trials", exp.trials);

    ExpArgs land;
    auto* sland = app.add_subcommand("landscape", "risk slice between two weight matrices");
    sland->add_option("--config", land.config);
    sland->add_option("--out", land.out);
    sland->add_option("--seed", land.seed)->each([&](const std::string&) { land.seed_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (sgen->parsed()) return cmd_gen(gen);
        if (strain->parsed()) return cmd_train(train);
        if (sinit->parsed()) return cmd_init(init);
        if (srho->parsed()) return cmd_rho(rho);
        if (sexp->parsed()) return cmd_exp(exp);
        if (sland->parsed()) {
            land.name = "LandscapeSlice";
            return cmd_exp(land);
        }
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_divergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    }
    return exit_ok;
}
