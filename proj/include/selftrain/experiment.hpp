#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selftrain/risk.hpp"
#include "selftrain/selftrain.hpp"
#include "selftrain/synth.hpp"

namespace selftrain {

enum class ExperimentKind {
    GfLinearity,
    ErrorVsM,
    RateVsM,
    DeltaSweep,
    LambdaSweep,
    PhaseTransition,
    LandscapeSlice,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

struct LambdaPolicy {
    enum class Type { Default, Fixed, Grid } type = Type::Default;
    double value = 1.0;               // Fixed
    std::vector<double> grid;         // Grid
};

struct InitPolicy {
    enum class Type { Tensor, PerturbedTruth } type = Type::PerturbedTruth;
    double radius = 0.5;  // in (0,1]
};

struct TrainSettings {
    // eta/beta: explicit values, or derived from the Hessian bounds at the
    // initial weights when theory_eta / heavy_ball are set.
    bool theory_eta = true;
    double eta = 0.1;
    bool heavy_ball = false;
    double beta = 0.0;
    int T = 10;
    int L_max = 1000;
    double rel_tol = 1e-4;
    bool repartition_each_outer = true;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::ErrorVsM;
    int d = 50;
    int K = 10;
    std::vector<int> d_grid;            // PhaseTransition
    std::vector<long> N_grid{300};
    std::vector<long> M_grid{0};
    double delta = 1.0;
    double delta_tilde = 1.0;
    std::vector<double> delta_tilde_grid;  // DeltaSweep
    LambdaPolicy lambda_policy;
    int trials = 50;
    std::uint64_t master_seed = 1;
    TrainSettings train;
    InitPolicy init;
    bool fixed_teacher = false;
    double teacher_half_range = 2.5;
    int rate_window = 50;
    std::vector<double> gf_radii;       // GfLinearity; defaults filled if empty
    int workers = 0;                    // 0 -> SELFTRAIN_LAB_WORKERS or hardware
    std::string output_dir = "out";
};

// Strict JSON parsing: unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string canonical_config_json(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct ParamPoint {
    int d = 0;
    int K = 0;
    long N = 0;
    long M = 0;
    double delta = 1.0;
    double delta_tilde = 1.0;
    double lambda = 1.0;
};

struct TrialRecord {
    int point_index = 0;
    int trial = 0;
    ParamPoint point;
    std::uint64_t seed_stream = 0;
    double final_rel_error = 0.0;
    double rate = std::numeric_limits<double>::quiet_NaN();
    StopReason stop_reason = StopReason::MaxIterations;
    int outer_iters = 0;
    bool failed = false;
    std::string error;
    double wall_ms = 0.0;
};

struct AggregateRow {
    ParamPoint point;
    int trials = 0;
    double err_mean = 0.0, err_std = 0.0, err_median = 0.0;
    double rate_mean = 0.0, rate_std = 0.0, rate_median = 0.0;
    int rate_count = 0;
    double success_fraction = 0.0;
};

struct FitRow {
    std::string quantity;  // "err_median" / "rate_median"
    long N = 0;
    double intercept = 0.0, slope = 0.0, r_squared = 0.0;
};

struct ExperimentResult {
    std::vector<TrialRecord> trials;
    std::vector<AggregateRow> aggregates;
    std::vector<FitRow> fits;
};

// Runs each grid point x trial (parallel over trials, per-trial derived seed
// streams, rows sorted before writing) and emits trials.csv / aggregate.csv
// (and fits.csv where a 1/sqrt(M) fit applies) under cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct PhaseCell {
    int d = 0;
    long N = 0;
    long M = 0;
    double success_fraction = 0.0;
};

// Success-fraction grid, CSV `d,N,M,success_fraction`.
std::vector<PhaseCell> run_phase_transition(const ExperimentConfig& cfg);

struct LandscapeRow {
    double t = 0.0;
    double empirical_risk = 0.0;
    double population_risk_mc = 0.0;
};

// Risks along W(t) = (1-t) W_a + t W_b for t uniform on [-0.25, 1.25].
// Pseudo labels come from W_a (the current teacher); the population risk
// target is the convex combination lambda_hat W_b + (1-lambda_hat) W_a.
std::vector<LandscapeRow> run_landscape_slice(const NetworkModel& w_a,
                                              const Eigen::MatrixXd& w_b, int n_points,
                                              const LabeledSet& labeled,
                                              const UnlabeledSet& unlabeled,
                                              RiskWeights weights, const McSpec& mc);

void write_trials_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                      const std::vector<TrialRecord>& rows);
void write_aggregate_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                         const std::vector<AggregateRow>& rows);
void write_fits_csv(const std::filesystem::path& path, const std::vector<FitRow>& rows);
void write_phase_csv(const std::filesystem::path& path, const std::vector<PhaseCell>& rows);
void write_landscape_csv(const std::filesystem::path& path,
                         const std::vector<LandscapeRow>& rows);

int resolve_workers(int requested);

}  // namespace selftrain
