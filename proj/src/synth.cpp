#include "selftrain/synth.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "selftrain/csv.hpp"

namespace selftrain {

Eigen::MatrixXd sample_ground_truth(int d, int K, double half_range, RngSeed seed) {
    if (d < 1 || K < 1) throw std::invalid_argument("sample_ground_truth: d, K must be >= 1");
    if (!(half_range > 0.0))
        throw std::invalid_argument("sample_ground_truth: half_range must be > 0");
    auto eng = make_engine(seed, "ground-truth");
    std::uniform_real_distribution<double> uni(-half_range, half_range);
    Eigen::MatrixXd W(d, K);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < K; ++j) W(i, j) = uni(eng);
    return W;
}

Eigen::MatrixXd sample_inputs(Eigen::Index n, const GaussianSpec& spec, RngSeed seed) {
    if (n < 0) throw std::invalid_argument("sample_inputs: n must be >= 0");
    if (spec.dim < 1) throw std::invalid_argument("sample_inputs: dim must be >= 1");
    if (!(spec.std > 0.0)) throw std::invalid_argument("sample_inputs: std must be > 0");
    auto eng = make_engine(seed, "inputs");
    Eigen::MatrixXd X = draw_standard_normal(eng, n, spec.dim);
    X *= spec.std;
    return X;
}

Eigen::VectorXd label_with(const NetworkModel& teacher, const Eigen::MatrixXd& inputs) {
    return forward_batch(teacher, inputs);
}

LabeledSet make_labeled_set(const NetworkModel& teacher, Eigen::Index n,
                            const GaussianSpec& spec, RngSeed seed) {
    LabeledSet set;
    set.spec = spec;
    set.inputs = sample_inputs(n, spec, seed);
    set.labels = label_with(teacher, set.inputs);
    return set;
}

UnlabeledSet make_unlabeled_set(Eigen::Index n, const GaussianSpec& spec, RngSeed seed) {
    UnlabeledSet set;
    set.spec = spec;
    set.inputs = sample_inputs(n, spec, seed);
    return set;
}

PseudoLabeledSet pseudo_label(const NetworkModel& current, const UnlabeledSet& unlabeled) {
    PseudoLabeledSet out;
    out.inputs = unlabeled.inputs;
    out.pseudo_labels = forward_batch(current, unlabeled.inputs);
    out.source_weights_hash = weights_hash(current.weights);
    return out;
}

std::vector<std::vector<Eigen::Index>> partition_disjoint(Eigen::Index n, int T, RngSeed seed) {
    if (T < 1) throw std::invalid_argument("partition_disjoint: T must be >= 1");
    if (n < T)
        throw std::invalid_argument("partition_disjoint: insufficient data (n=" +
                                    std::to_string(n) + " < T=" + std::to_string(T) + ")");
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    auto eng = make_engine(seed, "partition");
    std::shuffle(perm.begin(), perm.end(), eng);
    const Eigen::Index chunk = n / T;
    std::vector<std::vector<Eigen::Index>> subsets(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t)
        subsets[static_cast<std::size_t>(t)].assign(perm.begin() + t * chunk,
                                                    perm.begin() + (t + 1) * chunk);
    return subsets;
}

namespace {

void save_sidecar(const std::filesystem::path& data_path, const GaussianSpec& spec,
                  Eigen::Index n, RngSeed seed) {
    nlohmann::json meta{{"d", spec.dim},
                        {"std", spec.std},
                        {"n", n},
                        {"seed", {{"master", seed.master}, {"stream", seed.stream}}}};
    std::filesystem::path side = data_path;
    side += ".meta.json";
    std::ofstream out(side, std::ios::binary);
    out << meta.dump(2) << '\n';
}

}  // namespace

void save_labeled_csv(const std::filesystem::path& path, const LabeledSet& set, RngSeed seed) {
    CsvTable table;
    const Eigen::Index d = set.inputs.cols();
    for (Eigen::Index j = 0; j < d; ++j) table.header.push_back("x_" + std::to_string(j + 1));
    table.header.push_back("y");
    table.rows.reserve(static_cast<std::size_t>(set.size()));
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(static_cast<std::size_t>(d + 1));
        for (Eigen::Index j = 0; j < d; ++j) row.push_back(format_g17(set.inputs(i, j)));
        row.push_back(format_g17(set.labels(i)));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
    save_sidecar(path, set.spec, set.size(), seed);
}

void save_unlabeled_csv(const std::filesystem::path& path, const UnlabeledSet& set, RngSeed seed) {
    CsvTable table;
    const Eigen::Index d = set.inputs.cols();
    for (Eigen::Index j = 0; j < d; ++j) table.header.push_back("x_" + std::to_string(j + 1));
    table.rows.reserve(static_cast<std::size_t>(set.size()));
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(static_cast<std::size_t>(d));
        for (Eigen::Index j = 0; j < d; ++j) row.push_back(format_g17(set.inputs(i, j)));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
    save_sidecar(path, set.spec, set.size(), seed);
}

namespace {

GaussianSpec load_sidecar_spec(const std::filesystem::path& data_path, int fallback_dim) {
    std::filesystem::path side = data_path;
    side += ".meta.json";
    GaussianSpec spec{fallback_dim, 1.0};
    std::ifstream in(side, std::ios::binary);
    if (in) {
        nlohmann::json meta = nlohmann::json::parse(in);
        spec.dim = meta.value("d", fallback_dim);
        spec.std = meta.value("std", 1.0);
    }
    return spec;
}

}  // namespace

LabeledSet load_labeled_csv(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    if (table.header.empty() || table.header.back() != "y")
        throw std::runtime_error("labeled csv must end with a y column: " + path.string());
    const Eigen::Index d = static_cast<Eigen::Index>(table.header.size()) - 1;
    LabeledSet set;
    set.inputs.resize(static_cast<Eigen::Index>(table.rows.size()), d);
    set.labels.resize(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (static_cast<Eigen::Index>(row.size()) != d + 1)
            throw std::runtime_error("bad labeled row in " + path.string());
        for (Eigen::Index j = 0; j < d; ++j)
            set.inputs(static_cast<Eigen::Index>(r), j) = std::stod(row[static_cast<std::size_t>(j)]);
        set.labels(static_cast<Eigen::Index>(r)) = std::stod(row.back());
    }
    set.spec = load_sidecar_spec(path, static_cast<int>(d));
    return set;
}

UnlabeledSet load_unlabeled_csv(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    const Eigen::Index d = static_cast<Eigen::Index>(table.header.size());
    UnlabeledSet set;
    set.inputs.resize(static_cast<Eigen::Index>(table.rows.size()), d);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (static_cast<Eigen::Index>(row.size()) != d)
            throw std::runtime_error("bad unlabeled row in " + path.string());
        for (Eigen::Index j = 0; j < d; ++j)
            set.inputs(static_cast<Eigen::Index>(r), j) = std::stod(row[static_cast<std::size_t>(j)]);
    }
    set.spec = load_sidecar_spec(path, static_cast<int>(d));
    return set;
}

}  // namespace selftrain
