#include "selftrain/network.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "selftrain/csv.hpp"
#include "selftrain/kernels.hpp"
#include "selftrain/rng.hpp"

namespace selftrain {

double forward(const NetworkModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.input_dim())
        throw std::invalid_argument("forward: input length " + std::to_string(x.size()) +
                                    " does not match d=" + std::to_string(model.input_dim()));
    const Eigen::Index K = model.neuron_count();
    double sum = 0.0;
    // neuron index order fixed for reproducibility
    for (Eigen::Index j = 0; j < K; ++j)
        sum += activation_value(model.activation, model.weights.col(j).dot(x));
    return sum / static_cast<double>(K);
}

Eigen::VectorXd forward_batch(const NetworkModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.input_dim())
        throw std::invalid_argument("forward_batch: input width " + std::to_string(X.cols()) +
                                    " does not match d=" + std::to_string(model.input_dim()));
    return kernels::forward_batch(X, model.weights, model.activation);
}

std::uint64_t weights_hash(const Eigen::MatrixXd& weights) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* ptr, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(ptr);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::int64_t dims[2] = {weights.rows(), weights.cols()};
    feed(dims, sizeof(dims));
    feed(weights.data(), sizeof(double) * static_cast<std::size_t>(weights.size()));
    return h;
}

void save_weights_csv(const std::filesystem::path& path, const NetworkModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << model.input_dim() << ',' << model.neuron_count() << ','
        << activation_name(model.activation) << '\n';
    for (Eigen::Index i = 0; i < model.input_dim(); ++i) {
        for (Eigen::Index j = 0; j < model.neuron_count(); ++j) {
            if (j) out << ',';
            out << format_g17(model.weights(i, j));
        }
        out << '\n';
    }
}

NetworkModel load_weights_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty weights file: " + path.string());
    auto head = split_csv_line(line);
    if (head.size() != 3) throw std::runtime_error("bad weights header in " + path.string());
    const Eigen::Index d = std::stoll(head[0]);
    const Eigen::Index K = std::stoll(head[1]);
    NetworkModel model;
    model.activation = activation_from_name(head[2]);
    model.weights.resize(d, K);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated weights file: " + path.string());
        auto fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != K)
            throw std::runtime_error("bad weights row in " + path.string());
        for (Eigen::Index j = 0; j < K; ++j) model.weights(i, j) = std::stod(fields[j]);
    }
    if (!model.weights.allFinite())
        throw std::runtime_error("non-finite weight entries in " + path.string());
    return model;
}

}  // namespace selftrain
