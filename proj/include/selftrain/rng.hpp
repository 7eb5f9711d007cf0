#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace selftrain {

// (master, stream) fully determines every random draw downstream. Streams
// are derived by hashing so that parallel execution cannot change results.
struct RngSeed {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
    std::uint64_t h = splitmix64(s);
    s ^= b;
    return h ^ splitmix64(s);
}

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline RngSeed substream(RngSeed seed, std::uint64_t index) {
    return RngSeed{seed.master, mix_u64(seed.stream, index)};
}

// Fresh engine per purpose; the tag keeps independent draws (inputs, teacher,
// partitions, ...) on independent streams even when some are skipped.
inline std::mt19937_64 make_engine(RngSeed seed, std::string_view purpose) {
    std::uint64_t s = mix_u64(mix_u64(seed.master, seed.stream), fnv1a64(purpose));
    return std::mt19937_64{s};
}

// Row-major fill order, so the first r rows of an n-row draw coincide with an
// r-row draw from the same engine state.
inline Eigen::MatrixXd draw_standard_normal(std::mt19937_64& eng,
                                            Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            out(i, j) = normal(eng);
    return out;
}

inline Eigen::VectorXd draw_standard_normal_vector(std::mt19937_64& eng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = normal(eng);
    return out;
}

}  // namespace selftrain
