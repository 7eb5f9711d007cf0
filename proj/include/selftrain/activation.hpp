#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace selftrain {

enum class Activation { ReLU, Sigmoid };

inline double activation_value(Activation act, double z) {
    switch (act) {
        case Activation::ReLU:
            return z > 0.0 ? z : 0.0;
        case Activation::Sigmoid:
            return 1.0 / (1.0 + std::exp(-z));
    }
    return 0.0;
}

// ReLU derivative at the kink is taken as 0 (measure zero under Gaussian inputs).
inline double activation_derivative(Activation act, double z) {
    switch (act) {
        case Activation::ReLU:
            return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: {
            double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
    }
    return 0.0;
}

inline std::string activation_name(Activation act) {
    return act == Activation::ReLU ? "relu" : "sigmoid";
}

inline Activation activation_from_name(std::string_view name) {
    if (name == "relu" || name == "ReLU") return Activation::ReLU;
    if (name == "sigmoid" || name == "Sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation: " + std::string(name));
}

}  // namespace selftrain
