#include "hellsemble/standardize.hpp"

#include <cmath>

namespace hellsemble {

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols(), 0.0);
    s.std_dev.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] += x(r, c);
    }
    for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] /= n;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double d = x(r, c) - s.mean[c];
            s.std_dev[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < x.cols(); ++c) {
        s.std_dev[c] = std::sqrt(s.std_dev[c] / n);
        if (s.std_dev[c] < 1e-12) s.std_dev[c] = 1e-12;
    }
    return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            out(r, c) = (x(r, c) - mean[c]) / std_dev[c];
        }
    }
    return out;
}

nlohmann::json Standardizer::to_json() const {
    return {{"mean", mean}, {"std", std_dev}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std_dev = j.at("std").get<std::vector<double>>();
    return s;
}

}  // namespace hellsemble
