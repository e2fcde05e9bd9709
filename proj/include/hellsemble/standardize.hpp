#pragma once

#include <vector>

#include <json.hpp>

#include "hellsemble/matrix.hpp"

namespace hellsemble {

/// Per-feature mean/std transform used internally by the learners that are
/// scale sensitive (k-NN, MLP, logistic regression). Std is floored at
/// 1e-12 so constant columns pass through as zeros.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std_dev;

    static Standardizer fit(const Matrix& x);

    Matrix transform(const Matrix& x) const;

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);
};

}  // namespace hellsemble
