#pragma once

#include "hellsemble/learner.hpp"
#include "hellsemble/standardize.hpp"

namespace hellsemble {

struct LogisticGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Gradient of the mean negative log-likelihood plus l2 * weights (bias
/// excluded from the penalty). y entries must be 0/1.
LogisticGradient logistic_gradient(std::span<const double> weights, double bias, const Matrix& x,
                                   const std::vector<int>& y, double l2);

/// Matching objective for the finite-difference oracle:
/// mean NLL + (l2/2) * ||w||^2.
double logistic_loss(std::span<const double> weights, double bias, const Matrix& x,
                     const std::vector<int>& y, double l2);

/// Binary logistic regression trained by full-batch gradient descent on
/// internally standardized features. Binary-only.
class LogisticRegressionLearner final : public Learner {
public:
    static std::shared_ptr<LogisticRegressionLearner> fit(const LearnerSpec& spec, const Matrix& x,
                                                          const std::vector<int>& y);

    const std::vector<double>& weights() const noexcept { return weights_; }
    double bias() const noexcept { return bias_; }

    nlohmann::json payload() const override;
    static LearnerPtr from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                   const nlohmann::json& j);

protected:
    Matrix proba_impl(const Matrix& x) const override;

private:
    LogisticRegressionLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    Standardizer scaler_;
    std::vector<double> weights_;
    double bias_ = 0.0;
};

}  // namespace hellsemble
