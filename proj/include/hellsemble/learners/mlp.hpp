#pragma once

#include "hellsemble/learner.hpp"
#include "hellsemble/standardize.hpp"

namespace hellsemble {

/// One-hidden-layer network parameters: hidden weights/bias, output
/// weights/bias. Output width equals the class count.
struct MlpParameters {
    Matrix w1;                // hidden x input
    std::vector<double> b1;   // hidden
    Matrix w2;                // classes x hidden
    std::vector<double> b2;   // classes

    std::size_t parameter_count() const noexcept {
        return w1.data().size() + b1.size() + w2.data().size() + b2.size();
    }
};

/// Mean cross-entropy of softmax outputs over a batch (ReLU hidden layer).
double mlp_loss(const MlpParameters& params, const Matrix& x, const std::vector<int>& y_idx);

/// Analytic gradient of mlp_loss, same shapes as the parameters.
MlpParameters mlp_gradient(const MlpParameters& params, const Matrix& x,
                           const std::vector<int>& y_idx);

/// One hidden layer, ReLU, softmax output, mini-batch SGD with seeded
/// uniform initialization in [-0.1, 0.1]; inputs standardized internally.
/// Multiclass capable (usable as a router).
class MlpLearner final : public Learner {
public:
    static std::shared_ptr<MlpLearner> fit(const LearnerSpec& spec, const Matrix& x,
                                           const std::vector<int>& y);

    const MlpParameters& parameters() const noexcept { return params_; }

    nlohmann::json payload() const override;
    static LearnerPtr from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                   const nlohmann::json& j);

protected:
    Matrix proba_impl(const Matrix& x) const override;

private:
    MlpLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    Standardizer scaler_;
    MlpParameters params_;
};

}  // namespace hellsemble
