#include "hellsemble/learners/logistic_regression.hpp"

#include <algorithm>
#include <cmath>

namespace hellsemble {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot_row(std::span<const double> w, std::span<const double> x) {
    double z = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) z += w[c] * x[c];
    return z;
}

}  // namespace

LogisticGradient logistic_gradient(std::span<const double> weights, double bias, const Matrix& x,
                                   const std::vector<int>& y, double l2) {
    if (x.rows() == 0) {
        throw TrainError("EmptyTrainingSet", "logistic_gradient needs a non-empty batch");
    }
    LogisticGradient g;
    g.weights.assign(weights.size(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        const double err = sigmoid(bias + dot_row(weights, row)) - static_cast<double>(y[r]);
        g.bias += err;
        for (std::size_t c = 0; c < weights.size(); ++c) g.weights[c] += err * row[c];
    }
    g.bias /= n;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        g.weights[c] = g.weights[c] / n + l2 * weights[c];
    }
    return g;
}

double logistic_loss(std::span<const double> weights, double bias, const Matrix& x,
                     const std::vector<int>& y, double l2) {
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double z = bias + dot_row(weights, x.row(r));
        // log(1 + exp(-m)) with m = z for y=1, -z for y=0; stable form.
        const double m = (y[r] == 1) ? z : -z;
        loss += (m > 0) ? std::log1p(std::exp(-m)) : (-m + std::log1p(std::exp(m)));
    }
    loss /= static_cast<double>(x.rows());
    double penalty = 0.0;
    for (double w : weights) penalty += w * w;
    return loss + 0.5 * l2 * penalty;
}

std::shared_ptr<LogisticRegressionLearner> LogisticRegressionLearner::fit(
    const LearnerSpec& spec, const Matrix& x, const std::vector<int>& y) {
    const auto& params = std::get<LogisticRegressionParams>(spec.params);
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() > 2) {
        throw TrainError("UnsupportedClassCount",
                         "logistic_regression supports at most 2 classes, got " +
                             std::to_string(classes.size()));
    }

    auto model = std::shared_ptr<LogisticRegressionLearner>(
        new LogisticRegressionLearner(spec, classes, x.cols()));
    model->scaler_ = Standardizer::fit(x);
    const Matrix xs = model->scaler_.transform(x);
    std::vector<int> y01(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y01[i] = static_cast<int>(model->class_index(y[i]));
    }

    model->weights_.assign(x.cols(), 0.0);
    model->bias_ = 0.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        auto g = logistic_gradient(model->weights_, model->bias_, xs, y01, params.l2);
        for (std::size_t c = 0; c < model->weights_.size(); ++c) {
            model->weights_[c] -= params.learning_rate * g.weights[c];
        }
        model->bias_ -= params.learning_rate * g.bias;
    }
    return model;
}

Matrix LogisticRegressionLearner::proba_impl(const Matrix& x) const {
    Matrix probs(x.rows(), class_set().size());
    const Matrix xs = scaler_.transform(x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double p1 = sigmoid(bias_ + dot_row(weights_, xs.row(r)));
        probs(r, 0) = 1.0 - p1;
        probs(r, 1) = p1;
    }
    return probs;
}

nlohmann::json LogisticRegressionLearner::payload() const {
    return {{"scaler", scaler_.to_json()}, {"weights", weights_}, {"bias", bias_}};
}

LearnerPtr LogisticRegressionLearner::from_payload(LearnerSpec spec, std::vector<int> class_set,
                                                   std::size_t dim, const nlohmann::json& j) {
    auto model = std::shared_ptr<LogisticRegressionLearner>(
        new LogisticRegressionLearner(std::move(spec), std::move(class_set), dim));
    model->scaler_ = Standardizer::from_json(j.at("scaler"));
    model->weights_ = j.at("weights").get<std::vector<double>>();
    model->bias_ = j.at("bias").get<double>();
    return model;
}

}  // namespace hellsemble
