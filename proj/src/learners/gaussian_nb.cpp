#include "hellsemble/learners/gaussian_nb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hellsemble {

std::shared_ptr<GaussianNbLearner> GaussianNbLearner::fit(const LearnerSpec& spec, const Matrix& x,
                                                          const std::vector<int>& y) {
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() > 2) {
        throw TrainError("UnsupportedClassCount",
                         "gaussian_nb supports at most 2 classes, got " +
                             std::to_string(classes.size()));
    }

    auto model = std::shared_ptr<GaussianNbLearner>(new GaussianNbLearner(spec, classes, x.cols()));
    const std::size_t n_classes = classes.size();
    const std::size_t d = x.cols();
    const double n = static_cast<double>(x.rows());

    // Overall population variance per feature, for the relative floor.
    std::vector<double> overall_mean(d, 0.0), overall_var(d, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < d; ++c) overall_mean[c] += x(r, c);
    }
    for (std::size_t c = 0; c < d; ++c) overall_mean[c] /= n;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = x(r, c) - overall_mean[c];
            overall_var[c] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < d; ++c) overall_var[c] /= n;

    model->priors_.assign(n_classes, 0.0);
    model->means_ = Matrix(n_classes, d);
    model->vars_ = Matrix(n_classes, d);
    std::vector<double> counts(n_classes, 0.0);

    for (std::size_t r = 0; r < x.rows(); ++r) {
        const std::size_t k = model->class_index(y[r]);
        counts[k] += 1.0;
        for (std::size_t c = 0; c < d; ++c) model->means_(k, c) += x(r, c);
    }
    for (std::size_t k = 0; k < n_classes; ++k) {
        for (std::size_t c = 0; c < d; ++c) model->means_(k, c) /= counts[k];
        model->priors_[k] = counts[k] / n;
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const std::size_t k = model->class_index(y[r]);
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = x(r, c) - model->means_(k, c);
            model->vars_(k, c) += diff * diff;
        }
    }
    for (std::size_t k = 0; k < n_classes; ++k) {
        for (std::size_t c = 0; c < d; ++c) {
            double v = model->vars_(k, c) / counts[k];
            v = std::max(v, std::max(1e-9 * overall_var[c], 1e-12));
            model->vars_(k, c) = v;
        }
    }
    return model;
}

std::vector<double> GaussianNbLearner::log_joint(std::span<const double> row) const {
    std::vector<double> lj(class_set().size());
    for (std::size_t k = 0; k < lj.size(); ++k) {
        double acc = std::log(priors_[k]);
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double var = vars_(k, c);
            const double diff = row[c] - means_(k, c);
            acc += -0.5 * std::log(2.0 * std::numbers::pi * var) - diff * diff / (2.0 * var);
        }
        lj[k] = acc;
    }
    return lj;
}

Matrix GaussianNbLearner::proba_impl(const Matrix& x) const {
    Matrix probs(x.rows(), class_set().size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto lj = log_joint(x.row(r));
        const double m = *std::max_element(lj.begin(), lj.end());
        double total = 0.0;
        for (double& v : lj) {
            v = std::exp(v - m);
            total += v;
        }
        for (std::size_t k = 0; k < lj.size(); ++k) probs(r, k) = lj[k] / total;
    }
    return probs;
}

nlohmann::json GaussianNbLearner::payload() const {
    return {{"priors", priors_},
            {"means", means_.data()},
            {"vars", vars_.data()}};
}

LearnerPtr GaussianNbLearner::from_payload(LearnerSpec spec, std::vector<int> class_set,
                                           std::size_t dim, const nlohmann::json& j) {
    auto model =
        std::shared_ptr<GaussianNbLearner>(new GaussianNbLearner(std::move(spec), std::move(class_set), dim));
    model->priors_ = j.at("priors").get<std::vector<double>>();
    const std::size_t n_classes = model->priors_.size();
    model->means_ = Matrix(n_classes, dim);
    model->means_.data() = j.at("means").get<std::vector<double>>();
    model->vars_ = Matrix(n_classes, dim);
    model->vars_.data() = j.at("vars").get<std::vector<double>>();
    return model;
}

}  // namespace hellsemble
