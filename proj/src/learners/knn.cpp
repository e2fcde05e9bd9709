#include "hellsemble/learners/knn.hpp"

#include <algorithm>

namespace hellsemble {

std::shared_ptr<KnnLearner> KnnLearner::fit(const LearnerSpec& spec, const Matrix& x,
                                            const std::vector<int>& y) {
    const auto& params = std::get<KnnParams>(spec.params);
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    auto model = std::shared_ptr<KnnLearner>(new KnnLearner(spec, classes, x.cols()));
    model->scaler_ = Standardizer::fit(x);
    model->train_x_ = model->scaler_.transform(x);
    model->train_y_.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        model->train_y_[i] = static_cast<int>(model->class_index(y[i]));
    }
    model->k_ = std::min<int>(std::max(params.k, 1), static_cast<int>(x.rows()));
    return model;
}

Matrix KnnLearner::proba_impl(const Matrix& x) const {
    const std::size_t n_classes = class_set().size();
    Matrix probs(x.rows(), n_classes);
    const Matrix queries = scaler_.transform(x);
    const std::size_t n_train = train_x_.rows();

#pragma omp parallel for schedule(static) if (x.rows() > 16)
    for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(queries.rows()); ++q) {
        std::vector<std::pair<double, std::size_t>> dists(n_train);
        auto query = queries.row(static_cast<std::size_t>(q));
        for (std::size_t t = 0; t < n_train; ++t) {
            auto train = train_x_.row(t);
            double d2 = 0.0;
            for (std::size_t c = 0; c < query.size(); ++c) {
                const double diff = query[c] - train[c];
                d2 += diff * diff;
            }
            dists[t] = {d2, t};
        }
        // (distance, fit-row index) ordering makes the k boundary
        // deterministic.
        std::partial_sort(dists.begin(), dists.begin() + k_, dists.end());
        std::vector<std::size_t> votes(n_classes, 0);
        for (int i = 0; i < k_; ++i) ++votes[train_y_[dists[i].second]];
        for (std::size_t c = 0; c < n_classes; ++c) {
            probs(static_cast<std::size_t>(q), c) =
                static_cast<double>(votes[c]) / static_cast<double>(k_);
        }
    }
    return probs;
}

nlohmann::json KnnLearner::payload() const {
    return {{"scaler", scaler_.to_json()},
            {"train_x", train_x_.data()},
            {"train_rows", train_x_.rows()},
            {"train_y", train_y_},
            {"k", k_}};
}

LearnerPtr KnnLearner::from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                    const nlohmann::json& j) {
    auto model = std::shared_ptr<KnnLearner>(new KnnLearner(std::move(spec), std::move(class_set), dim));
    model->scaler_ = Standardizer::from_json(j.at("scaler"));
    const auto rows = j.at("train_rows").get<std::size_t>();
    model->train_x_ = Matrix(rows, dim);
    model->train_x_.data() = j.at("train_x").get<std::vector<double>>();
    model->train_y_ = j.at("train_y").get<std::vector<int>>();
    model->k_ = j.at("k").get<int>();
    return model;
}

}  // namespace hellsemble
