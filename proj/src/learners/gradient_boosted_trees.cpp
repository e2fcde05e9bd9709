#include "hellsemble/learners/gradient_boosted_trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hellsemble {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double mean_logistic_loss(const std::vector<double>& scores, const std::vector<int>& y01) {
    double loss = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double m = (y01[i] == 1) ? scores[i] : -scores[i];
        loss += (m > 0) ? std::log1p(std::exp(-m)) : (-m + std::log1p(std::exp(m)));
    }
    return loss / static_cast<double>(scores.size());
}

// Squared-error regression tree on residuals. Same midpoint-threshold scan
// as the classification tree, with mean/SSE tracked incrementally.
class ResidualTreeBuilder {
public:
    ResidualTreeBuilder(const Matrix& x, const std::vector<double>& target, int max_depth)
        : x_(x), target_(target), max_depth_(max_depth) {}

    std::vector<RegressionTreeNode> build() {
        std::vector<std::size_t> rows(x_.rows());
        std::iota(rows.begin(), rows.end(), 0);
        grow(std::move(rows), 0);
        return std::move(nodes_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double sse = 0.0;
    };

    int grow(std::vector<std::size_t> rows, int depth) {
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        double sum = 0.0;
        for (std::size_t r : rows) sum += target_[r];
        nodes_[node_id].value = sum / static_cast<double>(rows.size());

        if (depth >= max_depth_ || rows.size() < 2) return node_id;
        auto split = find_split(rows);
        if (split.feature < 0) return node_id;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left_rows
                                                                               : right_rows)
                .push_back(r);
        }
        nodes_[node_id].feature = split.feature;
        nodes_[node_id].threshold = split.threshold;
        const int left = grow(std::move(left_rows), depth + 1);
        nodes_[node_id].left = left;
        const int right = grow(std::move(right_rows), depth + 1);
        nodes_[node_id].right = right;
        return node_id;
    }

    Split find_split(const std::vector<std::size_t>& rows) {
        const std::size_t n = rows.size();
        Split best;
        double best_sse = 0.0;
        bool have_best = false;

        std::vector<std::pair<double, double>> values(n);  // (feature value, target)
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            double total = 0.0, total_sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = {x_(rows[i], f), target_[rows[i]]};
                total += values[i].second;
                total_sq += values[i].second * values[i].second;
            }
            std::sort(values.begin(), values.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += values[i].second;
                left_sq += values[i].second * values[i].second;
                if (values[i].first == values[i + 1].first) continue;
                const double n_left = static_cast<double>(i + 1);
                const double n_right = static_cast<double>(n - i - 1);
                const double right_sum = total - left_sum;
                const double right_sq = total_sq - left_sq;
                const double sse = (left_sq - left_sum * left_sum / n_left) +
                                   (right_sq - right_sum * right_sum / n_right);
                if (!have_best || sse < best_sse) {
                    have_best = true;
                    best_sse = sse;
                    best.feature = static_cast<int>(f);
                    best.threshold = values[i].first + (values[i + 1].first - values[i].first) / 2.0;
                    best.sse = sse;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<double>& target_;
    int max_depth_;
    std::vector<RegressionTreeNode> nodes_;
};

double tree_value(const std::vector<RegressionTreeNode>& nodes, std::span<const double> row) {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        node = (row[static_cast<std::size_t>(n.feature)] <= n.threshold) ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

}  // namespace

std::shared_ptr<GradientBoostedTreesLearner> GradientBoostedTreesLearner::fit(
    const LearnerSpec& spec, const Matrix& x, const std::vector<int>& y) {
    const auto& params = std::get<GradientBoostedTreesParams>(spec.params);
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() > 2) {
        throw TrainError("UnsupportedClassCount",
                         "gradient_boosted_trees supports at most 2 classes, got " +
                             std::to_string(classes.size()));
    }

    auto model = std::shared_ptr<GradientBoostedTreesLearner>(
        new GradientBoostedTreesLearner(spec, classes, x.cols()));
    model->learning_rate_ = params.learning_rate;

    std::vector<int> y01(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y01[i] = static_cast<int>(model->class_index(y[i]));
    }
    double positive_rate =
        std::accumulate(y01.begin(), y01.end(), 0.0) / static_cast<double>(y01.size());
    positive_rate = std::clamp(positive_rate, 1e-12, 1.0 - 1e-12);
    model->base_score_ = std::log(positive_rate / (1.0 - positive_rate));

    std::vector<double> scores(y01.size(), model->base_score_);
    std::vector<double> residuals(y01.size());
    model->loss_curve_.push_back(mean_logistic_loss(scores, y01));

    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < scores.size(); ++i) {
            residuals[i] = static_cast<double>(y01[i]) - sigmoid(scores[i]);
        }
        ResidualTreeBuilder builder(x, residuals, params.max_depth);
        auto tree = builder.build();
        for (std::size_t i = 0; i < scores.size(); ++i) {
            scores[i] += params.learning_rate * tree_value(tree, x.row(i));
        }
        model->trees_.push_back(std::move(tree));
        model->loss_curve_.push_back(mean_logistic_loss(scores, y01));
    }
    return model;
}

double GradientBoostedTreesLearner::decision_value(std::span<const double> row) const {
    double f = base_score_;
    for (const auto& tree : trees_) f += learning_rate_ * tree_value(tree, row);
    return f;
}

Matrix GradientBoostedTreesLearner::proba_impl(const Matrix& x) const {
    Matrix probs(x.rows(), class_set().size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double p1 = sigmoid(decision_value(x.row(r)));
        probs(r, 0) = 1.0 - p1;
        probs(r, 1) = p1;
    }
    return probs;
}

nlohmann::json GradientBoostedTreesLearner::payload() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json jt = nlohmann::json::array();
        for (const auto& n : tree) {
            jt.push_back({{"f", n.feature},
                          {"t", n.threshold},
                          {"l", n.left},
                          {"r", n.right},
                          {"v", n.value}});
        }
        trees.push_back(std::move(jt));
    }
    return {{"base_score", base_score_},
            {"learning_rate", learning_rate_},
            {"trees", std::move(trees)}};
}

LearnerPtr GradientBoostedTreesLearner::from_payload(LearnerSpec spec, std::vector<int> class_set,
                                                     std::size_t dim, const nlohmann::json& j) {
    auto model = std::shared_ptr<GradientBoostedTreesLearner>(
        new GradientBoostedTreesLearner(std::move(spec), std::move(class_set), dim));
    model->base_score_ = j.at("base_score").get<double>();
    model->learning_rate_ = j.at("learning_rate").get<double>();
    for (const auto& jt : j.at("trees")) {
        std::vector<RegressionTreeNode> tree;
        for (const auto& jn : jt) {
            RegressionTreeNode n;
            n.feature = jn.at("f").get<int>();
            n.threshold = jn.at("t").get<double>();
            n.left = jn.at("l").get<int>();
            n.right = jn.at("r").get<int>();
            n.value = jn.at("v").get<double>();
            tree.push_back(n);
        }
        model->trees_.push_back(std::move(tree));
    }
    return model;
}

}  // namespace hellsemble
