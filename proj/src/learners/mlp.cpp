#include "hellsemble/learners/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hellsemble/rng.hpp"

namespace hellsemble {

namespace {

struct Forward {
    Matrix hidden;  // batch x hidden, post-ReLU
    Matrix probs;   // batch x classes, softmax
};

Forward forward_pass(const MlpParameters& p, const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t h = p.b1.size();
    const std::size_t k = p.b2.size();
    Forward f{Matrix(n, h), Matrix(n, k)};
    for (std::size_t r = 0; r < n; ++r) {
        auto row = x.row(r);
        for (std::size_t j = 0; j < h; ++j) {
            double z = p.b1[j];
            auto w = p.w1.row(j);
            for (std::size_t c = 0; c < row.size(); ++c) z += w[c] * row[c];
            f.hidden(r, j) = z > 0.0 ? z : 0.0;
        }
        double max_logit = -1e300;
        std::vector<double> logits(k);
        for (std::size_t o = 0; o < k; ++o) {
            double z = p.b2[o];
            auto w = p.w2.row(o);
            for (std::size_t j = 0; j < h; ++j) z += w[j] * f.hidden(r, j);
            logits[o] = z;
            max_logit = std::max(max_logit, z);
        }
        double total = 0.0;
        for (std::size_t o = 0; o < k; ++o) {
            logits[o] = std::exp(logits[o] - max_logit);
            total += logits[o];
        }
        for (std::size_t o = 0; o < k; ++o) f.probs(r, o) = logits[o] / total;
    }
    return f;
}

}  // namespace

double mlp_loss(const MlpParameters& params, const Matrix& x, const std::vector<int>& y_idx) {
    auto f = forward_pass(params, x);
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        loss -= std::log(std::max(f.probs(r, static_cast<std::size_t>(y_idx[r])), 1e-300));
    }
    return loss / static_cast<double>(x.rows());
}

MlpParameters mlp_gradient(const MlpParameters& params, const Matrix& x,
                           const std::vector<int>& y_idx) {
    const std::size_t n = x.rows();
    const std::size_t h = params.b1.size();
    const std::size_t k = params.b2.size();
    auto f = forward_pass(params, x);

    MlpParameters g{Matrix(params.w1.rows(), params.w1.cols()), std::vector<double>(h, 0.0),
                    Matrix(params.w2.rows(), params.w2.cols()), std::vector<double>(k, 0.0)};
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> delta_out(k), delta_hidden(h);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < k; ++o) {
            delta_out[o] =
                (f.probs(r, o) - (static_cast<std::size_t>(y_idx[r]) == o ? 1.0 : 0.0)) * inv_n;
            g.b2[o] += delta_out[o];
            for (std::size_t j = 0; j < h; ++j) g.w2(o, j) += delta_out[o] * f.hidden(r, j);
        }
        for (std::size_t j = 0; j < h; ++j) {
            if (f.hidden(r, j) <= 0.0) {
                delta_hidden[j] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (std::size_t o = 0; o < k; ++o) acc += delta_out[o] * params.w2(o, j);
            delta_hidden[j] = acc;
            g.b1[j] += acc;
            auto row = x.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) g.w1(j, c) += acc * row[c];
        }
    }
    return g;
}

std::shared_ptr<MlpLearner> MlpLearner::fit(const LearnerSpec& spec, const Matrix& x,
                                            const std::vector<int>& y) {
    const auto& hp = std::get<MlpParams>(spec.params);
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    auto model = std::shared_ptr<MlpLearner>(new MlpLearner(spec, classes, x.cols()));
    model->scaler_ = Standardizer::fit(x);
    const Matrix xs = model->scaler_.transform(x);
    std::vector<int> y_idx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_idx[i] = static_cast<int>(model->class_index(y[i]));
    }

    const std::size_t h = static_cast<std::size_t>(hp.hidden_units);
    const std::size_t k = classes.size();
    Rng rng(mix_seed(spec.seed, 0x6d6c70));
    auto& p = model->params_;
    p.w1 = Matrix(h, x.cols());
    p.b1.assign(h, 0.0);
    p.w2 = Matrix(k, h);
    p.b2.assign(k, 0.0);
    for (double& w : p.w1.data()) w = rng.uniform(-0.1, 0.1);
    for (double& b : p.b1) b = rng.uniform(-0.1, 0.1);
    for (double& w : p.w2.data()) w = rng.uniform(-0.1, 0.1);
    for (double& b : p.b2) b = rng.uniform(-0.1, 0.1);

    const std::size_t n = xs.rows();
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(hp.batch_size), n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    Matrix bx(batch, x.cols());
    std::vector<int> by(batch);
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            if (count != bx.rows()) bx = Matrix(count, x.cols());
            by.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                auto src = xs.row(order[start + i]);
                std::copy(src.begin(), src.end(), bx.row(i).begin());
                by[i] = y_idx[order[start + i]];
            }
            auto g = mlp_gradient(p, bx, by);
            const double lr = hp.learning_rate;
            for (std::size_t i = 0; i < p.w1.data().size(); ++i) {
                p.w1.data()[i] -= lr * g.w1.data()[i];
            }
            for (std::size_t i = 0; i < p.b1.size(); ++i) p.b1[i] -= lr * g.b1[i];
            for (std::size_t i = 0; i < p.w2.data().size(); ++i) {
                p.w2.data()[i] -= lr * g.w2.data()[i];
            }
            for (std::size_t i = 0; i < p.b2.size(); ++i) p.b2[i] -= lr * g.b2[i];
        }
        if (bx.rows() != batch) bx = Matrix(batch, x.cols());
    }
    return model;
}

Matrix MlpLearner::proba_impl(const Matrix& x) const {
    const Matrix xs = scaler_.transform(x);
    return forward_pass(params_, xs).probs;
}

nlohmann::json MlpLearner::payload() const {
    return {{"scaler", scaler_.to_json()},
            {"hidden", params_.b1.size()},
            {"w1", params_.w1.data()},
            {"b1", params_.b1},
            {"w2", params_.w2.data()},
            {"b2", params_.b2}};
}

LearnerPtr MlpLearner::from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                    const nlohmann::json& j) {
    auto model =
        std::shared_ptr<MlpLearner>(new MlpLearner(std::move(spec), std::move(class_set), dim));
    model->scaler_ = Standardizer::from_json(j.at("scaler"));
    const auto h = j.at("hidden").get<std::size_t>();
    auto& p = model->params_;
    p.w1 = Matrix(h, dim);
    p.w1.data() = j.at("w1").get<std::vector<double>>();
    p.b1 = j.at("b1").get<std::vector<double>>();
    p.b2 = j.at("b2").get<std::vector<double>>();
    p.w2 = Matrix(p.b2.size(), h);
    p.w2.data() = j.at("w2").get<std::vector<double>>();
    return model;
}

}  // namespace hellsemble
