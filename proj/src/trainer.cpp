#include "hloss/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hloss/errors.hpp"
#include "hloss/loss.hpp"

namespace hloss {

std::vector<int> Dataset::class_counts(int classes) const {
    std::vector<int> counts(classes, 0);
    for (NodeId y : labels) {
        if (y >= 1 && y <= classes) ++counts[y - 1];
    }
    return counts;
}

void Dataset::validate(int classes) const {
    if (labels.empty()) throw InputError("dataset is empty");
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw InputError("feature rows and labels differ in length");
    }
    if (!features.allFinite()) throw InputError("dataset features must be finite");
    for (NodeId y : labels) {
        if (y < 1 || y > classes) {
            throw InputError("label " + std::to_string(y) + " outside 1.." +
                             std::to_string(classes));
        }
    }
}

Eigen::MatrixXd LinearModel::logits(const Eigen::MatrixXd& features) const {
    if (features.cols() != dim()) {
        throw InputError("feature dimension " + std::to_string(features.cols()) +
                         " does not match the model (" + std::to_string(dim()) + ")");
    }
    return (features * weights.transpose()).rowwise() + biases.transpose();
}

Eigen::MatrixXd LinearModel::predict_proba(const Eigen::MatrixXd& features) const {
    Eigen::MatrixXd z = logits(features);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        z.row(i) = softmax(z.row(i).transpose()).transpose();
    }
    return z;
}

Objective make_objective(const Hierarchy& h, const TrainConfig& config) {
    switch (config.loss) {
    case LossKind::CrossEntropy: return Objective::cross_entropy(h);
    case LossKind::Hierarchical: return Objective::hierarchical(h, config.q);
    case LossKind::Hxe: return Objective::hxe(h, config.alpha);
    }
    throw InputError("unknown loss kind");
}

Eigen::MatrixXd synthetic_class_means(const Hierarchy& h, int dim, Rng rng) {
    if (dim < 2) throw InputError("synthetic data needs dim >= 2");
    const WeightedHierarchy shares = exponential_weights(h, 1.0);
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(h.node_count(), dim);
    for (NodeId j : h.top_down_order()) {
        if (j == kRoot) continue;
        const double scale = shares.weight(j) / shares.balance_constant();
        for (int d = 0; d < dim; ++d) {
            centers(j, d) = centers(h.parent(j), d) + scale * rng.normal();
        }
    }
    return centers.middleRows(1, h.leaf_count());
}

Dataset sample_around_means(const Eigen::MatrixXd& means, int per_class, double spread, Rng rng) {
    if (per_class < 1) throw InputError("need at least one sample per class");
    if (!(spread >= 0.0) || !std::isfinite(spread)) throw InputError("spread must be >= 0");
    const int K = static_cast<int>(means.rows());
    const int dim = static_cast<int>(means.cols());
    Dataset data;
    data.features.resize(static_cast<Eigen::Index>(K) * per_class, dim);
    data.labels.reserve(static_cast<std::size_t>(K) * per_class);
    Eigen::Index row = 0;
    for (int k = 0; k < K; ++k) {
        for (int s = 0; s < per_class; ++s, ++row) {
            for (int d = 0; d < dim; ++d) data.features(row, d) = means(k, d) + spread * rng.normal();
            data.labels.push_back(k + 1);
        }
    }
    return data;
}

Dataset generate_synthetic(const Hierarchy& h, int per_class, int dim, double spread,
                           std::uint64_t seed) {
    const Rng rng(seed);
    const Eigen::MatrixXd means = synthetic_class_means(h, dim, rng.split("class-means"));
    return sample_around_means(means, per_class, spread, rng.split("samples"));
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double fraction) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw InputError("holdout fraction must be in [0, 1)");
    const int classes = data.labels.empty()
                            ? 0
                            : *std::max_element(data.labels.begin(), data.labels.end());
    const std::vector<int> counts = data.class_counts(classes);
    std::vector<int> keep(classes), seen(classes, 0);
    for (int k = 0; k < classes; ++k) {
        keep[k] = counts[k] - static_cast<int>(std::floor(fraction * counts[k]));
    }
    std::vector<Eigen::Index> train_rows, held_rows;
    for (int i = 0; i < data.size(); ++i) {
        const int k = data.labels[i] - 1;
        (seen[k]++ < keep[k] ? train_rows : held_rows).push_back(i);
    }
    auto take = [&](const std::vector<Eigen::Index>& rows) {
        Dataset out;
        out.features = data.features(rows, Eigen::all);
        for (auto r : rows) out.labels.push_back(data.labels[r]);
        return out;
    };
    return {take(train_rows), take(held_rows)};
}

TrainResult train(const Dataset& data, const Hierarchy& h, const TrainConfig& config) {
    const int K = h.leaf_count();
    data.validate(K);
    if (config.epochs < 1) throw InputError("epochs must be positive");
    if (!(config.learning_rate > 0.0)) throw InputError("learning rate must be positive");
    if (config.batch_size < 1) throw InputError("batch size must be positive");

    const Objective objective = make_objective(h, config);
    const Rng rng(config.seed);
    Rng init = rng.split("init");

    TrainResult result;
    LinearModel& model = result.model;
    model.weights.resize(K, data.dim());
    for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
        model.weights.data()[i] = 0.01 * init.normal();
    }
    model.biases = Eigen::VectorXd::Zero(K);

    const int n = data.size();
    std::vector<Eigen::Index> order(n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double rate = config.learning_rate * 0.5 *
                            (1.0 + std::cos(std::numbers::pi * epoch / config.epochs));
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle = rng.split("shuffle", static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle.engine());

        for (int begin = 0; begin < n; begin += config.batch_size) {
            const int end = std::min(n, begin + config.batch_size);
            const std::vector<Eigen::Index> rows(order.begin() + begin, order.begin() + end);
            const Eigen::MatrixXd x = data.features(rows, Eigen::all);
            std::vector<NodeId> y;
            y.reserve(rows.size());
            for (auto r : rows) y.push_back(data.labels[r]);

            const Eigen::MatrixXd z = model.logits(x);
            if (!z.allFinite()) {
                throw NumericalError("non-finite logits at epoch " + std::to_string(epoch + 1));
            }
            const BatchLoss batch = evaluate_batch(objective, z, y, true, config.threads);
            if (!std::isfinite(batch.mean)) {
                throw NumericalError("non-finite training loss at epoch " +
                                     std::to_string(epoch + 1));
            }
            model.weights.noalias() -= rate * batch.gradient.transpose() * x;
            model.biases.noalias() -= rate * batch.gradient.colwise().sum().transpose();
        }

        const Eigen::MatrixXd z = model.logits(data.features);
        if (!z.allFinite()) {
            throw NumericalError("non-finite logits after epoch " + std::to_string(epoch + 1));
        }
        const BatchLoss full = evaluate_batch(objective, z, data.labels, false, config.threads);
        if (!std::isfinite(full.mean)) {
            throw NumericalError("non-finite training loss after epoch " +
                                 std::to_string(epoch + 1));
        }
        result.epoch_losses.push_back(full.mean);
    }
    return result;
}

ModelEvaluation evaluate_model(const LinearModel& model, const Dataset& data,
                               const WeightedHierarchy& wh, int threads) {
    if (model.classes() != wh.tree().leaf_count()) {
        throw InputError("model output size does not match the tree");
    }
    data.validate(wh.tree().leaf_count());
    const Eigen::MatrixXd probs = model.predict_proba(data.features);
    return {evaluate(wh, probs, data.labels, threads),
            coarsening_curve(wh, probs, data.labels)};
}

} // namespace hloss
