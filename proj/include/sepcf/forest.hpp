#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "sepcf/errors.hpp"
#include "sepcf/features.hpp"
#include "sepcf/metrics.hpp"
#include "sepcf/rng.hpp"

namespace sepcf {

struct ForestHyperparams {
    std::size_t n_trees = 100;
    std::size_t max_depth = 12;
    std::size_t min_leaf = 1;
    // Features tried per split; 0 means ceil(sqrt(d)).
    std::size_t feature_subsample = 0;

    std::size_t resolve_subsample(std::size_t d) const {
        if (feature_subsample > 0) return std::min(feature_subsample, d);
        return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    }
};

// Axis-aligned split node; feature < 0 marks a leaf carrying class counts.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t count0 = 0;
    std::uint32_t count1 = 0;

    bool is_leaf() const { return feature < 0; }
    int leaf_label() const { return count1 > count0 ? 1 : 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(const std::vector<double>& x) const {
        std::size_t at = 0;
        while (!nodes[at].is_leaf()) {
            const TreeNode& n = nodes[at];
            at = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes[at].leaf_label();
    }
};

struct Prediction {
    double p0 = 1.0;
    double p1 = 0.0;
    int label = 0;
};

// Bagged decision-tree ensemble with Gini splits. Immutable once trained;
// predict calls are safe from any number of threads.
class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<DecisionTree> trees, ForestHyperparams hp, std::uint64_t seed,
                std::size_t n_features, std::vector<std::string> feature_names)
        : trees_(std::move(trees)),
          hyperparams_(hp),
          seed_(seed),
          n_features_(n_features),
          feature_names_(std::move(feature_names)) {}

    const std::vector<DecisionTree>& trees() const { return trees_; }
    const ForestHyperparams& hyperparams() const { return hyperparams_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t n_features() const { return n_features_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    Prediction predict_proba(const std::vector<double>& x) const {
        if (x.size() != n_features_)
            throw DimensionMismatch("expected " + std::to_string(n_features_) +
                                    " features, got " + std::to_string(x.size()));
        std::size_t votes1 = 0;
        for (const auto& t : trees_) votes1 += static_cast<std::size_t>(t.predict(x));
        Prediction p;
        p.p1 = static_cast<double>(votes1) / static_cast<double>(trees_.size());
        p.p0 = 1.0 - p.p1;
        p.label = p.p1 > 0.5 ? 1 : 0;  // exact tie goes to class 0
        return p;
    }

    Prediction predict_proba(const FeatureVector& x) const { return predict_proba(x.values); }

private:
    std::vector<DecisionTree> trees_;
    ForestHyperparams hyperparams_;
    std::uint64_t seed_ = 0;
    std::size_t n_features_ = 0;
    std::vector<std::string> feature_names_;
};

namespace detail {

struct TreeBuilder {
    const std::vector<const std::vector<double>*>& rows;
    const std::vector<int>& labels;
    const ForestHyperparams& hp;
    std::size_t n_features;
    std::size_t mtry;
    DecisionTree tree;
    std::vector<std::size_t> feature_scratch;

    TreeBuilder(const std::vector<const std::vector<double>*>& rows_in,
                const std::vector<int>& labels_in, const ForestHyperparams& hp_in,
                std::size_t n_features_in)
        : rows(rows_in), labels(labels_in), hp(hp_in), n_features(n_features_in) {
        mtry = hp.resolve_subsample(n_features);
        feature_scratch.resize(n_features);
        std::iota(feature_scratch.begin(), feature_scratch.end(), std::size_t{0});
    }

    static double gini(double c0, double c1) {
        const double n = c0 + c1;
        const double p0 = c0 / n;
        const double p1 = c1 / n;
        return 1.0 - p0 * p0 - p1 * p1;
    }

    std::uint32_t build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                        std::size_t depth, Rng& rng) {
        std::uint32_t c0 = 0, c1 = 0;
        for (std::size_t k = begin; k < end; ++k)
            labels[idx[k]] == 0 ? ++c0 : ++c1;

        const std::size_t node_id = tree.nodes.size();
        tree.nodes.push_back(TreeNode{-1, 0.0, 0, 0, c0, c1});

        const std::size_t n = end - begin;
        if (c0 == 0 || c1 == 0 || depth >= hp.max_depth || n < 2 * hp.min_leaf)
            return static_cast<std::uint32_t>(node_id);

        // Partial Fisher-Yates draw of mtry distinct features.
        for (std::size_t k = 0; k < mtry; ++k) {
            const std::size_t pick = k + rng.bounded(n_features - k);
            std::swap(feature_scratch[k], feature_scratch[pick]);
        }

        double best_gain = 1e-12;
        std::int32_t best_feature = -1;
        double best_threshold = 0.0;
        const double parent_gini = gini(c0, c1);

        std::vector<std::pair<double, int>> column(n);
        for (std::size_t fk = 0; fk < mtry; ++fk) {
            const std::size_t f = feature_scratch[fk];
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t sample = idx[begin + k];
                column[k] = {(*rows[sample])[f], labels[sample]};
            }
            std::sort(column.begin(), column.end());
            double left0 = 0, left1 = 0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                column[k].second == 0 ? ++left0 : ++left1;
                if (column[k].first == column[k + 1].first) continue;
                const std::size_t n_left = k + 1;
                const std::size_t n_right = n - n_left;
                if (n_left < hp.min_leaf || n_right < hp.min_leaf) continue;
                const double right0 = static_cast<double>(c0) - left0;
                const double right1 = static_cast<double>(c1) - left1;
                const double weighted =
                    (static_cast<double>(n_left) * gini(left0, left1) +
                     static_cast<double>(n_right) * gini(right0, right1)) /
                    static_cast<double>(n);
                const double gain = parent_gini - weighted;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<std::int32_t>(f);
                    best_threshold = column[k].first + 0.5 * (column[k + 1].first - column[k].first);
                }
            }
        }

        if (best_feature < 0) return static_cast<std::uint32_t>(node_id);

        // Stable partition keeps index order deterministic inside children.
        const auto mid = std::stable_partition(
            idx.begin() + static_cast<std::ptrdiff_t>(begin),
            idx.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t sample) {
                return (*rows[sample])[static_cast<std::size_t>(best_feature)] < best_threshold;
            });
        const std::size_t split = static_cast<std::size_t>(mid - idx.begin());

        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        const std::uint32_t left = build(idx, begin, split, depth + 1, rng);
        tree.nodes[node_id].left = left;
        const std::uint32_t right = build(idx, split, end, depth + 1, rng);
        tree.nodes[node_id].right = right;
        return static_cast<std::uint32_t>(node_id);
    }
};

inline DecisionTree train_one_tree(const std::vector<const std::vector<double>*>& rows,
                                   const std::vector<int>& labels, const ForestHyperparams& hp,
                                   std::size_t n_features, Rng rng) {
    const std::size_t n = rows.size();
    std::vector<std::size_t> bootstrap(n);
    for (std::size_t k = 0; k < n; ++k)
        bootstrap[k] = static_cast<std::size_t>(rng.bounded(n));
    TreeBuilder builder(rows, labels, hp, n_features);
    builder.build(bootstrap, 0, n, 0, rng);
    return std::move(builder.tree);
}

}  // namespace detail

// Trains a forest on labeled feature vectors. Per-tree RNG streams are
// derived from the master seed, so the result is identical whether trees
// are grown serially or across `jobs` threads.
inline ForestModel train_forest(const std::vector<FeatureVector>& data,
                                const ForestHyperparams& hp, std::uint64_t seed,
                                std::size_t jobs = 1) {
    if (data.empty()) throw EmptyTrainingSet("cannot train on an empty dataset");
    const std::size_t d = data.front().dimension();
    std::vector<const std::vector<double>*> rows;
    std::vector<int> labels;
    rows.reserve(data.size());
    labels.reserve(data.size());
    bool saw0 = false, saw1 = false;
    for (const auto& v : data) {
        if (v.dimension() != d) throw DimensionMismatch("training vectors differ in dimension");
        if (!v.label) throw SchemaError("training vector without a label");
        rows.push_back(&v.values);
        labels.push_back(*v.label);
        (*v.label == 0 ? saw0 : saw1) = true;
    }
    if (!saw0 || !saw1) throw SingleClassDataset("training data must contain both classes");
    if (hp.n_trees == 0) throw InvalidConfig("n_trees must be >= 1");

    Rng master(seed);
    std::vector<DecisionTree> trees(hp.n_trees);
    const auto grow_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t)
            trees[t] = detail::train_one_tree(rows, labels, hp, d, master.spawn(t));
    };
    if (jobs <= 1 || hp.n_trees == 1) {
        grow_range(0, hp.n_trees);
    } else {
        const std::size_t workers = std::min<std::size_t>(jobs, hp.n_trees);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = w * hp.n_trees / workers;
            const std::size_t hi = (w + 1) * hp.n_trees / workers;
            pool.emplace_back(grow_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    return ForestModel(std::move(trees), hp, seed, d,
                       data.front().names.empty() ? std::vector<std::string>{}
                                                  : data.front().names);
}

// ---------------------------------------------------------------------------
// Stratified cross-validation with grid search
// ---------------------------------------------------------------------------

struct FoldScores {
    ConfusionCounts confusion;
    SkillScores scores;
};

struct GridPointResult {
    ForestHyperparams params;
    std::vector<FoldScores> folds;
    double mean_f1 = 0.0;
};

struct CrossValidationResult {
    std::size_t best_index = 0;
    ForestHyperparams best_params;
    std::vector<GridPointResult> grid;
};

// Stratified fold assignment: shuffle within each class, deal round-robin.
inline std::vector<std::size_t> stratified_fold_assignment(const std::vector<int>& labels,
                                                           std::size_t folds, Rng& rng) {
    std::vector<std::size_t> assignment(labels.size());
    for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng.bounded(i)]);
        for (std::size_t k = 0; k < members.size(); ++k) assignment[members[k]] = k % folds;
    }
    return assignment;
}

inline CrossValidationResult cross_validate(const std::vector<FeatureVector>& data,
                                            std::size_t folds,
                                            const std::vector<ForestHyperparams>& grid,
                                            std::uint64_t seed, std::size_t jobs = 1) {
    if (folds < 2) throw InvalidConfig("cross-validation needs at least 2 folds");
    if (grid.empty()) throw InvalidConfig("hyperparameter grid is empty");
    std::vector<int> labels;
    labels.reserve(data.size());
    std::size_t count0 = 0, count1 = 0;
    for (const auto& v : data) {
        if (!v.label) throw SchemaError("unlabeled instance in cross-validation data");
        labels.push_back(*v.label);
        (*v.label == 0 ? count0 : count1)++;
    }
    if (count0 == 0 || count1 == 0) throw SingleClassDataset("both classes required");
    if (folds > std::min(count0, count1))
        throw InsufficientClassMembers("each stratified fold must keep both classes: " +
                                       std::to_string(folds) + " folds exceed the minority count");

    Rng rng(seed);
    const auto assignment = stratified_fold_assignment(labels, folds, rng);
    // One training seed per fold, shared across grid points for fairness.
    std::vector<std::uint64_t> fold_seeds(folds);
    for (std::size_t f = 0; f < folds; ++f) fold_seeds[f] = rng.next_u64();

    CrossValidationResult result;
    for (const auto& hp : grid) {
        GridPointResult gp;
        gp.params = hp;
        double f1_sum = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<FeatureVector> train_part;
            for (std::size_t i = 0; i < data.size(); ++i)
                if (assignment[i] != f) train_part.push_back(data[i]);
            const ForestModel model = train_forest(train_part, hp, fold_seeds[f], jobs);
            FoldScores fs;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (assignment[i] != f) continue;
                const int predicted = model.predict_proba(data[i].values).label;
                const int truth = labels[i];
                if (truth == 1)
                    predicted == 1 ? ++fs.confusion.tp : ++fs.confusion.fn;
                else
                    predicted == 1 ? ++fs.confusion.fp : ++fs.confusion.tn;
            }
            fs.scores = skill_scores(fs.confusion);
            f1_sum += fs.scores.f1.value_or(0.0);
            gp.folds.push_back(fs);
        }
        gp.mean_f1 = f1_sum / static_cast<double>(folds);
        result.grid.push_back(std::move(gp));
    }

    result.best_index = 0;
    for (std::size_t g = 1; g < result.grid.size(); ++g)
        if (result.grid[g].mean_f1 > result.grid[result.best_index].mean_f1) result.best_index = g;
    result.best_params = result.grid[result.best_index].params;
    return result;
}

}  // namespace sepcf
