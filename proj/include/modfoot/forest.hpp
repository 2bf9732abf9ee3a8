#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace modfoot::rf {

struct ForestParams {
    int n_trees = 200;
    int max_depth = 16;               // 0 means unlimited
    int min_samples_leaf = 2;         // counted in distinct training rows
    double max_features_fraction = 0.6;
    bool bootstrap = true;
};

/// Flat tree node. Leaves have feature == -1 and carry the row offset of their
/// target vector in Tree::leaf_values.
struct Node {
    int feature = -1;
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    int leaf = -1;
};

struct Tree {
    std::vector<Node> nodes;      // nodes[0] is the root
    Eigen::MatrixXd leaf_values;  // one row per leaf, one column per target

    int leaf_index(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Bagged multi-target CART forest. Splits maximise the weighted squared-error
/// reduction summed over all targets. Bootstrap weights are Poisson(1) draws
/// keyed by (seed, tree, row id), so the fitted forest does not depend on the
/// order in which rows are supplied.
class Forest {
public:
    Forest() = default;

    /// X: rows x features, Y: rows x targets. row_ids default to 0..n-1.
    /// Throws InvalidArgument on empty data or bad hyperparameters.
    static Forest fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const ForestParams& params,
                      std::uint64_t seed, std::vector<std::uint64_t> row_ids = {});

    Eigen::VectorXd predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::MatrixXd predict_rows(const Eigen::MatrixXd& X) const;

    /// Out-of-bag R2 averaged over targets; rows that are in-bag for every tree
    /// are skipped. NaN when no row is out of bag.
    double oob_r2() const { return oob_r2_; }

    const std::vector<Tree>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }
    int n_features() const { return n_features_; }
    int n_targets() const { return n_targets_; }
    std::uint64_t seed() const { return seed_; }

    /// Features used by at least one split.
    std::vector<int> used_features() const;

    std::string to_json() const;
    static Forest from_json(const std::string& text);

private:
    std::vector<Tree> trees_;
    ForestParams params_;
    int n_features_ = 0;
    int n_targets_ = 0;
    std::uint64_t seed_ = 0;
    double oob_r2_ = 0.0;
};

/// Validates ranges: n_trees >= 1, max_depth >= 0, min_samples_leaf >= 1,
/// max_features_fraction in (0, 1].
void validate(const ForestParams& params);

}  // namespace modfoot::rf
