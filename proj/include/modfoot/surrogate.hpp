#pragma once

#include "modfoot/forest.hpp"
#include "modfoot/modcma.hpp"
#include "modfoot/parzen.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace modfoot::surrogate {

struct InstanceKey {
    int fid = 0;
    int iid = 0;
    int dim = 0;

    auto operator<=>(const InstanceKey&) const = default;
    /// Stable id used to key bootstrap draws.
    std::uint64_t row_id() const;
};

enum class Split { train, test };

inline constexpr double kPrecisionFloor = 1e-12;

/// log10(precision + 1e-12).
double target_transform(double precision);

/// Rows keyed by instance: features, per-config targets and a split tag.
struct Dataset {
    std::vector<InstanceKey> keys;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd X;
    std::vector<std::string> target_names;
    Eigen::MatrixXd Y;
    std::vector<Split> split;

    int rows() const { return static_cast<int>(keys.size()); }
    std::vector<int> indices(Split s) const;
    Dataset subset(const std::vector<int>& rows) const;
    /// Column subset in the given order. Throws SchemaError for unknown names.
    Dataset with_features(const std::vector<std::string>& names) const;
    std::vector<std::uint64_t> row_ids(const std::vector<int>& rows) const;
};

/// Joins a feature table with run results. Targets are the transformed median
/// precision over seeds for each (instance, config). Every row starts as
/// train. Throws SchemaError on duplicate keys or a missing (instance, config).
Dataset assemble(const std::vector<InstanceKey>& keys, const std::vector<std::string>& feature_names,
                 const Eigen::MatrixXd& features, const std::vector<cma::RunResult>& runs,
                 const std::vector<std::string>& config_names);

/// Median precision over seeds per (instance, config), transformed.
double median_target(const std::vector<cma::RunResult>& runs, const InstanceKey& key, const std::string& config);

/// Tags rows with iid == holdout_iid as test. Every class (fid) must carry the
/// same instance set and include holdout_iid; otherwise SchemaError.
Dataset split_holdout(Dataset data, int holdout_iid);

/// Names of the features that are not constant on the given rows.
std::vector<std::string> non_constant_features(const Dataset& data, const std::vector<int>& rows);

/// Min-max normalisation fitted on training rows and reused unchanged (no
/// clipping) on any other rows.
struct Scaler {
    std::vector<std::string> names;
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    /// Throws ContractError when a column is constant.
    static Scaler fit(const Eigen::MatrixXd& X, std::vector<std::string> names);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

using Folds = std::vector<std::vector<int>>;

/// k folds over the train rows; fold j holds the j-th smallest train iid of
/// every class. Throws SchemaError when a class has a train count other than k.
Folds stratified_cv_folds(const Dataset& data, int k = 4);

struct Score {
    Eigen::VectorXd mae;
    Eigen::VectorXd r2;
    std::vector<bool> r2_undefined;  // zero-variance truth; r2 reported as 0
};

/// Per-target MAE and R2. Throws ShapeError on mismatched shapes and
/// InvalidArgument with fewer than 2 rows.
Score score(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& truths);

/// Per-target fold-averaged MAE and R2.
struct CvScore {
    Eigen::VectorXd mae;
    Eigen::VectorXd r2;

    double mean_mae() const { return mae.mean(); }
    double mean_r2() const { return r2.mean(); }
};

/// Cross-validated forest on the given feature columns of `data`.
CvScore cross_validate(const Dataset& data, const Folds& folds, const std::vector<int>& columns,
                       const rf::ForestParams& params, std::uint64_t seed);

/// Same folds, predicting the training-fold target mean.
CvScore baseline_cv(const Dataset& data, const Folds& folds);

struct Selection {
    std::vector<std::string> features;
    std::vector<double> path;  // mean CV R2 after each addition
};

/// Greedy forward selection on mean CV R2. The first feature is always taken;
/// later ones need a gain of at least min_gain. Ties go to the smaller name.
Selection forward_select(const Dataset& data, const Folds& folds, const rf::ForestParams& params,
                         std::uint64_t seed, int n_max = 12, double min_gain = 1e-4, int threads = 1);

tpe::SearchSpace forest_space();
rf::ForestParams params_from(const tpe::Point& point);

struct TuneResult {
    rf::ForestParams params;
    double cv_r2 = 0.0;
    bool fallback = false;
    tpe::SearchResult history;
};

/// Random search followed by Parzen-estimator trials on mean CV R2. Falls back
/// to the default hyperparameters when fewer than two trials complete.
TuneResult tune(const Dataset& data, const Folds& folds, int trials, std::uint64_t seed, int threads = 1);

struct TrainOptions {
    int holdout_iid = 5;
    int trials = 50;
    int n_max = 12;
    double min_gain = 1e-4;
    std::uint64_t seed = 1;
    int threads = 1;
};

/// Everything later stages need: the fitted forest, its feature order and
/// scaler, and the scaled background (train) and test rows with their truths.
struct TrainedModel {
    int dim = 0;
    int holdout_iid = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> features;
    std::vector<std::string> targets;
    Scaler scaler;
    rf::Forest forest;
    std::vector<double> selection_path;
    int tuning_trials = 0;
    bool tuning_fallback = false;
    CvScore cv;
    CvScore baseline;
    std::vector<InstanceKey> train_keys;
    Eigen::MatrixXd train_X;  // scaled
    Eigen::MatrixXd train_Y;
    std::vector<InstanceKey> test_keys;
    Eigen::MatrixXd test_X;  // scaled
    Eigen::MatrixXd test_Y;

    /// Scales a raw feature row given by name and predicts all targets.
    /// Throws SchemaError when a model feature is missing.
    Eigen::VectorXd predict_raw(const std::vector<std::string>& names, const std::vector<double>& values) const;

    std::string to_json() const;
    static TrainedModel from_json(const std::string& text);
};

/// Full training step on one dimension's dataset: holdout split, constant
/// feature removal, scaling, folds, forward selection, tuning and final fit.
TrainedModel train(const Dataset& data, const TrainOptions& options);

}  // namespace modfoot::surrogate
