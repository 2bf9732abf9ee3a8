#pragma once

#include "modfoot/forest.hpp"
#include "modfoot/surrogate.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace modfoot::shap {

/// Enumeration limit: 2^20 coalitions.
inline constexpr int kMaxFeatures = 20;

using Model = std::function<double(const Eigen::VectorXd&)>;

struct Attribution {
    Eigen::VectorXd phi;
    double base_value = 0.0;
    double prediction = 0.0;
};

/// Interventional coalition values v(S) for every bitmask S over the features:
/// the mean model output over background rows b of the point taking x on S
/// and b elsewhere. Throws CapacityError past kMaxFeatures.
std::vector<double> coalition_values(const Model& model, const Eigen::VectorXd& x, const Eigen::MatrixXd& background);

/// The same table for every forest target at once (rows = coalitions). Each
/// (tree, background row) pair is reduced to the leaves it can reach and the
/// features that must be inside / outside S to reach them, so the model is
/// never evaluated per coalition.
Eigen::MatrixXd forest_coalition_values(const rf::Forest& forest, const Eigen::VectorXd& x, const Eigen::MatrixXd& background);

/// Shapley values from a coalition table of 2^n entries.
Eigen::VectorXd shapley_from_values(const Eigen::Ref<const Eigen::VectorXd>& v, int n);

/// Exact attribution of a generic model. prediction is model(x).
Attribution exact_shapley(const Model& model, const Eigen::VectorXd& x, const Eigen::MatrixXd& background);

/// Exact attribution of one forest target.
Attribution exact_shapley(const rf::Forest& forest, const Eigen::VectorXd& x, const Eigen::MatrixXd& background, int target);

/// Exact attributions of every forest target from one coalition table.
std::vector<Attribution> exact_shapley_all(const rf::Forest& forest, const Eigen::VectorXd& x, const Eigen::MatrixXd& background);

/// One (instance, config) pair described by its attribution vector.
struct MetaRepresentation {
    surrogate::InstanceKey key;
    std::string config_name;
    Eigen::VectorXd shap;
    double base_value = 0.0;
    double prediction = 0.0;
};

/// Attributions of every test row for every target, with the training split as
/// background. Ordered by instance key, then by target order.
std::vector<MetaRepresentation> build_meta(const surrogate::TrainedModel& model, int threads = 1);

}  // namespace modfoot::shap
