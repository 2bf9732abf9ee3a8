#pragma once

#include "modfoot/bbob.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace modfoot::ela {

/// Evaluated design: rows of X are points in [-5, 5]^dim, y their values.
struct DesignSample {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    int n() const { return static_cast<int>(X.rows()); }
    int dim() const { return static_cast<int>(X.cols()); }
};

using NamedValues = std::vector<std::pair<std::string, double>>;

inline constexpr int kFeatureCount = 46;

/// The closed feature catalogue in its stable column order:
/// ela_meta (9), ela_distr (3), ic (5), nbc (5), disp (16), pca (8).
const std::vector<std::string>& feature_names();

/// Values aligned with feature_names().
struct FeatureVector {
    std::vector<double> values;

    double at(std::string_view name) const;
};

/// Scrambled Sobol design of n points scaled to [-5, 5]^dim and evaluated.
/// Throws InvalidArgument when n < 10 * dim.
DesignSample sample_design(const bbob::ProblemInstance& instance, int n, std::uint64_t rep_seed);

/// Least-squares meta-model group: linear, linear with interactions, pure
/// quadratic and full quadratic fits. Needs n > dim + 1.
NamedValues ela_meta(const DesignSample& sample);

/// Skewness, excess kurtosis and KDE peak count of y. Needs n >= 30.
NamedValues ela_distr(const DesignSample& sample);

/// Information content of the fitness sequence along a nearest-neighbour tour
/// started at the first point. The eps.* values are reported as log10(eps).
/// Needs n >= 50.
NamedValues ic(const DesignSample& sample);

/// Nearest-better clustering group. Needs n >= 50 and non-constant y.
NamedValues nbc(const DesignSample& sample);

/// Dispersion of the best 2/5/10/25 % of the sample against the whole. Needs n >= 100.
NamedValues disp(const DesignSample& sample);

/// Principal-component group on X and on (X, y). Needs n > dim.
NamedValues pca_feats(const DesignSample& sample);

/// All six groups on one sample, as a full 46-entry vector. A group that
/// throws leaves its entries as NaN.
FeatureVector compute_single(const DesignSample& sample);

struct FeatureOptions {
    int n_mult = 100;
    int reps = 10;
    std::uint64_t master_seed = 1;
    int threads = 0;
};

/// Componentwise median over `reps` independent designs of n_mult * dim points.
/// Repetition r uses the same design for every function of a dimension. NaN
/// entries are excluded from the median; a feature missing in every
/// repetition is reported as 0.
FeatureVector compute_features(const bbob::ProblemInstance& instance, const FeatureOptions& options);

/// Componentwise median over the given vectors, skipping NaN entries.
FeatureVector median_of(const std::vector<FeatureVector>& reps);

std::uint64_t repetition_seed(std::uint64_t master_seed, int dim, int rep);

}  // namespace modfoot::ela
