#pragma once

#include "modfoot/surrogate.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace modfoot::footprint {

enum class Metric { euclidean, cosine };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

/// Symmetric distance matrix with a zero diagonal. Cosine distance is
/// 1 - cosine similarity; a zero row sits at distance 1 from every other row
/// and its index is appended to *zero_rows when given.
Eigen::MatrixXd pairwise_distance(const Eigen::MatrixXd& vectors, Metric metric, std::vector<int>* zero_rows = nullptr);

struct Merge {
    int a = 0;  // representative indices of the merged clusters, a < b
    int b = 0;
    double height = 0.0;
};

/// Agglomerative merge sequence: Ward linkage for euclidean, average linkage
/// for cosine. Equal distances merge the pair with the smallest indices first.
std::vector<Merge> linkage(const Eigen::MatrixXd& distances, Metric metric);

/// Labels 0..k-1 after replaying n-k merges, numbered by first occurrence.
std::vector<int> cut(const std::vector<Merge>& merges, int n, int k);

/// linkage + cut. Throws InvalidArgument unless 2 <= k <= n-1.
std::vector<int> agglomerate(const Eigen::MatrixXd& distances, int k, Metric metric);

/// Mean silhouette; members of singleton clusters score 0. Throws
/// InvalidArgument when fewer than two clusters are present.
double silhouette(const std::vector<int>& labels, const Eigen::MatrixXd& distances);

struct Candidate {
    Metric metric = Metric::euclidean;
    int k = 0;
    double silhouette = 0.0;
};

struct Clustering {
    Metric metric = Metric::euclidean;
    int k = 0;
    double silhouette = 0.0;
    std::vector<int> labels;  // 0..k-1
    std::vector<Candidate> evaluated;
};

/// Best silhouette over {euclidean, cosine} x [k_min, min(k_max, n-1)]; ties
/// go to the smaller k, then to euclidean.
Clustering select_clustering(const Eigen::MatrixXd& vectors, int k_min = 2, int k_max = 15, int threads = 1);

struct Ordering {
    std::vector<int> labels;           // renumbered 1..k, 1 = lowest mean target
    std::vector<double> cluster_means;  // by new label - 1
    std::vector<int> old_of_new;       // old label (0-based) of each new label - 1
};

/// Renumbers clusters by ascending mean target (ties by old label).
Ordering order_clusters(const std::vector<int>& labels, const std::vector<double>& targets);

/// Coverage matrix: one row per (config, cluster), one column per fid; each
/// cell is the mean target of that config's instances of the fid falling in
/// the cluster, empty where there are none.
struct Coverage {
    std::vector<std::string> configs;
    int k = 0;
    std::vector<int> fids;
    std::vector<std::vector<std::optional<double>>> cells;  // row = config_index * k + cluster - 1

    int populated_rows() const;
};

Coverage coverage_matrix(const std::vector<surrogate::InstanceKey>& keys, const std::vector<std::string>& config_of_row,
                         const std::vector<int>& labels, const std::vector<double>& targets,
                         const std::vector<std::string>& configs, int k);

struct Similarity {
    double agreement = 0.0;
    double cosine = 0.0;
};

/// Agreement of cluster labels and mean cosine similarity of paired vectors
/// for two configs over the same instances (paired by key). Throws
/// SchemaError when the instance sets differ.
Similarity footprint_similarity(const std::vector<surrogate::InstanceKey>& keys_a, const std::vector<int>& labels_a,
                                const Eigen::MatrixXd& vectors_a, const std::vector<surrogate::InstanceKey>& keys_b,
                                const std::vector<int>& labels_b, const Eigen::MatrixXd& vectors_b);

struct Projection {
    Eigen::MatrixXd coords;  // n x 2
    Eigen::Vector2d explained_share = Eigen::Vector2d::Zero();
    Eigen::MatrixXd components;  // dim x 2 loadings
    bool rank_deficient = false;
};

/// PCA onto two components of the mean-centred vectors. Each component's
/// largest-magnitude loading is made positive. Needs at least 3 rows.
Projection project_2d(const Eigen::MatrixXd& vectors);

struct FeatureRank {
    std::string name;
    double mean_abs = 0.0;
    double mean_signed = 0.0;
    int occurrences = 0;  // members with a non-zero value
};

/// Features ranked by mean |value| over the member rows (ties by name).
std::vector<FeatureRank> feature_analysis(const Eigen::MatrixXd& members, const std::vector<std::string>& names);

struct Entry {
    surrogate::InstanceKey key;
    std::string config_name;
    int label = 0;        // 1..k after ordering
    double target = 0.0;  // ground truth
    double u = 0.0;
    double v = 0.0;
};

struct FootprintReport {
    int dim = 0;
    Metric metric = Metric::euclidean;
    int k = 0;
    double silhouette = 0.0;
    std::vector<std::string> features;
    std::vector<std::string> configs;
    std::vector<Entry> entries;
    std::vector<double> cluster_means;
    std::vector<int> cluster_sizes;
    std::vector<Candidate> evaluated;
    std::vector<std::vector<Similarity>> similarity;  // configs x configs
    Coverage coverage;
    std::vector<std::vector<FeatureRank>> cluster_features;  // by label - 1
    Eigen::Vector2d explained_share = Eigen::Vector2d::Zero();
    bool projection_rank_deficient = false;

    std::string to_json() const;
    static FootprintReport from_json(const std::string& text);
};

/// Inputs per meta row: key, config, attribution vector and ground truth.
struct MetaRow {
    surrogate::InstanceKey key;
    std::string config_name;
    Eigen::VectorXd shap;
    double target = 0.0;
};

/// Joint clustering of all rows, ordering, coverage, config similarity,
/// projection and per-cluster feature tables.
FootprintReport build_report(const std::vector<MetaRow>& rows, const std::vector<std::string>& features,
                             const std::vector<std::string>& configs, int k_min = 2, int k_max = 15, int threads = 1);

}  // namespace modfoot::footprint
