#include "modfoot/forest.hpp"

#include "modfoot/error.hpp"
#include "modfoot/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace modfoot::rf {

namespace {

constexpr std::uint64_t kBootstrapTag = 0xB007'5742ULL;
constexpr std::uint64_t kFeatureTag = 0xFEA7'0001ULL;

// Knuth's multiplication method; mean and variance 1.
int poisson1(Rng& rng) {
    const double limit = std::exp(-1.0);
    int k = 0;
    double p = rng.uniform();
    while (p > limit) {
        ++k;
        p *= rng.uniform();
    }
    return k;
}

struct Builder {
    const Eigen::MatrixXd& X;
    const Eigen::MatrixXd& Y;
    const std::vector<double>& w;
    const ForestParams& params;
    std::uint64_t seed;
    std::uint64_t tree_index;
    int n_try;
    Tree tree;
    std::vector<std::vector<double>> leaf_rows;
    std::vector<int> order;  // scratch

    struct Task {
        int node;
        int depth;
        std::vector<int> rows;
    };

    void make_leaf(int node, const std::vector<int>& rows) {
        const auto t = static_cast<int>(Y.cols());
        std::vector<double> v(static_cast<std::size_t>(t), 0.0);
        double W = 0.0;
        for (const int r : rows) {
            W += w[r];
            for (int j = 0; j < t; ++j) v[j] += w[r] * Y(r, j);
        }
        for (auto& x : v) x /= W;
        tree.nodes[node].leaf = static_cast<int>(leaf_rows.size());
        leaf_rows.push_back(std::move(v));
    }

    void build(std::vector<int> root_rows) {
        const auto p = static_cast<int>(X.cols());
        const auto t = static_cast<int>(Y.cols());
        tree.nodes.emplace_back();
        std::vector<Task> stack;
        stack.push_back({0, 0, std::move(root_rows)});
        std::vector<int> features(static_cast<std::size_t>(p));
        std::vector<double> S(t), SL(t);
        while (!stack.empty()) {
            Task task = std::move(stack.back());
            stack.pop_back();
            const auto& rows = task.rows;
            const int m = static_cast<int>(rows.size());

            double W = 0.0;
            std::fill(S.begin(), S.end(), 0.0);
            double sq = 0.0;
            for (const int r : rows) {
                W += w[r];
                for (int j = 0; j < t; ++j) {
                    S[j] += w[r] * Y(r, j);
                    sq += w[r] * Y(r, j) * Y(r, j);
                }
            }
            double base = 0.0;
            for (int j = 0; j < t; ++j) base += S[j] * S[j] / W;
            const double sse = std::max(0.0, sq - base);

            const bool depth_done = params.max_depth > 0 && task.depth >= params.max_depth;
            if (depth_done || m < 2 * params.min_samples_leaf || sse <= 1e-14 * std::max(1.0, sq)) {
                make_leaf(task.node, rows);
                continue;
            }

            Rng rng = Rng::derive({kFeatureTag, seed, tree_index, static_cast<std::uint64_t>(task.node)});
            std::iota(features.begin(), features.end(), 0);
            for (int i = 0; i < n_try; ++i) {
                const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - i)));
                std::swap(features[i], features[j]);
            }

            int best_feature = -1;
            double best_threshold = 0.0;
            double best_gain = 1e-12 * sse;
            order = rows;
            for (int fi = 0; fi < n_try; ++fi) {
                const int f = features[fi];
                std::sort(order.begin(), order.end(), [&](int a, int b) {
                    return X(a, f) < X(b, f) || (X(a, f) == X(b, f) && a < b);
                });
                if (X(order.front(), f) == X(order.back(), f)) continue;
                double WL = 0.0;
                std::fill(SL.begin(), SL.end(), 0.0);
                for (int i = 0; i + 1 < m; ++i) {
                    const int r = order[i];
                    WL += w[r];
                    for (int j = 0; j < t; ++j) SL[j] += w[r] * Y(r, j);
                    const double a = X(r, f);
                    const double b = X(order[i + 1], f);
                    if (!(b > a)) continue;
                    if (i + 1 < params.min_samples_leaf || m - i - 1 < params.min_samples_leaf) continue;
                    const double WR = W - WL;
                    double gain = -base;
                    for (int j = 0; j < t; ++j) {
                        const double sr = S[j] - SL[j];
                        gain += SL[j] * SL[j] / WL + sr * sr / WR;
                    }
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = f;
                        double mid = 0.5 * (a + b);
                        if (!(mid < b)) mid = a;
                        best_threshold = mid;
                    }
                }
            }
            if (best_feature < 0) {
                make_leaf(task.node, rows);
                continue;
            }
            std::vector<int> left, right;
            for (const int r : rows) (X(r, best_feature) <= best_threshold ? left : right).push_back(r);
            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            const int ri = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            Node& node = tree.nodes[task.node];
            node.feature = best_feature;
            node.threshold = best_threshold;
            node.left = li;
            node.right = ri;
            // Right child is pushed first so the left subtree is built first.
            stack.push_back({ri, task.depth + 1, std::move(right)});
            stack.push_back({li, task.depth + 1, std::move(left)});
        }
        tree.leaf_values.resize(static_cast<Eigen::Index>(leaf_rows.size()), t);
        for (std::size_t l = 0; l < leaf_rows.size(); ++l)
            for (int j = 0; j < t; ++j) tree.leaf_values(static_cast<Eigen::Index>(l), j) = leaf_rows[l][j];
    }
};

}  // namespace

void validate(const ForestParams& p) {
    if (p.n_trees < 1) throw InvalidArgument("forest: n_trees must be >= 1");
    if (p.max_depth < 0) throw InvalidArgument("forest: max_depth must be >= 0");
    if (p.min_samples_leaf < 1) throw InvalidArgument("forest: min_samples_leaf must be >= 1");
    if (!(p.max_features_fraction > 0.0 && p.max_features_fraction <= 1.0))
        throw InvalidArgument("forest: max_features_fraction must be in (0, 1]");
}

int Tree::leaf_index(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    int k = 0;
    while (nodes[k].feature >= 0) k = x[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
    return nodes[k].leaf;
}

Forest Forest::fit(const Eigen::MatrixXd& X_in, const Eigen::MatrixXd& Y_in, const ForestParams& params,
                   std::uint64_t seed, std::vector<std::uint64_t> row_ids) {
    validate(params);
    const auto n = static_cast<int>(X_in.rows());
    if (n < 1 || X_in.cols() < 1 || Y_in.cols() < 1) throw InvalidArgument("forest: need at least one row, feature and target");
    if (Y_in.rows() != n) throw ShapeError("forest: X and Y row counts differ");
    if (!X_in.allFinite() || !Y_in.allFinite()) throw DomainError("forest: non-finite training data");
    if (row_ids.empty()) {
        row_ids.resize(static_cast<std::size_t>(n));
        std::iota(row_ids.begin(), row_ids.end(), 0);
    }
    if (static_cast<int>(row_ids.size()) != n) throw ShapeError("forest: row_ids size differs from row count");

    // Canonical row order by id makes the fit independent of the input order.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return row_ids[a] < row_ids[b]; });
    Eigen::MatrixXd X(n, X_in.cols()), Y(n, Y_in.cols());
    std::vector<std::uint64_t> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        X.row(i) = X_in.row(perm[i]);
        Y.row(i) = Y_in.row(perm[i]);
        ids[i] = row_ids[perm[i]];
    }

    Forest forest;
    forest.params_ = params;
    forest.n_features_ = static_cast<int>(X.cols());
    forest.n_targets_ = static_cast<int>(Y.cols());
    forest.seed_ = seed;
    const int p = forest.n_features_;
    const int n_try = std::clamp(static_cast<int>(std::floor(params.max_features_fraction * p + 1e-9)), 1, p);

    Eigen::MatrixXd oob_sum = Eigen::MatrixXd::Zero(n, Y.cols());
    std::vector<int> oob_count(static_cast<std::size_t>(n), 0);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int t = 0; t < params.n_trees; ++t) {
        std::vector<int> rows;
        if (params.bootstrap) {
            for (int i = 0; i < n; ++i) {
                Rng rng = Rng::derive({kBootstrapTag, seed, static_cast<std::uint64_t>(t), ids[i]});
                w[i] = poisson1(rng);
                if (w[i] > 0) rows.push_back(i);
            }
        }
        if (rows.empty()) {
            // No bootstrap, or an empty draw (likely only for tiny data): use every row once.
            std::fill(w.begin(), w.end(), 1.0);
            rows.resize(static_cast<std::size_t>(n));
            std::iota(rows.begin(), rows.end(), 0);
        }
        Builder b{X, Y, w, params, seed, static_cast<std::uint64_t>(t), n_try, {}, {}, {}};
        b.build(rows);
        for (int i = 0; i < n; ++i) {
            if (w[i] > 0) continue;
            oob_sum.row(i) += b.tree.leaf_values.row(b.tree.leaf_index(X.row(i).transpose()));
            ++oob_count[i];
        }
        forest.trees_.push_back(std::move(b.tree));
    }

    std::vector<int> oob_rows;
    for (int i = 0; i < n; ++i)
        if (oob_count[i] > 0) oob_rows.push_back(i);
    if (oob_rows.size() < 2) {
        forest.oob_r2_ = std::numeric_limits<double>::quiet_NaN();
    } else {
        double acc = 0.0;
        int used = 0;
        for (int j = 0; j < Y.cols(); ++j) {
            double mean = 0.0;
            for (const int i : oob_rows) mean += Y(i, j);
            mean /= static_cast<double>(oob_rows.size());
            double ss_res = 0.0, ss_tot = 0.0;
            for (const int i : oob_rows) {
                const double pred = oob_sum(i, j) / oob_count[i];
                ss_res += (Y(i, j) - pred) * (Y(i, j) - pred);
                ss_tot += (Y(i, j) - mean) * (Y(i, j) - mean);
            }
            if (ss_tot > 0.0) {
                acc += 1.0 - ss_res / ss_tot;
                ++used;
            }
        }
        forest.oob_r2_ = used > 0 ? acc / used : 0.0;
    }
    return forest;
}

Eigen::VectorXd Forest::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != n_features_) throw ShapeError("forest: feature row has wrong length");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_targets_);
    for (const auto& tree : trees_) out += tree.leaf_values.row(tree.leaf_index(x)).transpose();
    return out / static_cast<double>(trees_.size());
}

Eigen::MatrixXd Forest::predict_rows(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out(X.rows(), n_targets_);
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.row(i) = predict(Eigen::VectorXd(X.row(i).transpose())).transpose();
    return out;
}

std::vector<int> Forest::used_features() const {
    std::vector<char> used(static_cast<std::size_t>(n_features_), 0);
    for (const auto& tree : trees_)
        for (const auto& node : tree.nodes)
            if (node.feature >= 0) used[node.feature] = 1;
    std::vector<int> out;
    for (int f = 0; f < n_features_; ++f)
        if (used[f]) out.push_back(f);
    return out;
}

std::string Forest::to_json() const {
    nlohmann::json j;
    j["params"] = {{"n_trees", params_.n_trees},
                   {"max_depth", params_.max_depth},
                   {"min_samples_leaf", params_.min_samples_leaf},
                   {"max_features_fraction", params_.max_features_fraction},
                   {"bootstrap", params_.bootstrap}};
    j["n_features"] = n_features_;
    j["n_targets"] = n_targets_;
    j["seed"] = seed_;
    j["oob_r2"] = std::isfinite(oob_r2_) ? nlohmann::json(oob_r2_) : nlohmann::json(nullptr);
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json t;
        std::vector<int> feature, left, right, leaf;
        std::vector<double> threshold;
        for (const auto& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            leaf.push_back(node.leaf);
        }
        t["feature"] = feature;
        t["threshold"] = threshold;
        t["left"] = left;
        t["right"] = right;
        t["leaf"] = leaf;
        auto& values = t["values"] = nlohmann::json::array();
        for (Eigen::Index r = 0; r < tree.leaf_values.rows(); ++r) {
            std::vector<double> row(tree.leaf_values.cols());
            for (Eigen::Index c = 0; c < tree.leaf_values.cols(); ++c) row[c] = tree.leaf_values(r, c);
            values.push_back(row);
        }
        trees.push_back(std::move(t));
    }
    return j.dump();
}

Forest Forest::from_json(const std::string& text) {
    Forest f;
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& p = j.at("params");
        f.params_.n_trees = p.at("n_trees").get<int>();
        f.params_.max_depth = p.at("max_depth").get<int>();
        f.params_.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        f.params_.max_features_fraction = p.at("max_features_fraction").get<double>();
        f.params_.bootstrap = p.at("bootstrap").get<bool>();
        f.n_features_ = j.at("n_features").get<int>();
        f.n_targets_ = j.at("n_targets").get<int>();
        f.seed_ = j.at("seed").get<std::uint64_t>();
        f.oob_r2_ = j.at("oob_r2").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("oob_r2").get<double>();
        for (const auto& t : j.at("trees")) {
            Tree tree;
            const auto feature = t.at("feature").get<std::vector<int>>();
            const auto threshold = t.at("threshold").get<std::vector<double>>();
            const auto left = t.at("left").get<std::vector<int>>();
            const auto right = t.at("right").get<std::vector<int>>();
            const auto leaf = t.at("leaf").get<std::vector<int>>();
            const auto values = t.at("values").get<std::vector<std::vector<double>>>();
            const std::size_t nn = feature.size();
            if (threshold.size() != nn || left.size() != nn || right.size() != nn || leaf.size() != nn)
                throw SchemaError("forest json: node arrays differ in length");
            for (std::size_t k = 0; k < nn; ++k) {
                // Children always follow their parent, which also rules out cycles.
                const int limit = static_cast<int>(nn);
                if (feature[k] >= f.n_features_ || (feature[k] >= 0 && (left[k] <= static_cast<int>(k) || left[k] >= limit || right[k] <= static_cast<int>(k) || right[k] >= limit)) ||
                    (feature[k] < 0 && (leaf[k] < 0 || leaf[k] >= static_cast<int>(values.size()))))
                    throw SchemaError("forest json: node references out of range");
                tree.nodes.push_back({feature[k], threshold[k], left[k], right[k], leaf[k]});
            }
            tree.leaf_values.resize(static_cast<Eigen::Index>(values.size()), f.n_targets_);
            for (std::size_t r = 0; r < values.size(); ++r) {
                if (static_cast<int>(values[r].size()) != f.n_targets_) throw SchemaError("forest json: leaf width mismatch");
                for (int c = 0; c < f.n_targets_; ++c) tree.leaf_values(static_cast<Eigen::Index>(r), c) = values[r][c];
            }
            f.trees_.push_back(std::move(tree));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("forest json: ") + e.what());
    }
    if (f.trees_.empty()) throw SchemaError("forest json: no trees");
    return f;
}

}  // namespace modfoot::rf
