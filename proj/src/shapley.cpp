#include "modfoot/shapley.hpp"

#include "modfoot/error.hpp"
#include "modfoot/parallel.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <unordered_map>

namespace modfoot::shap {

namespace {

// Ternary tables hold 3^n entries per target; beyond this the sparse path is used.
constexpr int kTernaryLimit = 13;

void check_inputs(Eigen::Index n, const Eigen::MatrixXd& background) {
    if (n > kMaxFeatures)
        throw CapacityError("shapley: " + std::to_string(n) + " features exceed the enumeration limit of " +
                            std::to_string(kMaxFeatures) + "; select fewer features");
    if (n < 1) throw InvalidArgument("shapley: need at least one feature");
    if (background.rows() < 1) throw InvalidArgument("shapley: empty background");
    if (background.cols() != n) throw ShapeError("shapley: background width differs from x");
}

// Weight |S|!(n-|S|-1)!/n! = 1 / (n * C(n-1, |S|)).
std::vector<double> coalition_weights(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    double binom = 1.0;
    for (int s = 0; s < n; ++s) {
        w[s] = 1.0 / (n * binom);
        binom = binom * (n - 1 - s) / (s + 1);
    }
    return w;
}

struct Term {
    std::uint32_t in = 0;   // features that must be in S
    std::uint32_t out = 0;  // features that must not be in S
    int leaf = 0;
};

void collect(const rf::Tree& tree, int node, const Eigen::VectorXd& x, const Eigen::RowVectorXd& b, std::uint32_t in,
             std::uint32_t out, std::vector<Term>& terms) {
    const auto& nd = tree.nodes[node];
    if (nd.feature < 0) {
        terms.push_back({in, out, nd.leaf});
        return;
    }
    const std::uint32_t bit = 1u << nd.feature;
    const bool x_left = x[nd.feature] <= nd.threshold;
    const bool b_left = b[nd.feature] <= nd.threshold;
    const int x_child = x_left ? nd.left : nd.right;
    const int b_child = b_left ? nd.left : nd.right;
    if (x_left == b_left) {
        collect(tree, x_child, x, b, in, out, terms);
    } else if (in & bit) {
        collect(tree, x_child, x, b, in, out, terms);
    } else if (out & bit) {
        collect(tree, b_child, x, b, in, out, terms);
    } else {
        collect(tree, x_child, x, b, in | bit, out, terms);
        collect(tree, b_child, x, b, in, out | bit, terms);
    }
}

}  // namespace

std::vector<double> coalition_values(const Model& model, const Eigen::VectorXd& x, const Eigen::MatrixXd& background) {
    const auto n = static_cast<int>(x.size());
    check_inputs(n, background);
    const std::size_t count = std::size_t{1} << n;
    std::vector<double> v(count, 0.0);
    Eigen::VectorXd z(n);
    for (std::size_t S = 0; S < count; ++S) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < background.rows(); ++r) {
            for (int i = 0; i < n; ++i) z[i] = (S >> i) & 1u ? x[i] : background(r, i);
            acc += model(z);
        }
        v[S] = acc / static_cast<double>(background.rows());
    }
    return v;
}

Eigen::MatrixXd forest_coalition_values(const rf::Forest& forest, const Eigen::VectorXd& x, const Eigen::MatrixXd& background) {
    const auto n = static_cast<int>(x.size());
    check_inputs(n, background);
    if (n != forest.n_features()) throw ShapeError("shapley: x width differs from the forest");
    const int t = forest.n_targets();
    const double scale = 1.0 / (static_cast<double>(forest.trees().size()) * static_cast<double>(background.rows()));
    const std::size_t count = std::size_t{1} << n;
    std::vector<Term> terms;

    if (n <= kTernaryLimit) {
        std::vector<std::size_t> pow3(static_cast<std::size_t>(n) + 1, 1);
        for (int i = 1; i <= n; ++i) pow3[i] = pow3[i - 1] * 3;
        // cur holds t values per cell; cell index mixes binary digits (already
        // reduced positions) with ternary digits (0 free, 1 in, 2 out).
        std::vector<double> cur(pow3[n] * t, 0.0);
        for (const auto& tree : forest.trees()) {
            for (Eigen::Index r = 0; r < background.rows(); ++r) {
                terms.clear();
                collect(tree, 0, x, background.row(r), 0, 0, terms);
                for (const auto& term : terms) {
                    std::size_t idx = 0;
                    for (int i = 0; i < n; ++i) idx += pow3[i] * ((term.in >> i & 1u) ? 1 : (term.out >> i & 1u) ? 2 : 0);
                    for (int j = 0; j < t; ++j) cur[idx * t + j] += tree.leaf_values(term.leaf, j);
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            const std::size_t low = std::size_t{1} << i;
            const std::size_t rest = pow3[n - i - 1];
            std::vector<double> next(low * 2 * rest * t, 0.0);
            for (std::size_t hi = 0; hi < rest; ++hi) {
                for (std::size_t lo = 0; lo < low; ++lo) {
                    const std::size_t base = lo + low * (3 * hi);
                    const double* d0 = &cur[(base) * t];
                    const double* d1 = &cur[(base + low) * t];
                    const double* d2 = &cur[(base + 2 * low) * t];
                    double* n0 = &next[(lo + low * (2 * hi)) * t];
                    double* n1 = &next[(lo + low * (2 * hi + 1)) * t];
                    for (int j = 0; j < t; ++j) {
                        n0[j] = d0[j] + d2[j];
                        n1[j] = d0[j] + d1[j];
                    }
                }
            }
            cur.swap(next);
        }
        Eigen::MatrixXd v(static_cast<Eigen::Index>(count), t);
        for (std::size_t S = 0; S < count; ++S)
            for (int j = 0; j < t; ++j) v(static_cast<Eigen::Index>(S), j) = cur[S * t + j] * scale;
        return v;
    }

    // Sparse path: merge identical (in, out) constraints, then spread each over
    // the coalitions that satisfy it.
    std::unordered_map<std::uint64_t, Eigen::VectorXd> merged;
    for (const auto& tree : forest.trees()) {
        for (Eigen::Index r = 0; r < background.rows(); ++r) {
            terms.clear();
            collect(tree, 0, x, background.row(r), 0, 0, terms);
            for (const auto& term : terms) {
                const std::uint64_t key = (static_cast<std::uint64_t>(term.in) << 32) | term.out;
                auto [it, fresh] = merged.try_emplace(key, Eigen::VectorXd::Zero(t));
                it->second += tree.leaf_values.row(term.leaf).transpose();
            }
        }
    }
    std::vector<std::pair<std::uint64_t, Eigen::VectorXd>> ordered(merged.begin(), merged.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count), t);
    const std::uint32_t all = static_cast<std::uint32_t>(count - 1);
    for (const auto& [key, value] : ordered) {
        const auto in = static_cast<std::uint32_t>(key >> 32);
        const auto out = static_cast<std::uint32_t>(key & 0xffffffffu);
        const std::uint32_t free = all & ~(in | out);
        for (std::uint32_t sub = free;; sub = (sub - 1) & free) {
            v.row(in | sub) += value.transpose();
            if (sub == 0) break;
        }
    }
    return v * scale;
}

Eigen::VectorXd shapley_from_values(const Eigen::Ref<const Eigen::VectorXd>& v, int n) {
    if (n < 1 || n > kMaxFeatures) throw CapacityError("shapley: feature count outside 1.." + std::to_string(kMaxFeatures));
    const std::size_t count = std::size_t{1} << n;
    if (static_cast<std::size_t>(v.size()) != count) throw ShapeError("shapley: table size is not 2^n");
    const auto w = coalition_weights(n);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
    for (std::size_t S = 0; S < count; ++S) {
        const int size = std::popcount(static_cast<std::uint32_t>(S));
        for (int i = 0; i < n; ++i) {
            if ((S >> i) & 1u) continue;
            phi[i] += w[size] * (v[static_cast<Eigen::Index>(S | (std::size_t{1} << i))] - v[static_cast<Eigen::Index>(S)]);
        }
    }
    return phi;
}

Attribution exact_shapley(const Model& model, const Eigen::VectorXd& x, const Eigen::MatrixXd& background) {
    const auto v = coalition_values(model, x, background);
    const Eigen::Map<const Eigen::VectorXd> table(v.data(), static_cast<Eigen::Index>(v.size()));
    return {shapley_from_values(table, static_cast<int>(x.size())), v.front(), model(x)};
}

std::vector<Attribution> exact_shapley_all(const rf::Forest& forest, const Eigen::VectorXd& x, const Eigen::MatrixXd& background) {
    const Eigen::MatrixXd v = forest_coalition_values(forest, x, background);
    const Eigen::VectorXd pred = forest.predict(x);
    std::vector<Attribution> out;
    for (int j = 0; j < forest.n_targets(); ++j) out.push_back({shapley_from_values(v.col(j), static_cast<int>(x.size())), v(0, j), pred[j]});
    return out;
}

Attribution exact_shapley(const rf::Forest& forest, const Eigen::VectorXd& x, const Eigen::MatrixXd& background, int target) {
    if (target < 0 || target >= forest.n_targets()) throw InvalidArgument("shapley: target index out of range");
    return exact_shapley_all(forest, x, background)[static_cast<std::size_t>(target)];
}

std::vector<MetaRepresentation> build_meta(const surrogate::TrainedModel& model, int threads) {
    if (model.test_X.cols() != model.forest.n_features() || model.train_X.cols() != model.forest.n_features())
        throw SchemaError("build_meta: model rows do not match the forest feature schema");
    if (static_cast<int>(model.targets.size()) != model.forest.n_targets())
        throw SchemaError("build_meta: target names do not match the forest");
    std::vector<int> order(model.test_keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return model.test_keys[a] < model.test_keys[b]; });

    std::vector<std::vector<Attribution>> per_row(order.size());
    parallel_for(order.size(), threads, [&](std::size_t i) {
        per_row[i] = exact_shapley_all(model.forest, model.test_X.row(order[i]).transpose(), model.train_X);
    });
    std::vector<MetaRepresentation> out;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = 0; j < model.targets.size(); ++j) {
            const auto& a = per_row[i][j];
            out.push_back({model.test_keys[order[i]], model.targets[j], a.phi, a.base_value, a.prediction});
        }
    return out;
}

}  // namespace modfoot::shap
