#include "modfoot/footprint.hpp"

#include "modfoot/error.hpp"
#include "modfoot/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace modfoot::footprint {

std::string to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "cosine"; }

Metric metric_from_string(const std::string& s) {
    if (s == "euclidean") return Metric::euclidean;
    if (s == "cosine") return Metric::cosine;
    throw InvalidArgument("unknown metric '" + s + "'");
}

Eigen::MatrixXd pairwise_distance(const Eigen::MatrixXd& V, Metric metric, std::vector<int>* zero_rows) {
    const auto n = V.rows();
    if (n < 2) throw InvalidArgument("pairwise_distance: need at least 2 vectors");
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    if (metric == Metric::euclidean) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) D(i, j) = D(j, i) = (V.row(i) - V.row(j)).norm();
        return D;
    }
    const Eigen::VectorXd norms = V.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i)
        if (norms[i] == 0.0 && zero_rows) zero_rows->push_back(static_cast<int>(i));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double d = 1.0;
            if (norms[i] > 0.0 && norms[j] > 0.0) d = 1.0 - std::clamp(V.row(i).dot(V.row(j)) / (norms[i] * norms[j]), -1.0, 1.0);
            D(i, j) = D(j, i) = d;
        }
    }
    return D;
}

std::vector<Merge> linkage(const Eigen::MatrixXd& distances, Metric metric) {
    const auto n = static_cast<int>(distances.rows());
    if (n < 2 || distances.cols() != n) throw ShapeError("linkage: need a square matrix with at least 2 rows");
    const bool ward = metric == Metric::euclidean;
    // Ward works on squared distances so the Lance-Williams update is exact.
    Eigen::MatrixXd d = ward ? Eigen::MatrixXd(distances.array().square()) : distances;
    std::vector<int> size(static_cast<std::size_t>(n), 1);
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    std::vector<Merge> merges;
    for (int step = 0; step + 1 < n; ++step) {
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (active[j] && d(i, j) < best) {
                    best = d(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        const double ni = size[bi], nj = size[bj];
        for (int k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            double v;
            if (ward) {
                const double nk = size[k];
                v = ((ni + nk) * d(k, bi) + (nj + nk) * d(k, bj) - nk * d(bi, bj)) / (ni + nj + nk);
            } else {
                v = (ni * d(k, bi) + nj * d(k, bj)) / (ni + nj);
            }
            d(k, bi) = d(bi, k) = v;
        }
        size[bi] += size[bj];
        active[bj] = 0;
        merges.push_back({bi, bj, ward ? std::sqrt(std::max(0.0, best)) : best});
    }
    return merges;
}

std::vector<int> cut(const std::vector<Merge>& merges, int n, int k) {
    if (k < 1 || k > n) throw InvalidArgument("cut: k out of range");
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int m = 0; m < n - k; ++m) parent[find(merges[m].b)] = find(merges[m].a);
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<int> label_of_root(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        const int r = find(i);
        if (label_of_root[r] < 0) label_of_root[r] = next++;
        labels[i] = label_of_root[r];
    }
    return labels;
}

std::vector<int> agglomerate(const Eigen::MatrixXd& distances, int k, Metric metric) {
    const auto n = static_cast<int>(distances.rows());
    if (k < 2 || k > n - 1) throw InvalidArgument("agglomerate: need 2 <= k <= n-1");
    return cut(linkage(distances, metric), n, k);
}

double silhouette(const std::vector<int>& labels, const Eigen::MatrixXd& D) {
    const auto n = static_cast<int>(labels.size());
    if (D.rows() != n || D.cols() != n) throw ShapeError("silhouette: labels and distance matrix differ in size");
    const int k = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> count(static_cast<std::size_t>(std::max(k, 0)), 0);
    for (const int l : labels) {
        if (l < 0) throw InvalidArgument("silhouette: negative label");
        ++count[l];
    }
    const auto present = std::count_if(count.begin(), count.end(), [](int c) { return c > 0; });
    if (present < 2) throw InvalidArgument("silhouette: undefined for fewer than two clusters");
    double total = 0.0;
    std::vector<double> sums(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
        if (count[labels[i]] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int j = 0; j < n; ++j) sums[labels[j]] += D(i, j);
        const double a = sums[labels[i]] / (count[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c)
            if (c != labels[i] && count[c] > 0) b = std::min(b, sums[c] / count[c]);
        const double den = std::max(a, b);
        total += den > 0.0 ? (b - a) / den : 0.0;
    }
    return total / n;
}

Clustering select_clustering(const Eigen::MatrixXd& V, int k_min, int k_max, int threads) {
    const auto n = static_cast<int>(V.rows());
    if (k_min < 2 || k_max < k_min) throw InvalidArgument("select_clustering: bad k range");
    const int k_hi = std::min(k_max, n - 1);
    if (k_hi < k_min) throw InvalidArgument("select_clustering: not enough vectors for the k range");
    const Metric metrics[2] = {Metric::euclidean, Metric::cosine};
    Eigen::MatrixXd D[2];
    std::vector<Merge> merges[2];
    parallel_for(2, threads, [&](std::size_t m) {
        D[m] = pairwise_distance(V, metrics[m]);
        merges[m] = linkage(D[m], metrics[m]);
    });
    Clustering best;
    best.silhouette = -std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_hi; ++k) {
        for (int m = 0; m < 2; ++m) {
            auto labels = cut(merges[m], n, k);
            const double s = silhouette(labels, D[m]);
            best.evaluated.push_back({metrics[m], k, s});
            if (s > best.silhouette) {
                best.silhouette = s;
                best.metric = metrics[m];
                best.k = k;
                best.labels = std::move(labels);
            }
        }
    }
    return best;
}

Ordering order_clusters(const std::vector<int>& labels, const std::vector<double>& targets) {
    if (labels.size() != targets.size()) throw ShapeError("order_clusters: one target per label required");
    if (labels.empty()) throw InvalidArgument("order_clusters: no labels");
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!std::isfinite(targets[i])) throw DomainError("order_clusters: non-finite target");
        sum[labels[i]] += targets[i];
        ++count[labels[i]];
    }
    Ordering o;
    for (int c = 0; c < k; ++c)
        if (count[c] > 0) o.old_of_new.push_back(c);
    std::stable_sort(o.old_of_new.begin(), o.old_of_new.end(), [&](int a, int b) { return sum[a] / count[a] < sum[b] / count[b]; });
    std::vector<int> new_of_old(static_cast<std::size_t>(k), 0);
    for (std::size_t r = 0; r < o.old_of_new.size(); ++r) {
        new_of_old[o.old_of_new[r]] = static_cast<int>(r) + 1;
        o.cluster_means.push_back(sum[o.old_of_new[r]] / count[o.old_of_new[r]]);
    }
    for (const int l : labels) o.labels.push_back(new_of_old[l]);
    return o;
}

int Coverage::populated_rows() const {
    int n = 0;
    for (const auto& row : cells)
        if (std::any_of(row.begin(), row.end(), [](const auto& c) { return c.has_value(); })) ++n;
    return n;
}

Coverage coverage_matrix(const std::vector<surrogate::InstanceKey>& keys, const std::vector<std::string>& config_of_row,
                         const std::vector<int>& labels, const std::vector<double>& targets,
                         const std::vector<std::string>& configs, int k) {
    const auto n = keys.size();
    if (config_of_row.size() != n || labels.size() != n || targets.size() != n) throw ShapeError("coverage_matrix: input lengths differ");
    Coverage cov;
    cov.configs = configs;
    cov.k = k;
    std::set<int> fids;
    for (const auto& key : keys) fids.insert(key.fid);
    cov.fids.assign(fids.begin(), fids.end());
    const auto rows = configs.size() * static_cast<std::size_t>(k);
    std::vector<std::vector<double>> sum(rows, std::vector<double>(cov.fids.size(), 0.0));
    std::vector<std::vector<int>> count(rows, std::vector<int>(cov.fids.size(), 0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ci = std::find(configs.begin(), configs.end(), config_of_row[i]) - configs.begin();
        if (ci == static_cast<std::ptrdiff_t>(configs.size())) throw SchemaError("coverage_matrix: unknown config '" + config_of_row[i] + "'");
        if (labels[i] < 1 || labels[i] > k) throw InvalidArgument("coverage_matrix: label outside 1..k");
        const auto fi = std::lower_bound(cov.fids.begin(), cov.fids.end(), keys[i].fid) - cov.fids.begin();
        const auto row = static_cast<std::size_t>(ci) * k + (labels[i] - 1);
        sum[row][fi] += targets[i];
        ++count[row][fi];
    }
    cov.cells.assign(rows, std::vector<std::optional<double>>(cov.fids.size()));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t f = 0; f < cov.fids.size(); ++f)
            if (count[r][f] > 0) cov.cells[r][f] = sum[r][f] / count[r][f];
    return cov;
}

Similarity footprint_similarity(const std::vector<surrogate::InstanceKey>& keys_a, const std::vector<int>& labels_a,
                                const Eigen::MatrixXd& va, const std::vector<surrogate::InstanceKey>& keys_b,
                                const std::vector<int>& labels_b, const Eigen::MatrixXd& vb) {
    if (keys_a.size() != labels_a.size() || keys_b.size() != labels_b.size() || static_cast<Eigen::Index>(keys_a.size()) != va.rows() ||
        static_cast<Eigen::Index>(keys_b.size()) != vb.rows())
        throw ShapeError("footprint_similarity: inconsistent input lengths");
    if (va.cols() != vb.cols()) throw ShapeError("footprint_similarity: vector widths differ");
    std::vector<int> ia(keys_a.size()), ib(keys_b.size());
    std::iota(ia.begin(), ia.end(), 0);
    std::iota(ib.begin(), ib.end(), 0);
    std::sort(ia.begin(), ia.end(), [&](int x, int y) { return keys_a[x] < keys_a[y]; });
    std::sort(ib.begin(), ib.end(), [&](int x, int y) { return keys_b[x] < keys_b[y]; });
    if (ia.size() != ib.size() || ia.empty()) throw SchemaError("footprint_similarity: instance sets differ");
    Similarity s;
    for (std::size_t r = 0; r < ia.size(); ++r) {
        if (!(keys_a[ia[r]] == keys_b[ib[r]])) throw SchemaError("footprint_similarity: instance sets differ");
        if (labels_a[ia[r]] == labels_b[ib[r]]) s.agreement += 1.0;
        const double na = va.row(ia[r]).norm(), nb = vb.row(ib[r]).norm();
        if (na > 0.0 && nb > 0.0) s.cosine += va.row(ia[r]).dot(vb.row(ib[r])) / (na * nb);
    }
    s.agreement /= static_cast<double>(ia.size());
    s.cosine /= static_cast<double>(ia.size());
    return s;
}

Projection project_2d(const Eigen::MatrixXd& V) {
    if (V.rows() < 3) throw InvalidArgument("project_2d: need at least 3 vectors");
    const Eigen::MatrixXd centred = V.rowwise() - V.colwise().mean();
    const Eigen::MatrixXd C = centred.transpose() * centred / static_cast<double>(V.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
    const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
    Projection p;
    p.components = Eigen::MatrixXd::Zero(V.cols(), 2);
    const double total = values.sum();
    const double tol = 1e-12 * std::max(1.0, values.size() > 0 ? values[0] : 0.0);
    for (int c = 0; c < 2 && c < V.cols(); ++c) {
        if (values[c] <= tol) {
            p.rank_deficient = true;
            continue;
        }
        Eigen::VectorXd comp = vectors.col(c);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < comp.size(); ++i)
            if (std::abs(comp[i]) > std::abs(comp[arg]) + 1e-12) arg = i;
        if (comp[arg] < 0) comp = -comp;
        p.components.col(c) = comp;
        p.explained_share[c] = total > 0.0 ? values[c] / total : 0.0;
    }
    if (V.cols() < 2) p.rank_deficient = true;
    p.coords = centred * p.components;
    return p;
}

std::vector<FeatureRank> feature_analysis(const Eigen::MatrixXd& members, const std::vector<std::string>& names) {
    if (members.rows() < 1) throw InvalidArgument("feature_analysis: empty cluster");
    if (static_cast<Eigen::Index>(names.size()) != members.cols()) throw ShapeError("feature_analysis: names do not match columns");
    std::vector<FeatureRank> out;
    for (Eigen::Index c = 0; c < members.cols(); ++c) {
        FeatureRank r;
        r.name = names[static_cast<std::size_t>(c)];
        r.mean_abs = members.col(c).cwiseAbs().mean();
        r.mean_signed = members.col(c).mean();
        r.occurrences = static_cast<int>((members.col(c).array() != 0.0).count());
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const FeatureRank& a, const FeatureRank& b) {
        return a.mean_abs > b.mean_abs || (a.mean_abs == b.mean_abs && a.name < b.name);
    });
    return out;
}

FootprintReport build_report(const std::vector<MetaRow>& rows, const std::vector<std::string>& features,
                             const std::vector<std::string>& configs, int k_min, int k_max, int threads) {
    if (rows.size() < 3) throw InvalidArgument("build_report: need at least 3 meta rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto width = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd V(n, width);
    std::vector<double> targets;
    std::vector<surrogate::InstanceKey> keys;
    std::vector<std::string> config_of_row;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (r.shap.size() != width) throw SchemaError("build_report: attribution width differs from the feature list");
        V.row(i) = r.shap.transpose();
        targets.push_back(r.target);
        keys.push_back(r.key);
        config_of_row.push_back(r.config_name);
    }

    const Clustering cl = select_clustering(V, k_min, k_max, threads);
    const Ordering ord = order_clusters(cl.labels, targets);
    const Projection proj = project_2d(V);

    FootprintReport rep;
    rep.dim = rows.front().key.dim;
    rep.metric = cl.metric;
    rep.k = cl.k;
    rep.silhouette = cl.silhouette;
    rep.features = features;
    rep.configs = configs;
    rep.evaluated = cl.evaluated;
    rep.cluster_means = ord.cluster_means;
    rep.cluster_sizes.assign(static_cast<std::size_t>(cl.k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        rep.entries.push_back({keys[s], config_of_row[s], ord.labels[s], targets[s], proj.coords(i, 0), proj.coords(i, 1)});
        ++rep.cluster_sizes[static_cast<std::size_t>(ord.labels[s] - 1)];
    }
    rep.coverage = coverage_matrix(keys, config_of_row, ord.labels, targets, configs, cl.k);
    rep.explained_share = proj.explained_share;
    rep.projection_rank_deficient = proj.rank_deficient;

    for (int c = 1; c <= cl.k; ++c) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n; ++i)
            if (ord.labels[static_cast<std::size_t>(i)] == c) members.push_back(i);
        Eigen::MatrixXd M(static_cast<Eigen::Index>(members.size()), width);
        for (std::size_t m = 0; m < members.size(); ++m) M.row(static_cast<Eigen::Index>(m)) = V.row(members[m]);
        rep.cluster_features.push_back(feature_analysis(M, features));
    }

    // Config-by-config similarity on the rows of each config.
    std::vector<std::vector<std::size_t>> of_config(configs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto ci = std::find(configs.begin(), configs.end(), config_of_row[i]) - configs.begin();
        if (ci == static_cast<std::ptrdiff_t>(configs.size())) throw SchemaError("build_report: unknown config '" + config_of_row[i] + "'");
        of_config[static_cast<std::size_t>(ci)].push_back(i);
    }
    auto pick = [&](std::size_t c, std::vector<surrogate::InstanceKey>& k, std::vector<int>& l, Eigen::MatrixXd& m) {
        m.resize(static_cast<Eigen::Index>(of_config[c].size()), width);
        for (std::size_t r = 0; r < of_config[c].size(); ++r) {
            k.push_back(keys[of_config[c][r]]);
            l.push_back(ord.labels[of_config[c][r]]);
            m.row(static_cast<Eigen::Index>(r)) = V.row(static_cast<Eigen::Index>(of_config[c][r]));
        }
    };
    rep.similarity.assign(configs.size(), std::vector<Similarity>(configs.size()));
    for (std::size_t a = 0; a < configs.size(); ++a) {
        for (std::size_t b = 0; b < configs.size(); ++b) {
            std::vector<surrogate::InstanceKey> ka, kb;
            std::vector<int> la, lb;
            Eigen::MatrixXd ma, mb;
            pick(a, ka, la, ma);
            pick(b, kb, lb, mb);
            rep.similarity[a][b] = footprint_similarity(ka, la, ma, kb, lb, mb);
        }
    }
    return rep;
}

std::string FootprintReport::to_json() const {
    nlohmann::json j;
    j["format"] = "modfoot-footprint-1";
    j["dim"] = dim;
    j["metric"] = to_string(metric);
    j["k"] = k;
    j["silhouette"] = silhouette;
    j["features"] = features;
    j["configs"] = configs;
    j["cluster_order"] = [&] {
        std::vector<int> v(static_cast<std::size_t>(k));
        std::iota(v.begin(), v.end(), 1);
        return v;
    }();
    j["cluster_means"] = cluster_means;
    j["cluster_sizes"] = cluster_sizes;
    auto& ev = j["evaluated"] = nlohmann::json::array();
    for (const auto& c : evaluated) ev.push_back({{"metric", to_string(c.metric)}, {"k", c.k}, {"silhouette", c.silhouette}});
    auto& en = j["labels"] = nlohmann::json::array();
    for (const auto& e : entries)
        en.push_back({{"fid", e.key.fid}, {"iid", e.key.iid}, {"dim", e.key.dim}, {"config_name", e.config_name},
                      {"cluster", e.label}, {"target", e.target}, {"u", e.u}, {"v", e.v}});
    auto& agree = j["similarity"]["agreement"] = nlohmann::json::array();
    auto& cosine = j["similarity"]["cosine"] = nlohmann::json::array();
    for (const auto& row : similarity) {
        std::vector<double> a, c;
        for (const auto& s : row) {
            a.push_back(s.agreement);
            c.push_back(s.cosine);
        }
        agree.push_back(a);
        cosine.push_back(c);
    }
    j["coverage"]["fids"] = coverage.fids;
    auto& cells = j["coverage"]["rows"] = nlohmann::json::array();
    for (std::size_t r = 0; r < coverage.cells.size(); ++r) {
        nlohmann::json vals = nlohmann::json::array();
        for (const auto& c : coverage.cells[r]) vals.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
        cells.push_back({{"config_name", configs[r / static_cast<std::size_t>(k)]}, {"cluster", static_cast<int>(r % static_cast<std::size_t>(k)) + 1}, {"values", vals}});
    }
    auto& cf = j["cluster_features"] = nlohmann::json::array();
    for (const auto& table : cluster_features) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& f : table) t.push_back({{"feature", f.name}, {"mean_abs", f.mean_abs}, {"mean_signed", f.mean_signed}, {"occurrences", f.occurrences}});
        cf.push_back(t);
    }
    j["projection"] = {{"method", "pca"},
                       {"explained_share", {explained_share[0], explained_share[1]}},
                       {"rank_deficient", projection_rank_deficient}};
    return j.dump(1);
}

FootprintReport FootprintReport::from_json(const std::string& text) {
    FootprintReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.value("format", "") != "modfoot-footprint-1") throw SchemaError("footprint json: unknown format tag");
        r.dim = j.at("dim").get<int>();
        r.metric = metric_from_string(j.at("metric").get<std::string>());
        r.k = j.at("k").get<int>();
        r.silhouette = j.at("silhouette").get<double>();
        r.features = j.at("features").get<std::vector<std::string>>();
        r.configs = j.at("configs").get<std::vector<std::string>>();
        r.cluster_means = j.at("cluster_means").get<std::vector<double>>();
        r.cluster_sizes = j.at("cluster_sizes").get<std::vector<int>>();
        for (const auto& c : j.at("evaluated")) r.evaluated.push_back({metric_from_string(c.at("metric").get<std::string>()), c.at("k").get<int>(), c.at("silhouette").get<double>()});
        for (const auto& e : j.at("labels"))
            r.entries.push_back({{e.at("fid").get<int>(), e.at("iid").get<int>(), e.at("dim").get<int>()}, e.at("config_name").get<std::string>(),
                                 e.at("cluster").get<int>(), e.at("target").get<double>(), e.at("u").get<double>(), e.at("v").get<double>()});
        const auto agree = j.at("similarity").at("agreement").get<std::vector<std::vector<double>>>();
        const auto cosine = j.at("similarity").at("cosine").get<std::vector<std::vector<double>>>();
        r.similarity.assign(agree.size(), {});
        for (std::size_t a = 0; a < agree.size(); ++a)
            for (std::size_t b = 0; b < agree[a].size(); ++b) r.similarity[a].push_back({agree[a][b], cosine.at(a).at(b)});
        r.coverage.configs = r.configs;
        r.coverage.k = r.k;
        r.coverage.fids = j.at("coverage").at("fids").get<std::vector<int>>();
        for (const auto& row : j.at("coverage").at("rows")) {
            std::vector<std::optional<double>> vals;
            for (const auto& v : row.at("values")) vals.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
            r.coverage.cells.push_back(std::move(vals));
        }
        for (const auto& t : j.at("cluster_features")) {
            std::vector<FeatureRank> table;
            for (const auto& f : t)
                table.push_back({f.at("feature").get<std::string>(), f.at("mean_abs").get<double>(), f.at("mean_signed").get<double>(), f.at("occurrences").get<int>()});
            r.cluster_features.push_back(std::move(table));
        }
        const auto share = j.at("projection").at("explained_share").get<std::vector<double>>();
        if (share.size() != 2) throw SchemaError("footprint json: explained_share needs 2 entries");
        r.explained_share = {share[0], share[1]};
        r.projection_rank_deficient = j.at("projection").at("rank_deficient").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("footprint json: ") + e.what());
    }
    if (r.coverage.cells.size() != r.configs.size() * static_cast<std::size_t>(r.k)) throw SchemaError("footprint json: coverage row count mismatch");
    return r;
}

}  // namespace modfoot::footprint
