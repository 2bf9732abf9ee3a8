#include "modfoot/error.hpp"
#include "modfoot/footprint.hpp"
#include "modfoot/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace modfoot;
using namespace modfoot::footprint;

namespace {

const double kPoints[10][3] = {{0.001, 0.299, -0.274}, {-0.891, -0.455, -0.992}, {0.06, 1.34, -0.492},  {-0.62, 0.49, 0.357},
                               {0.105, -0.93, -0.029}, {0.695, -1.344, -0.458}, {-1.901, -1.29, -1.842}, {-0.235, -1.267, 0.271},
                               {0.157, -0.187, -2.517}, {-0.539, -0.049, 0.113}};

Eigen::MatrixXd points() {
    Eigen::MatrixXd X(10, 3);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) X(i, j) = kPoints[i][j];
    return X;
}

std::vector<int> canonical(const std::vector<int>& labels) {
    std::map<int, int> seen;
    std::vector<int> out;
    for (int l : labels) out.push_back(seen.emplace(l, static_cast<int>(seen.size())).first->second);
    return out;
}

Eigen::MatrixXd blobs(int per_blob, const std::vector<Eigen::Vector2d>& centres, double spread, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(per_blob * static_cast<int>(centres.size()), 2);
    for (std::size_t c = 0; c < centres.size(); ++c)
        for (int i = 0; i < per_blob; ++i) {
            const auto r = static_cast<Eigen::Index>(c) * per_blob + i;
            X(r, 0) = centres[c][0] + spread * rng.normal();
            X(r, 1) = centres[c][1] + spread * rng.normal();
        }
    return X;
}

}  // namespace

TEST_CASE("distances") {
    Eigen::MatrixXd V(2, 2);
    V << 0, 3, 4, 0;
    CHECK(pairwise_distance(V, Metric::euclidean)(0, 1) == 5.0);
    CHECK(pairwise_distance(V, Metric::cosine)(0, 1) == doctest::Approx(1.0));
    Eigen::MatrixXd same(2, 3);
    same << 1, 2, 3, 1, 2, 3;
    CHECK(pairwise_distance(same, Metric::euclidean)(0, 1) == 0.0);
    CHECK(pairwise_distance(same, Metric::cosine)(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
    Eigen::MatrixXd z(2, 2);
    z << 0, 0, 1, 1;
    std::vector<int> zero_rows;
    CHECK(pairwise_distance(z, Metric::cosine, &zero_rows)(0, 1) == 1.0);
    CHECK(zero_rows == std::vector<int>{0});
}

TEST_CASE("linkage matches an independent hierarchical clustering") {
    const auto X = points();
    const double ward[9] = {0.5649504403042801, 0.5971750162222127, 0.8960829574691547, 1.1390705275208672, 1.5619939180419364,
                            1.5991783306852723, 2.3357280806349583, 3.262962092799672,  3.973320355523709};
    const double avg_cos[9] = {0.00980032938738995, 0.07073632715850542, 0.07577292616557474, 0.20869805567914484, 0.26891793056737767,
                               0.3498169464824752,  0.7604678764681547,  0.9763483949821532,  1.2275461055387766};
    const auto mw = linkage(pairwise_distance(X, Metric::euclidean), Metric::euclidean);
    const auto mc = linkage(pairwise_distance(X, Metric::cosine), Metric::cosine);
    REQUIRE(mw.size() == 9);
    for (int i = 0; i < 9; ++i) {
        CHECK(mw[static_cast<std::size_t>(i)].height == doctest::Approx(ward[i]).epsilon(1e-12));
        CHECK(mc[static_cast<std::size_t>(i)].height == doctest::Approx(avg_cos[i]).epsilon(1e-12));
    }
    const std::map<int, std::vector<int>> ward_labels = {{2, {0, 1, 0, 0, 0, 0, 1, 0, 1, 0}},
                                                         {3, {0, 1, 0, 0, 2, 2, 1, 2, 1, 0}},
                                                         {4, {0, 1, 0, 0, 2, 2, 1, 2, 3, 0}}};
    const std::map<int, std::vector<int>> cos_labels = {{2, {0, 1, 0, 0, 1, 1, 1, 1, 1, 0}},
                                                        {3, {0, 1, 0, 2, 1, 1, 1, 1, 1, 2}},
                                                        {4, {0, 1, 0, 2, 3, 3, 1, 3, 1, 2}}};
    const std::map<int, std::pair<double, double>> sil = {{2, {0.31265882906633263, 0.46956790649210517}},
                                                          {3, {0.3736664899276398, 0.5460461909368797}},
                                                          {4, {0.3698162361325681, 0.728844687308585}}};
    for (int k = 2; k <= 4; ++k) {
        const auto lw = agglomerate(pairwise_distance(X, Metric::euclidean), k, Metric::euclidean);
        const auto lc = agglomerate(pairwise_distance(X, Metric::cosine), k, Metric::cosine);
        CHECK(canonical(lw) == ward_labels.at(k));
        CHECK(canonical(lc) == cos_labels.at(k));
        CHECK(silhouette(lw, pairwise_distance(X, Metric::euclidean)) == doctest::Approx(sil.at(k).first).epsilon(1e-12));
        CHECK(silhouette(lc, pairwise_distance(X, Metric::cosine)) == doctest::Approx(sil.at(k).second).epsilon(1e-12));
    }
}

TEST_CASE("agglomeration basics") {
    const auto X = blobs(10, {{0, 0}, {20, 20}}, 0.5, 3);
    const auto l = agglomerate(pairwise_distance(X, Metric::euclidean), 2, Metric::euclidean);
    for (int i = 0; i < 20; ++i) CHECK(l[static_cast<std::size_t>(i)] == (i < 10 ? 0 : 1));

    const auto P = points();
    const auto one = agglomerate(pairwise_distance(P, Metric::euclidean), 9, Metric::euclidean);
    CHECK(*std::max_element(one.begin(), one.end()) == 8);

    Eigen::MatrixXd dup(4, 1);
    dup << 0.0, 5.0, 0.0, 9.0;
    const auto m = linkage(pairwise_distance(dup, Metric::euclidean), Metric::euclidean);
    CHECK(m.front().a == 0);
    CHECK(m.front().b == 2);
    CHECK(m.front().height == 0.0);
    CHECK_THROWS_AS(agglomerate(pairwise_distance(dup, Metric::euclidean), 4, Metric::euclidean), InvalidArgument);
}

TEST_CASE("silhouette") {
    Eigen::MatrixXd line(4, 1);
    line << 0.0, 0.1, 10.0, 10.1;
    CHECK(silhouette({0, 0, 1, 1}, pairwise_distance(line, Metric::euclidean)) > 0.95);
    Eigen::MatrixXd dup(4, 1);
    dup << 1.0, 1.0, 3.0, 3.0;
    CHECK(silhouette({0, 0, 1, 1}, pairwise_distance(dup, Metric::euclidean)) == 1.0);
    std::vector<double> scores;
    for (int t = 0; t < 20; ++t) {
        Rng rng(Rng::derive({77, static_cast<std::uint64_t>(t)}));
        Eigen::MatrixXd U(60, 2);
        for (auto& v : U.reshaped()) v = rng.uniform();
        std::vector<int> labels;
        for (int i = 0; i < 60; ++i) labels.push_back(static_cast<int>(rng.below(3)));
        scores.push_back(std::fabs(silhouette(labels, pairwise_distance(U, Metric::euclidean))));
    }
    std::sort(scores.begin(), scores.end());
    CHECK(0.5 * (scores[9] + scores[10]) < 0.2);
    CHECK(silhouette({0, 1, 1}, pairwise_distance(line.topRows(3), Metric::euclidean)) == doctest::Approx((0.0 + (0.1 - 9.9) / 9.9 + (10.0 - 9.9) / 10.0) / 3));
    CHECK_THROWS_AS(silhouette({0, 0, 0, 0}, pairwise_distance(dup, Metric::euclidean)), InvalidArgument);
}

TEST_CASE("model selection") {
    const auto X = blobs(15, {{0, 0}, {10, 0}, {5, 9}}, 0.4, 5);
    const auto c = select_clustering(X, 2, 15, 2);
    CHECK(c.k == 3);
    CHECK(c.metric == Metric::euclidean);
    for (const auto& e : c.evaluated) CHECK(c.silhouette >= e.silhouette);
    CHECK(c.evaluated.size() == 28);
    const auto again = select_clustering(X, 2, 15, 1);
    CHECK(again.labels == c.labels);
    CHECK(again.silhouette == c.silhouette);
    CHECK(select_clustering(X, 2, 2).k == 2);
}

TEST_CASE("ordering and coverage") {
    const std::vector<int> labels = {0, 0, 1, 1};
    const auto o = order_clusters(labels, {1.4, 1.6, 0.1, 0.3});
    CHECK(o.labels == std::vector<int>{2, 2, 1, 1});
    CHECK(o.cluster_means[0] == doctest::Approx(0.2));
    CHECK(o.cluster_means[1] == doctest::Approx(1.5));
    CHECK(o.old_of_new == std::vector<int>{1, 0});

    // Two configs over three fids; renumbering must only permute rows.
    std::vector<surrogate::InstanceKey> keys;
    std::vector<std::string> cfg;
    std::vector<int> raw;
    std::vector<double> target;
    for (int c = 0; c < 2; ++c)
        for (int f = 1; f <= 3; ++f) {
            keys.push_back({f, 5, 5});
            cfg.push_back(c ? "B" : "A");
            raw.push_back((f + c) % 3);
            target.push_back(f * 1.0 + c);
        }
    const auto ord = order_clusters(raw, target);
    const auto cov = coverage_matrix(keys, cfg, ord.labels, target, {"A", "B"}, 3);
    CHECK(cov.cells.size() == 6);
    CHECK(cov.fids == std::vector<int>{1, 2, 3});
    std::vector<double> renumbered, plain;
    std::vector<int> shifted;
    for (int l : raw) shifted.push_back(l + 1);
    const auto cov_raw = coverage_matrix(keys, cfg, shifted, target, {"A", "B"}, 3);
    for (const auto* m : {&cov, &cov_raw})
        for (const auto& row : m->cells)
            for (const auto& cell : row)
                if (cell) (m == &cov ? renumbered : plain).push_back(*cell);
    std::sort(renumbered.begin(), renumbered.end());
    std::sort(plain.begin(), plain.end());
    CHECK(renumbered == plain);
    // Each (config, fid) lands in exactly one cluster row.
    for (int c = 0; c < 2; ++c)
        for (int f = 0; f < 3; ++f) {
            int filled = 0;
            for (int k = 0; k < 3; ++k) filled += cov.cells[static_cast<std::size_t>(c * 3 + k)][static_cast<std::size_t>(f)].has_value();
            CHECK(filled == 1);
        }
    CHECK(cov.populated_rows() <= 6);
}

TEST_CASE("footprint similarity") {
    const std::vector<surrogate::InstanceKey> keys = {{1, 5, 5}, {2, 5, 5}, {3, 5, 5}};
    const std::vector<surrogate::InstanceKey> rev = {{3, 5, 5}, {2, 5, 5}, {1, 5, 5}};
    Eigen::MatrixXd V(3, 2);
    V << 1, 2, -1, 0.5, 3, 3;
    const auto self = footprint_similarity(keys, {1, 2, 1}, V, keys, {1, 2, 1}, V);
    CHECK(self.agreement == 1.0);
    CHECK(self.cosine == doctest::Approx(1.0));
    const auto neg = footprint_similarity(keys, {1, 2, 1}, V, keys, {1, 2, 2}, -V);
    CHECK(neg.cosine == doctest::Approx(-1.0));
    CHECK(neg.agreement == doctest::Approx(2.0 / 3));
    const Eigen::MatrixXd Vr = V.colwise().reverse();
    const auto paired = footprint_similarity(keys, {1, 2, 1}, V, rev, {1, 2, 1}, Vr);
    CHECK(paired.cosine == doctest::Approx(1.0));
    const auto ab = footprint_similarity(keys, {1, 2, 3}, V, keys, {1, 1, 3}, V * 2.0);
    const auto ba = footprint_similarity(keys, {1, 1, 3}, V * 2.0, keys, {1, 2, 3}, V);
    CHECK(ab.agreement == ba.agreement);
    CHECK(ab.cosine == ba.cosine);
    CHECK_THROWS_AS(footprint_similarity(keys, {1, 1, 1}, V, {{1, 5, 5}, {2, 5, 5}, {4, 5, 5}}, {1, 1, 1}, V), SchemaError);
}

TEST_CASE("projection") {
    Rng rng(21);
    Eigen::MatrixXd basis(2, 12), coef(40, 2);
    for (auto& v : basis.reshaped()) v = rng.normal();
    for (auto& v : coef.reshaped()) v = rng.normal();
    const Eigen::MatrixXd plane = coef * basis;
    const auto p = project_2d(plane);
    const Eigen::RowVectorXd mean = plane.colwise().mean();
    const Eigen::MatrixXd rebuilt = (p.coords * p.components.transpose()).rowwise() + mean;
    CHECK((rebuilt - plane).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(p.explained_share.sum() == doctest::Approx(1.0));

    Eigen::MatrixXd iso(4000, 12);
    for (auto& v : iso.reshaped()) v = rng.normal();
    const auto q = project_2d(iso);
    CHECK(std::fabs(q.explained_share.sum() - 2.0 / 12) <= 0.1);
    const auto q2 = project_2d(iso);
    CHECK(q2.coords == q.coords);
    for (int c = 0; c < 2; ++c) {
        Eigen::Index at = 0;
        q.components.col(c).cwiseAbs().maxCoeff(&at);
        CHECK(q.components(at, c) > 0.0);
    }
}

TEST_CASE("feature analysis") {
    Eigen::MatrixXd same(3, 3);
    same << 0.5, -2.0, 0.0, 0.5, -2.0, 0.0, 0.5, -2.0, 0.0;
    const auto r = feature_analysis(same, {"a", "b", "c"});
    CHECK(r[0].name == "b");
    CHECK(r[0].mean_signed == -2.0);
    CHECK(r[1].name == "a");
    CHECK(r[2].name == "c");
    CHECK(r[2].mean_abs == 0.0);
    CHECK(r[2].occurrences == 0);
    CHECK(r[0].occurrences == 3);
}

TEST_CASE("report assembly and serialisation") {
    std::vector<MetaRow> rows;
    const std::vector<std::string> configs = {"good1", "good2", "bad"};
    Rng rng(31);
    for (int f = 1; f <= 12; ++f)
        for (std::size_t c = 0; c < configs.size(); ++c) {
            MetaRow r;
            r.key = {f, 5, 5};
            r.config_name = configs[c];
            r.shap = Eigen::Vector3d(f <= 6 ? 1.0 : -1.0, c == 2 ? 3.0 : 0.0, 0.0) + 0.05 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
            r.target = f <= 6 ? -8.0 : 1.0 + (c == 2);
            rows.push_back(r);
        }
    const auto rep = build_report(rows, {"x", "y", "z"}, configs, 2, 15, 2);
    int total = 0;
    for (int s : rep.cluster_sizes) total += s;
    CHECK(total == 36);
    CHECK(rep.entries.size() == 36);
    CHECK(std::is_sorted(rep.cluster_means.begin(), rep.cluster_means.end()));
    CHECK(rep.similarity[0][1].agreement >= rep.similarity[0][2].agreement);
    CHECK(rep.similarity[0][1].agreement == rep.similarity[1][0].agreement);
    for (const auto& e : rep.evaluated) CHECK(rep.silhouette >= e.silhouette);
    const auto back = FootprintReport::from_json(rep.to_json());
    CHECK(back.to_json() == rep.to_json());
    CHECK_THROWS_AS(FootprintReport::from_json("{}"), SchemaError);
}
