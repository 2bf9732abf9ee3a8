#include "modfoot/error.hpp"
#include "modfoot/forest.hpp"
#include "modfoot/parzen.hpp"
#include "modfoot/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace modfoot;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd M(rows, cols);
    for (auto& v : M.reshaped()) v = rng.uniform();
    return M;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("single row is memorised") {
    Eigen::MatrixXd X(1, 3);
    X << 0.2, 0.4, 0.6;
    Eigen::MatrixXd Y(1, 2);
    Y << 3.0, -1.0;
    const auto f = rf::Forest::fit(X, Y, {}, 1);
    const auto p = f.predict(Eigen::Vector3d(9, 9, 9));
    CHECK(p[0] == 3.0);
    CHECK(p[1] == -1.0);
}

TEST_CASE("a fully grown tree reproduces its training rows") {
    const auto X = random_matrix(60, 4, 2);
    const Eigen::MatrixXd Y = random_matrix(60, 2, 3);
    rf::ForestParams p;
    p.n_trees = 1;
    p.max_depth = 0;
    p.min_samples_leaf = 1;
    p.max_features_fraction = 1.0;
    p.bootstrap = false;
    const auto f = rf::Forest::fit(X, Y, p, 4);
    CHECK((f.predict_rows(X) - Y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("predictions stay inside the training range") {
    const auto X = random_matrix(80, 5, 5);
    Eigen::MatrixXd Y(80, 2);
    Y.col(0) = X.col(0) * 4.0;
    Y.col(1) = (X.col(1).array() * 6.0).sin().matrix();
    const auto f = rf::Forest::fit(X, Y, {}, 6);
    const auto P = f.predict_rows(random_matrix(200, 5, 7).array() * 3.0 - 1.0);
    for (int t = 0; t < 2; ++t) {
        CHECK(P.col(t).minCoeff() >= Y.col(t).minCoeff());
        CHECK(P.col(t).maxCoeff() <= Y.col(t).maxCoeff());
    }
}

TEST_CASE("noise targets give no out-of-bag skill") {
    const auto X = random_matrix(150, 6, 8);
    const auto Y = random_matrix(150, 3, 9);
    const auto f = rf::Forest::fit(X, Y, {}, 10);
    CHECK(f.oob_r2() <= 0.1);
    Eigen::MatrixXd S(150, 1);
    S.col(0) = (X.col(0).array() * 5.0).cos().matrix();
    CHECK(rf::Forest::fit(X, S, {}, 10).oob_r2() > 0.5);
}

TEST_CASE("fitting is deterministic and order independent") {
    const auto X = random_matrix(70, 4, 11);
    Eigen::MatrixXd Y(70, 1);
    Y.col(0) = X.col(0) + X.col(1).cwiseProduct(X.col(2));
    const auto a = rf::Forest::fit(X, Y, {}, 12);
    CHECK(a.to_json() == rf::Forest::fit(X, Y, {}, 12).to_json());
    CHECK(a.to_json() != rf::Forest::fit(X, Y, {}, 13).to_json());

    std::vector<int> perm(70);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[3], perm[40]);
    Eigen::MatrixXd Xp(70, 4), Yp(70, 1);
    std::vector<std::uint64_t> ids;
    for (int i = 0; i < 70; ++i) {
        Xp.row(i) = X.row(perm[i]);
        Yp.row(i) = Y.row(perm[i]);
        ids.push_back(static_cast<std::uint64_t>(perm[i]));
    }
    const auto b = rf::Forest::fit(Xp, Yp, {}, 12, ids);
    const auto Q = random_matrix(50, 4, 14);
    CHECK(a.predict_rows(Q) == b.predict_rows(Q));
}

TEST_CASE("unused features do not matter") {
    auto X = random_matrix(90, 4, 15);
    X.col(3).setConstant(0.5);
    Eigen::MatrixXd Y(90, 1);
    Y.col(0) = 2.0 * X.col(0) - X.col(1);
    rf::ForestParams p;
    p.max_features_fraction = 1.0;
    const auto f = rf::Forest::fit(X, Y, p, 16);
    const auto used = f.used_features();
    CHECK(std::find(used.begin(), used.end(), 3) == used.end());
    auto Q = random_matrix(40, 4, 17);
    const auto before = f.predict_rows(Q);
    Q.col(3).setRandom();
    CHECK(f.predict_rows(Q) == before);
}

TEST_CASE("json round trip") {
    const auto X = random_matrix(40, 3, 18);
    const auto Y = random_matrix(40, 2, 19);
    const auto f = rf::Forest::fit(X, Y, {}, 20);
    const auto g = rf::Forest::from_json(f.to_json());
    CHECK(g.to_json() == f.to_json());
    CHECK(g.predict_rows(X) == f.predict_rows(X));
    CHECK_THROWS_AS(rf::Forest::from_json("{\"format\": 3}"), SchemaError);
}

TEST_CASE("parameter validation") {
    const auto X = random_matrix(10, 2, 1);
    rf::ForestParams p;
    p.n_trees = 0;
    CHECK_THROWS_AS(rf::Forest::fit(X, X, p, 1), InvalidArgument);
    p = {};
    p.max_features_fraction = 0.0;
    CHECK_THROWS_AS(rf::validate(p), InvalidArgument);
    CHECK_THROWS_AS(rf::Forest::fit(Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1), {}, 1), InvalidArgument);
    CHECK_THROWS_AS(rf::Forest::fit(X, random_matrix(9, 1, 2), {}, 1), ShapeError);
}

TEST_CASE("parzen search: constant score keeps the first trial") {
    const tpe::SearchSpace space = {{"a", tpe::DimKind::real, 0.0, 1.0}, {"b", tpe::DimKind::integer, 1, 8}};
    tpe::SearchOptions opt;
    opt.trials = 12;
    opt.random_trials = 5;
    const auto r = tpe::search(space, [](const tpe::Point&) { return 1.0; }, opt);
    CHECK(r.best == 0);
    CHECK(r.completed() == 12);
}

TEST_CASE("parzen search is reproducible and respects the space") {
    const tpe::SearchSpace space = {{"x", tpe::DimKind::real, -2.0, 3.0},
                                    {"n", tpe::DimKind::integer, 2, 32},
                                    {"c", tpe::DimKind::categorical, 0, 0, 3}};
    auto score = [](const tpe::Point& p) { return -std::pow(p[0] - 1.0, 2) - 0.01 * std::fabs(p[1] - 10) + (p[2] == 2 ? 0.5 : 0.0); };
    tpe::SearchOptions opt;
    opt.trials = 30;
    opt.random_trials = 10;
    opt.seed = 4;
    const auto a = tpe::search(space, score, opt);
    opt.threads = 3;
    const auto b = tpe::search(space, score, opt);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        CHECK(a.trials[i].params == b.trials[i].params);
        CHECK(a.trials[i].guided == (i >= 10));
        const auto& p = a.trials[i].params;
        CHECK(p[0] >= -2.0);
        CHECK(p[0] <= 3.0);
        CHECK(p[1] == std::round(p[1]));
        CHECK(p[1] >= 2);
        CHECK(p[1] <= 32);
        CHECK((p[2] == 0 || p[2] == 1 || p[2] == 2));
    }
    CHECK(a.best == b.best);
}

TEST_CASE("guided trials concentrate near the optimum") {
    const tpe::SearchSpace space = {{"x", tpe::DimKind::real, 0.0, 1.0}};
    std::vector<double> random_d, guided_d;
    for (int rep = 0; rep < 20; ++rep) {
        tpe::SearchOptions opt;
        opt.trials = 60;
        opt.random_trials = 30;
        opt.seed = 100 + static_cast<std::uint64_t>(rep);
        const auto r = tpe::search(space, [](const tpe::Point& p) { return -std::pow(p[0] - 0.7, 2); }, opt);
        std::vector<double> rd, gd;
        for (const auto& t : r.trials) (t.guided ? gd : rd).push_back(std::fabs(t.params[0] - 0.7));
        random_d.push_back(median(rd));
        guided_d.push_back(median(gd));
    }
    CHECK(median(guided_d) < median(random_d));
    CHECK(median(guided_d) < 0.5 * median(random_d));
}

TEST_CASE("failed trials are skipped") {
    const tpe::SearchSpace space = {{"x", tpe::DimKind::real, 0.0, 1.0}};
    tpe::SearchOptions opt;
    opt.trials = 10;
    opt.random_trials = 4;
    const auto none = tpe::search(space, [](const tpe::Point&) { return NAN; }, opt);
    CHECK(none.best == -1);
    CHECK(none.completed() == 0);
    CHECK_THROWS_AS(tpe::validate({{"x", tpe::DimKind::real, 1.0, 0.0}}), InvalidArgument);
}

TEST_CASE("parzen densities are normalised") {
    const tpe::SearchSpace space = {{"x", tpe::DimKind::real, 0.0, 1.0}, {"c", tpe::DimKind::categorical, 0, 0, 4}};
    const std::vector<tpe::Point> set = {{0.2, 1}, {0.25, 1}, {0.8, 3}};
    // Kernels are not truncated to the box, so integrate over a wide interval.
    double mass = 0.0;
    const int steps = 20000;
    for (int i = 0; i < steps; ++i) {
        const double x = -6.0 + 13.0 * (i + 0.5) / steps;
        mass += std::exp(tpe::log_density({space[0]}, set, {x})) * 13.0 / steps;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    double total = 0.0;
    for (int c = 0; c < 4; ++c) total += std::exp(tpe::log_density({space[1]}, {{1}, {1}, {3}}, {static_cast<double>(c)}));
    CHECK(total == doctest::Approx(1.0));
    CHECK(tpe::log_density({space[1]}, {{1}, {1}, {3}}, {1.0}) == doctest::Approx(std::log(3.0 / 7.0)));
}
