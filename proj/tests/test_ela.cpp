#include "modfoot/bbob.hpp"
#include "modfoot/ela.hpp"
#include "modfoot/error.hpp"
#include "modfoot/quasirandom.hpp"
#include "modfoot/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace modfoot;
using namespace modfoot::ela;

namespace {

double get(const NamedValues& v, const std::string& name) {
    for (const auto& [k, x] : v)
        if (k == name) return x;
    FAIL("missing feature " << name);
    return 0.0;
}

DesignSample uniform_design(int n, int d, std::uint64_t seed) {
    DesignSample s;
    s.X = qmc::sobol({qmc::SequenceKind::sobol, d, seed, true}, n).array() * 10.0 - 5.0;
    s.y = Eigen::VectorXd::Zero(n);
    return s;
}

DesignSample grid2d(int side) {
    DesignSample s;
    s.X.resize(side * side, 2);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) {
            s.X(i * side + j, 0) = -5.0 + 10.0 * (i + 0.5) / side;
            s.X(i * side + j, 1) = -5.0 + 10.0 * (j + 0.5) / side;
        }
    s.y = s.X.rowwise().squaredNorm();
    return s;
}

}  // namespace

TEST_CASE("catalogue") {
    const auto& names = feature_names();
    CHECK(names.size() == 46);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 46);
    for (const char* must : {"ela_meta.lin_simple.coef.max", "nbc.nn_nb.sd_ratio", "ic.eps.max", "disp.ratio_mean_02"})
        CHECK(std::find(names.begin(), names.end(), must) != names.end());
}

TEST_CASE("design sampling") {
    const auto inst = bbob::make_instance(3, 1, 5);
    const auto a = sample_design(inst, 500, 11);
    CHECK(a.n() == 500);
    CHECK(a.dim() == 5);
    CHECK(a.X.minCoeff() >= -5.0);
    CHECK(a.X.maxCoeff() <= 5.0);
    const auto b = sample_design(inst, 500, 11);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    CHECK(sample_design(inst, 500, 12).X != a.X);
    CHECK(a.y[7] == bbob::evaluate(inst, a.X.row(7).transpose()));
    CHECK_THROWS_AS(sample_design(inst, 49, 1), InvalidArgument);
}

TEST_CASE("meta-model features") {
    auto s = uniform_design(200, 4, 3);
    s.y = 3.0 * s.X.col(0);
    const auto m = ela_meta(s);
    CHECK(std::fabs(get(m, "ela_meta.lin_simple.adj_r2") - 1.0) <= 1e-9);
    CHECK(std::fabs(get(m, "ela_meta.lin_simple.coef.max") - 3.0) <= 1e-9);
    s.y.setConstant(2.0);
    const auto c = ela_meta(s);
    for (const char* k : {"ela_meta.lin_simple.adj_r2", "ela_meta.lin_w_interact.adj_r2", "ela_meta.quad_simple.adj_r2",
                          "ela_meta.quad_w_interact.adj_r2", "ela_meta.lin_simple.coef.max"})
        CHECK(get(c, k) == 0.0);
    for (const auto& [k, v] : c) CHECK(std::isfinite(v));
}

TEST_CASE("distribution features") {
    auto s = uniform_design(2000, 2, 4);
    s.y = s.X.col(0);  // scrambled sobol marginal is nearly symmetric
    CHECK(std::fabs(get(ela_distr(s), "ela_distr.skewness")) < 0.05);

    DesignSample g;
    g.X = Eigen::MatrixXd::Zero(10000, 1);
    g.y.resize(10000);
    Rng rng(8);
    for (auto& v : g.y) v = rng.normal();
    CHECK(std::fabs(get(ela_distr(g), "ela_distr.kurtosis")) < 0.2);
    CHECK(get(ela_distr(g), "ela_distr.number_of_peaks") == 1.0);

    for (Eigen::Index i = 0; i < g.y.size(); ++i) g.y[i] = 0.3 * g.y[i] + (i % 2 ? 6.0 : -6.0);
    CHECK(get(ela_distr(g), "ela_distr.number_of_peaks") == 2.0);
}

TEST_CASE("information content") {
    auto s = uniform_design(300, 3, 5);
    s.y.setConstant(1.5);
    CHECK(get(ic(s), "ic.h.max") == 0.0);

    // Points on a line: the nearest-neighbour tour walks them in order.
    DesignSample line;
    line.X.resize(200, 2);
    line.y.resize(200);
    for (int i = 0; i < 200; ++i) {
        line.X(i, 0) = -5.0 + 0.05 * i;
        line.X(i, 1) = 0.0;
        line.y[i] = i % 2 ? 1.0 : -1.0;
    }
    CHECK(get(ic(line), "ic.m0") == doctest::Approx(1.0));

    FeatureOptions opt;
    opt.reps = 10;
    opt.n_mult = 100;
    const auto f1 = compute_features(bbob::make_instance(1, 1, 5), opt);
    const auto f2 = compute_features(bbob::make_instance(2, 1, 5), opt);
    CHECK(f2.at("ic.eps.max") > f1.at("ic.eps.max"));
    CHECK(f2.at("ela_meta.lin_simple.coef.max") > 100.0 * f1.at("ela_meta.lin_simple.coef.max"));
    CHECK(f2.at("ela_meta.lin_simple.coef.max") >= 1e4);
    CHECK(f2.at("ela_meta.lin_simple.coef.max") <= 1e8);
}

TEST_CASE("nearest-better clustering") {
    const auto uni = grid2d(30);
    const double unimodal = get(nbc(uni), "nbc.nn_nb.sd_ratio");
    CHECK(std::fabs(unimodal - 1.0) <= 0.3);

    auto bi = uni;
    for (Eigen::Index i = 0; i < bi.X.rows(); ++i) {
        const Eigen::Vector2d x = bi.X.row(i).transpose();
        bi.y[i] = std::min((x - Eigen::Vector2d(-3, -3)).squaredNorm(), (x - Eigen::Vector2d(3, 3)).squaredNorm() + 1e-9);
    }
    CHECK(get(nbc(bi), "nbc.nn_nb.sd_ratio") < unimodal - 0.1);

    DesignSample tiny;
    tiny.X = Eigen::MatrixXd::Zero(2, 2);
    tiny.X(1, 0) = 1.0;
    tiny.y = Eigen::Vector2d(0.0, 1.0);
    CHECK_THROWS_AS(nbc(tiny), InvalidArgument);
}

TEST_CASE("dispersion") {
    std::vector<double> ratios[4];
    for (int r = 0; r < 10; ++r) {
        auto s = uniform_design(500, 3, 100 + r);
        Rng rng(Rng::derive({9, static_cast<std::uint64_t>(r)}));
        for (auto& v : s.y) v = rng.uniform();
        const auto d = disp(s);
        int q = 0;
        for (const char* k : {"disp.ratio_mean_02", "disp.ratio_mean_05", "disp.ratio_mean_10", "disp.ratio_mean_25"}) ratios[q++].push_back(get(d, k));
    }
    for (auto& v : ratios) {
        std::sort(v.begin(), v.end());
        CHECK(std::fabs(0.5 * (v[4] + v[5]) - 1.0) <= 0.15);
    }
    auto funnel = uniform_design(500, 3, 7);
    funnel.y = funnel.X.rowwise().norm();
    CHECK(get(disp(funnel), "disp.ratio_mean_02") < 1.0);

    for (int f = 1; f <= 24; ++f) {
        const auto s = sample_design(bbob::make_instance(f, 1, 5), 500, 1);
        const auto d = disp(s);
        CHECK(d.size() == 16);
        for (const auto& [k, v] : d) CHECK(std::isfinite(v));
    }
}

TEST_CASE("principal components") {
    auto iso = uniform_design(2000, 5, 12);
    iso.y = iso.X.col(0);
    const auto p = pca_feats(iso);
    CHECK(std::fabs(get(p, "pca.expl_var_PC1.cov_x") - 0.2) <= 0.05);
    for (const auto& [k, v] : p) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    auto aniso = iso;
    aniso.X.col(1) = 10.0 * aniso.X.col(0) + aniso.X.col(1);
    CHECK(get(pca_feats(aniso), "pca.expl_var_PC1.cov_x") > 0.9);
}

TEST_CASE("shift invariance") {
    const auto s = sample_design(bbob::make_instance(6, 2, 3), 300, 4);
    auto t = s;
    t.y.array() += 0.5;
    for (auto group : {&ic, &nbc, &disp, &pca_feats}) {
        const auto a = group(s), b = group(t);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CAPTURE(a[i].first);
            CHECK(std::fabs(a[i].second - b[i].second) <= 1e-9 * std::max(1.0, std::fabs(a[i].second)));
        }
    }
    const auto ma = ela_meta(s), mb = ela_meta(t);
    CHECK(get(mb, "ela_meta.lin_simple.intercept") == doctest::Approx(get(ma, "ela_meta.lin_simple.intercept") + 0.5));
    CHECK(get(mb, "ela_meta.lin_simple.coef.max") == doctest::Approx(get(ma, "ela_meta.lin_simple.coef.max")));
}

TEST_CASE("aggregation over repetitions") {
    const auto inst = bbob::make_instance(15, 1, 3);
    FeatureOptions one;
    one.reps = 1;
    one.n_mult = 50;
    const auto single = compute_single(sample_design(inst, 150, repetition_seed(1, 3, 0)));
    CHECK(compute_features(inst, one).values == single.values);

    std::vector<FeatureVector> reps;
    for (double v : {1.0, 2.0, 3.0, 100.0, 4.0}) reps.push_back({std::vector<double>(46, v)});
    reps[2].values[5] = NAN;
    const auto med = median_of(reps);
    CHECK(med.values[0] == 3.0);
    CHECK(med.values[5] == 3.0);  // median of 1, 2, 4, 100 skipping NaN

    FeatureOptions opt;
    opt.reps = 4;
    opt.n_mult = 50;
    opt.threads = 1;
    const auto a = compute_features(inst, opt);
    opt.threads = 3;
    CHECK(compute_features(inst, opt).values == a.values);
    for (double v : a.values) CHECK(std::isfinite(v));
}
