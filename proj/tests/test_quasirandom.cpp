#include "modfoot/error.hpp"
#include "modfoot/quasirandom.hpp"
#include "modfoot/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace modfoot;
using namespace modfoot::qmc;

namespace {

// Star discrepancy estimated over anchored boxes whose corners are point
// coordinates (and 1), counting both open and closed boxes.
double star_discrepancy(const Eigen::MatrixXd& P) {
    const auto n = P.rows();
    std::vector<double> xs(P.col(0).data(), P.col(0).data() + n), ys(P.col(1).data(), P.col(1).data() + n);
    xs.push_back(1.0);
    ys.push_back(1.0);
    double worst = 0.0;
    for (double a : xs)
        for (double b : ys) {
            int open = 0, closed = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                open += P(i, 0) < a && P(i, 1) < b;
                closed += P(i, 0) <= a && P(i, 1) <= b;
            }
            const double vol = a * b;
            worst = std::max({worst, vol - static_cast<double>(open) / n, static_cast<double>(closed) / n - vol});
        }
    return worst;
}

}  // namespace

TEST_CASE("halton points") {
    const auto H = halton({SequenceKind::halton, 2}, 3);
    CHECK(H(0, 0) == doctest::Approx(0.5));
    CHECK(H(0, 1) == doctest::Approx(1.0 / 3));
    CHECK(H(1, 0) == doctest::Approx(0.25));
    CHECK(H(1, 1) == doctest::Approx(2.0 / 3));
    CHECK(H(2, 0) == doctest::Approx(0.75));
    CHECK(H(2, 1) == doctest::Approx(1.0 / 9));
    CHECK(radical_inverse(7, 2) == 0.875);
    const auto big = halton({SequenceKind::halton, 64}, 500);
    CHECK(big.minCoeff() > 0.0);
    CHECK(big.maxCoeff() < 1.0);
}

TEST_CASE("sobol matches reference direction numbers") {
    // First eight points after the origin from an independent Joe-Kuo implementation.
    const double ref[8][6] = {{0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
                              {0.75, 0.25, 0.25, 0.25, 0.75, 0.75},
                              {0.25, 0.75, 0.75, 0.75, 0.25, 0.25},
                              {0.375, 0.375, 0.625, 0.875, 0.375, 0.125},
                              {0.875, 0.875, 0.125, 0.375, 0.875, 0.625},
                              {0.625, 0.125, 0.875, 0.625, 0.625, 0.875},
                              {0.125, 0.625, 0.375, 0.125, 0.125, 0.375},
                              {0.1875, 0.3125, 0.9375, 0.4375, 0.5625, 0.3125}};
    const auto S = sobol({SequenceKind::sobol, 6}, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 6; ++j) CHECK(S(i, j) == ref[i][j]);
    CHECK(sobol({SequenceKind::sobol, 1}, 1)(0, 0) == 0.5);
}

TEST_CASE("sobol determinism and scrambling") {
    SequenceSpec spec{SequenceKind::sobol, 4, 99, true};
    const auto a = sobol(spec, 64);
    CHECK(a == sobol(spec, 64));
    spec.seed = 100;
    CHECK(a != sobol(spec, 64));
    CHECK(a.minCoeff() > 0.0);
    CHECK(a.maxCoeff() < 1.0);
}

TEST_CASE("sobol is more uniform than pseudo-random points") {
    const double d_sobol = star_discrepancy(sobol({SequenceKind::sobol, 2}, 256));
    std::vector<double> random;
    for (int t = 0; t < 20; ++t) {
        Rng rng(Rng::derive({3, static_cast<std::uint64_t>(t)}));
        Eigen::MatrixXd P(256, 2);
        for (auto& v : P.reshaped()) v = rng.uniform();
        random.push_back(star_discrepancy(P));
    }
    std::nth_element(random.begin(), random.begin() + 10, random.end());
    CHECK(d_sobol < random[10]);
}

TEST_CASE("marginal uniformity") {
    for (const auto kind : {SequenceKind::sobol, SequenceKind::halton}) {
        const auto P = kind == SequenceKind::sobol ? sobol({kind, 8}, 4096) : halton({kind, 8}, 4096);
        for (Eigen::Index j = 0; j < P.cols(); ++j) {
            CHECK(P.col(j).mean() >= 0.48);
            CHECK(P.col(j).mean() <= 0.52);
        }
    }
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
    CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232306167813).epsilon(1e-13));
    CHECK(normal_quantile(0.9999) == doctest::Approx(3.719016485455709).epsilon(1e-13));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    CHECK(normal_quantile(0.3) == doctest::Approx(-0.5244005127080409).epsilon(1e-13));
    for (double u : {0.01, 0.2, 0.4, 0.45}) CHECK(normal_quantile(u) == doctest::Approx(-normal_quantile(1.0 - u)).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
    CHECK_THROWS_AS(normal_quantile(NAN), DomainError);
}

TEST_CASE("gaussian conversion moments") {
    const int n = 10000;
    Eigen::MatrixXd U(n, 1);
    Rng rng(2024);
    for (auto& v : U.reshaped()) v = rng.uniform();
    const auto G = to_gaussian(U);
    const double mean = G.mean();
    const double var = (G.array() - mean).square().sum() / (n - 1);
    CHECK(std::fabs(mean) < 4.0 / std::sqrt(n));
    CHECK(var >= 0.9);
    CHECK(var <= 1.1);
}

TEST_CASE("point stream matches batch functions and forks on copy") {
    const SequenceSpec spec{SequenceKind::sobol, 3, 5, true};
    const auto batch = sobol(spec, 10);
    PointStream s(spec);
    for (int i = 0; i < 4; ++i) CHECK(s.next_uniform() == batch.row(i).transpose());
    PointStream fork = s;
    CHECK(s.next_uniform() == fork.next_uniform());
    PointStream h({SequenceKind::halton, 2});
    CHECK(h.next_uniform() == Eigen::Vector2d(0.5, 1.0 / 3));
    CHECK(h.next_gaussian() == to_gaussian(halton({SequenceKind::halton, 2}, 2)).row(1).transpose());
}

TEST_CASE("capacity limits") {
    CHECK_THROWS_AS(halton({SequenceKind::halton, 65}, 1), CapacityError);
    CHECK_THROWS_AS(sobol({SequenceKind::sobol, 65}, 1), CapacityError);
}
