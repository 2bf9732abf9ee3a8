#include "modfoot/bbob.hpp"
#include "modfoot/error.hpp"
#include "modfoot/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace modfoot;

namespace {

// Straight-line T_osz and separable ellipsoid, written from the formulas.
double osz_ref(double x) {
    if (x == 0.0) return 0.0;
    const double xh = std::log(std::fabs(x));
    const double c1 = x > 0 ? 10.0 : 5.5, c2 = x > 0 ? 7.9 : 3.1;
    return (x > 0 ? 1.0 : -1.0) * std::exp(xh + 0.049 * (std::sin(c1 * xh) + std::sin(c2 * xh)));
}

double ellipsoid_ref(const Eigen::VectorXd& z) {
    const int d = static_cast<int>(z.size());
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::pow(10.0, 6.0 * i / (d - 1)) * z[i] * z[i];
    return s;
}

}  // namespace

TEST_CASE("sphere has no rotation") {
    const auto inst = bbob::make_instance(1, 1, 5);
    CHECK(inst.rot_R().isApprox(Eigen::MatrixXd::Identity(5, 5), 0.0));
    CHECK(inst.rot_Q().isApprox(Eigen::MatrixXd::Identity(5, 5), 0.0));
    CHECK(inst.f_opt() >= -1000.0);
    CHECK(inst.f_opt() <= 1000.0);
}

TEST_CASE("instances are deterministic") {
    const auto a = bbob::make_instance(2, 1, 5);
    const auto b = bbob::make_instance(2, 1, 5);
    CHECK(a.x_opt() == b.x_opt());
    CHECK(a.f_opt() == b.f_opt());
    const auto c = bbob::make_instance(2, 2, 5);
    CHECK(a.x_opt() != c.x_opt());
}

TEST_CASE("rotations are orthonormal") {
    const auto inst = bbob::make_instance(8, 3, 5);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    CHECK((inst.rot_R().transpose() * inst.rot_R() - I).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((inst.rot_Q().transpose() * inst.rot_Q() - I).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("f2 matches a hand-written ellipsoid") {
    const auto inst = bbob::make_instance(2, 1, 5);
    CHECK(std::fabs(bbob::evaluate(inst, inst.x_opt()) - inst.f_opt()) <= 1e-9);
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd x = inst.x_opt();
        x[i] += 1.0;
        if (i % 2) x[(i + 2) % 5] -= 0.5;
        Eigen::VectorXd z = x - inst.x_opt();
        for (auto& v : z) v = osz_ref(v);
        const double want = ellipsoid_ref(z) + inst.f_opt();
        CHECK(std::fabs(bbob::evaluate(inst, x) - want) <= 1e-8 * std::max(1.0, std::fabs(want)));
    }
}

TEST_CASE("f10 is the ellipsoid in rotated coordinates") {
    const auto inst = bbob::make_instance(10, 2, 5);
    Rng rng(77);
    for (int t = 0; t < 5; ++t) {
        Eigen::VectorXd x(5);
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        Eigen::VectorXd z = inst.rot_R() * (x - inst.x_opt());
        for (auto& v : z) v = osz_ref(v);
        const double want = ellipsoid_ref(z) + inst.f_opt();
        CHECK(std::fabs(bbob::evaluate(inst, x) - want) <= 1e-8 * std::max(1.0, std::fabs(want)));
    }
}

TEST_CASE("transforms") {
    CHECK(bbob::transform(Eigen::VectorXd::Zero(4), bbob::Oscillate{}).isZero(0.0));
    const auto s = bbob::transform(Eigen::Vector3d(1, 1, 1), bbob::DiagScale{100.0});
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(10.0));
    CHECK(s[2] == doctest::Approx(100.0));
    const Eigen::Vector3d neg(-1.0, -2.5, -0.1);
    CHECK(bbob::transform(neg, bbob::Asymmetric{0.2}) == neg);
    CHECK_THROWS_AS(bbob::transform(neg, bbob::Asymmetric{0.0}), InvalidArgument);
}

TEST_CASE("optimum is consistent for every function") {
    for (int d : {2, 5, 30})
        for (int f = 1; f <= 24; ++f)
            for (int i = 1; i <= 5; ++i) {
                const auto inst = bbob::make_instance(f, i, d);
                const auto [x, fx] = bbob::optimum(inst);
                CHECK(fx == inst.f_opt());
                CHECK(std::fabs(bbob::evaluate(inst, x) - fx) <= 1e-9);
            }
}

TEST_CASE("no sample falls below f_opt") {
    Rng rng(5);
    Eigen::VectorXd x(5);
    for (int f = 1; f <= 24; ++f) {
        const auto inst = bbob::make_instance(f, 1, 5);
        double lowest = INFINITY;
        for (int s = 0; s < 10000; ++s) {
            for (auto& v : x) v = rng.uniform(-5.0, 5.0);
            lowest = std::min(lowest, bbob::evaluate(inst, x));
        }
        CAPTURE(f);
        CHECK(lowest >= inst.f_opt());
    }
}

TEST_CASE("Gallagher optimum beats random sampling") {
    const auto inst = bbob::make_instance(21, 2, 5);
    const double at_opt = bbob::evaluate(inst, inst.x_opt());
    Rng rng(11);
    Eigen::VectorXd x(5);
    double lowest = INFINITY;
    for (int s = 0; s < 10000; ++s) {
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        lowest = std::min(lowest, bbob::evaluate(inst, x));
    }
    CHECK(lowest >= at_opt);
}

TEST_CASE("argument errors") {
    CHECK_THROWS_AS(bbob::make_instance(0, 1, 5), InvalidArgument);
    CHECK_THROWS_AS(bbob::make_instance(25, 1, 5), InvalidArgument);
    CHECK_THROWS_AS(bbob::make_instance(1, 0, 5), InvalidArgument);
    CHECK_THROWS_AS(bbob::make_instance(1, 1, 1), InvalidArgument);
    const auto inst = bbob::make_instance(3, 1, 5);
    CHECK_THROWS_AS(bbob::evaluate(inst, Eigen::VectorXd::Zero(4)), ShapeError);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(5);
    bad[2] = NAN;
    CHECK_THROWS_AS(bbob::evaluate(inst, bad), DomainError);
}
