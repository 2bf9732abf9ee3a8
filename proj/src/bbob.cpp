#include "modfoot/bbob.hpp"

#include "modfoot/error.hpp"
#include "modfoot/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace modfoot::bbob {

namespace {

constexpr std::uint64_t kInstanceTag = 0xBB0B'0001ULL;

enum Stream : std::uint64_t { kXopt = 1, kFopt = 2, kRotR = 3, kRotQ = 4, kAux = 5 };

Rng stream(int fid, int iid, Stream s) {
    return Rng::derive({kInstanceTag, static_cast<std::uint64_t>(fid), static_cast<std::uint64_t>(iid), s});
}

bool uses_R(int fid) {
    switch (fid) {
    case 1: case 2: case 3: case 4: case 5: case 8: case 20:
        return false;
    default:
        return true;
    }
}

bool uses_Q(int fid) {
    switch (fid) {
    case 6: case 7: case 13: case 15: case 16: case 17: case 18: case 23: case 24:
        return true;
    default:
        return false;
    }
}

// Orthonormalize the columns of a Gaussian matrix; two Gram-Schmidt sweeps
// keep the columns orthogonal to working precision.
Eigen::MatrixXd random_rotation(int dim, Rng rng) {
    Eigen::MatrixXd m(dim, dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) m(r, c) = rng.normal();
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (int c = 0; c < dim; ++c) {
            for (int p = 0; p < c; ++p) m.col(c) -= m.col(p).dot(m.col(c)) * m.col(p);
            m.col(c) /= m.col(c).norm();
        }
    }
    return m;
}

double random_sign(Rng& rng) { return rng.uniform() < 0.5 ? -1.0 : 1.0; }

double rastrigin_sum(const Eigen::VectorXd& z) {
    double s = 0.0;
    for (const double v : z) s += std::cos(2.0 * std::numbers::pi * v);
    return 10.0 * (static_cast<double>(z.size()) - s) + z.squaredNorm();
}

// Exponent fraction (i-1)/(d-1) for zero-based i.
double frac(int i, int dim) { return static_cast<double>(i) / static_cast<double>(dim - 1); }

Eigen::VectorXd osz_vec(const Eigen::VectorXd& x) { return x.unaryExpr([](double v) { return t_osz(v); }); }

Eigen::VectorXd asy_vec(const Eigen::VectorXd& x, double beta) {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd out = x;
    for (int i = 0; i < d; ++i) {
        if (x[i] > 0.0) out[i] = std::pow(x[i], 1.0 + beta * frac(i, d) * std::sqrt(x[i]));
    }
    return out;
}

}  // namespace

double t_osz(double v) {
    if (v == 0.0) return 0.0;
    const double xh = std::log(std::abs(v));
    const double c1 = v > 0.0 ? 10.0 : 5.5;
    const double c2 = v > 0.0 ? 7.9 : 3.1;
    const double s = v > 0.0 ? 1.0 : -1.0;
    return s * std::exp(xh + 0.049 * (std::sin(c1 * xh) + std::sin(c2 * xh)));
}

Eigen::VectorXd conditioning(int dim, double alpha) {
    Eigen::VectorXd out(dim);
    for (int i = 0; i < dim; ++i) out[i] = dim == 1 ? 1.0 : std::pow(alpha, 0.5 * frac(i, dim));
    return out;
}

double boundary_penalty(const Eigen::Ref<const Eigen::VectorXd>& x) {
    double s = 0.0;
    for (const double v : x) {
        const double e = std::abs(v) - kUpperBound;
        if (e > 0.0) s += e * e;
    }
    return s;
}

Eigen::VectorXd transform(const Eigen::Ref<const Eigen::VectorXd>& x, const TransformKind& kind) {
    if (!x.allFinite()) throw DomainError("transform: non-finite input");
    const Eigen::VectorXd in = x;
    return std::visit(
        [&](const auto& k) -> Eigen::VectorXd {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Oscillate>) {
                return osz_vec(in);
            } else if constexpr (std::is_same_v<K, Asymmetric>) {
                if (!(k.beta > 0.0)) throw InvalidArgument("transform: beta must be positive");
                return asy_vec(in, k.beta);
            } else {
                if (!(k.alpha > 0.0)) throw InvalidArgument("transform: alpha must be positive");
                const int d = static_cast<int>(in.size());
                Eigen::VectorXd out = in;
                for (int i = 0; i < d; ++i) out[i] *= d == 1 ? 1.0 : std::pow(k.alpha, frac(i, d));
                return out;
            }
        },
        kind);
}

std::string function_name(int fid) {
    static const std::array<const char*, kFunctionCount> names = {
        "sphere", "ellipsoid_separable", "rastrigin_separable", "bueche_rastrigin", "linear_slope",
        "attractive_sector", "step_ellipsoid", "rosenbrock", "rosenbrock_rotated", "ellipsoid",
        "discus", "bent_cigar", "sharp_ridge", "different_powers", "rastrigin", "weierstrass",
        "schaffers_f7", "schaffers_f7_ill", "griewank_rosenbrock", "schwefel", "gallagher_101",
        "gallagher_21", "katsuura", "lunacek_bi_rastrigin"};
    if (fid < 1 || fid > kFunctionCount) throw InvalidArgument("unknown BBOB function id " + std::to_string(fid));
    return names[fid - 1];
}

ProblemInstance make_instance(int fid, int iid, int dim) {
    if (fid < 1 || fid > kFunctionCount)
        throw InvalidArgument("invalid function id " + std::to_string(fid) + " (expected 1..24)");
    if (iid < 1) throw InvalidArgument("invalid instance id " + std::to_string(iid));
    if (dim < 2) throw InvalidArgument("invalid dimension " + std::to_string(dim) + " (expected >= 2)");

    ProblemInstance p;
    p.fid_ = fid;
    p.iid_ = iid;
    p.dim_ = dim;

    Rng xs = stream(fid, iid, kXopt);
    p.x_opt_.resize(dim);
    for (int i = 0; i < dim; ++i) p.x_opt_[i] = xs.uniform(-4.0, 4.0);

    // Cauchy-like offset: ratio of two normals, rounded to 1e-2, clipped.
    Rng fs = stream(fid, iid, kFopt);
    const double g1 = fs.normal();
    const double g2 = fs.normal();
    double fopt = std::round(100.0 * 100.0 * g1 / g2) / 100.0;
    if (!std::isfinite(fopt)) fopt = g1 * g2 >= 0.0 ? 1000.0 : -1000.0;
    p.f_opt_ = std::clamp(fopt, -1000.0, 1000.0);

    p.rot_R_ = uses_R(fid) ? random_rotation(dim, stream(fid, iid, kRotR)) : Eigen::MatrixXd::Identity(dim, dim);
    p.rot_Q_ = uses_Q(fid) ? random_rotation(dim, stream(fid, iid, kRotQ)) : Eigen::MatrixXd::Identity(dim, dim);
    const auto& R = p.rot_R_;
    const auto& Q = p.rot_Q_;
    Rng aux = stream(fid, iid, kAux);
    const double rosen_factor = std::max(1.0, std::sqrt(static_cast<double>(dim)) / 8.0);

    switch (fid) {
    case 4:
        for (int i = 0; i < dim; i += 2) p.x_opt_[i] = std::abs(p.x_opt_[i]);
        break;
    case 5:
        for (int i = 0; i < dim; ++i) p.x_opt_[i] = p.x_opt_[i] >= 0.0 ? 5.0 : -5.0;
        break;
    case 6:
    case 13:
        p.linear_ = Q * conditioning(dim, 10.0).asDiagonal() * R;
        break;
    case 7:
        p.linear_ = conditioning(dim, 10.0).asDiagonal() * R;
        break;
    case 8:
        p.x_opt_ *= 0.75;
        break;
    case 9:
    case 19:
        p.linear_ = rosen_factor * R;
        // factor * R x + 1/2 = 1 at the optimum.
        p.x_opt_ = R.transpose() * Eigen::VectorXd::Constant(dim, 0.5 / rosen_factor);
        break;
    case 15:
        p.linear_ = R * conditioning(dim, 10.0).asDiagonal() * Q;
        break;
    case 16:
        p.linear_ = R * conditioning(dim, 0.01).asDiagonal() * Q;
        break;
    case 17:
        p.linear_ = conditioning(dim, 10.0).asDiagonal() * Q;
        break;
    case 18:
        p.linear_ = conditioning(dim, 1000.0).asDiagonal() * Q;
        break;
    case 20:
        p.signs_.resize(dim);
        for (int i = 0; i < dim; ++i) p.signs_[i] = random_sign(aux);
        p.x_opt_ = 0.5 * 4.2096874633 * p.signs_;
        break;
    case 21:
    case 22: {
        const bool many = fid == 21;
        const int peaks = many ? 101 : 21;
        const double inner = many ? 4.0 : 3.92;
        const double outer = many ? 5.0 : 4.9;
        p.peak_centers_.resize(peaks, dim);
        p.peak_weights_.resize(peaks);
        p.peak_scales_.resize(peaks, dim);
        // Conditioning levels for peaks 2..n are a random permutation of
        // 1000^(2j/(n-2)), j = 0..n-2; the global peak uses a fixed level.
        std::vector<double> levels(peaks - 1);
        for (int j = 0; j < peaks - 1; ++j) levels[j] = std::pow(1000.0, 2.0 * j / static_cast<double>(peaks - 2));
        for (int j = peaks - 2; j > 0; --j) std::swap(levels[j], levels[aux.below(static_cast<std::uint64_t>(j) + 1)]);
        for (int k = 0; k < peaks; ++k) {
            const double bound = k == 0 ? inner : outer;
            for (int i = 0; i < dim; ++i) p.peak_centers_(k, i) = aux.uniform(-bound, bound);
            p.peak_weights_[k] = k == 0 ? 10.0 : 1.1 + 8.0 * (k - 1) / static_cast<double>(peaks - 2);
            const double alpha = k == 0 ? (many ? 1000.0 : 1.0e6) : levels[k - 1];
            Eigen::VectorXd diag = conditioning(dim, alpha) / std::pow(alpha, 0.25);
            for (int i = dim - 1; i > 0; --i) std::swap(diag[i], diag[aux.below(static_cast<std::uint64_t>(i) + 1)]);
            p.peak_scales_.row(k) = diag.transpose();
        }
        p.rotated_peaks_ = p.peak_centers_ * R.transpose();
        p.x_opt_ = p.peak_centers_.row(0).transpose();
        break;
    }
    case 23:
        p.linear_ = Q * conditioning(dim, 100.0).asDiagonal() * R;
        break;
    case 24:
        p.signs_.resize(dim);
        for (int i = 0; i < dim; ++i) p.signs_[i] = random_sign(aux);
        p.x_opt_ = 0.5 * 2.5 * p.signs_;
        p.linear_ = Q * conditioning(dim, 100.0).asDiagonal() * R;
        break;
    default:
        break;
    }
    return p;
}

double evaluate(const ProblemInstance& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const int d = p.dim_;
    if (x.size() != d)
        throw ShapeError("evaluate: expected length " + std::to_string(d) + ", got " + std::to_string(x.size()));
    if (!x.allFinite()) throw DomainError("evaluate: non-finite input");

    const double dd = static_cast<double>(d);
    const Eigen::VectorXd shifted = x - p.x_opt_;
    double f = 0.0;

    switch (p.fid_) {
    case 1:
        f = shifted.squaredNorm();
        break;
    case 2: {
        const Eigen::VectorXd z = osz_vec(shifted);
        for (int i = 0; i < d; ++i) f += std::pow(10.0, 6.0 * frac(i, d)) * z[i] * z[i];
        break;
    }
    case 3: {
        const Eigen::VectorXd z = conditioning(d, 10.0).cwiseProduct(asy_vec(osz_vec(shifted), 0.2));
        f = rastrigin_sum(z);
        break;
    }
    case 4: {
        Eigen::VectorXd z = osz_vec(shifted);
        for (int i = 0; i < d; ++i) {
            double s = std::pow(10.0, 0.5 * frac(i, d));
            if (z[i] > 0.0 && i % 2 == 0) s *= 10.0;
            z[i] *= s;
        }
        f = rastrigin_sum(z) + 100.0 * boundary_penalty(x);
        break;
    }
    case 5:
        for (int i = 0; i < d; ++i) {
            const double s = (p.x_opt_[i] > 0.0 ? 1.0 : -1.0) * std::pow(10.0, frac(i, d));
            const double z = p.x_opt_[i] * x[i] < 25.0 ? x[i] : p.x_opt_[i];
            f += 5.0 * std::abs(s) - s * z;
        }
        break;
    case 6: {
        const Eigen::VectorXd z = p.linear_ * shifted;
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            const double w = z[i] * p.x_opt_[i] > 0.0 ? 100.0 : 1.0;
            s += (w * z[i]) * (w * z[i]);
        }
        f = std::pow(t_osz(s), 0.9);
        break;
    }
    case 7: {
        const Eigen::VectorXd zh = p.linear_ * shifted;
        Eigen::VectorXd zt(d);
        for (int i = 0; i < d; ++i)
            zt[i] = std::abs(zh[i]) > 0.5 ? std::floor(0.5 + zh[i]) : std::floor(0.5 + 10.0 * zh[i]) / 10.0;
        const Eigen::VectorXd z = p.rot_Q_ * zt;
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += std::pow(10.0, 2.0 * frac(i, d)) * z[i] * z[i];
        f = 0.1 * std::max(std::abs(zh[0]) / 1.0e4, s) + boundary_penalty(x);
        break;
    }
    case 8:
    case 9:
    case 19: {
        Eigen::VectorXd z;
        if (p.fid_ == 8)
            z = std::max(1.0, std::sqrt(dd) / 8.0) * shifted + Eigen::VectorXd::Ones(d);
        else
            z = p.linear_ * x + Eigen::VectorXd::Constant(d, 0.5);
        if (p.fid_ == 19) {
            double s = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const double a = z[i] * z[i] - z[i + 1];
                const double si = 100.0 * a * a + (z[i] - 1.0) * (z[i] - 1.0);
                s += si / 4000.0 - std::cos(si);
            }
            f = 10.0 * s / (dd - 1.0) + 10.0;
        } else {
            for (int i = 0; i + 1 < d; ++i) {
                const double a = z[i] * z[i] - z[i + 1];
                f += 100.0 * a * a + (z[i] - 1.0) * (z[i] - 1.0);
            }
        }
        break;
    }
    case 10: {
        const Eigen::VectorXd z = osz_vec(p.rot_R_ * shifted);
        for (int i = 0; i < d; ++i) f += std::pow(10.0, 6.0 * frac(i, d)) * z[i] * z[i];
        break;
    }
    case 11: {
        const Eigen::VectorXd z = osz_vec(p.rot_R_ * shifted);
        f = 1.0e6 * z[0] * z[0] + z.tail(d - 1).squaredNorm();
        break;
    }
    case 12: {
        const Eigen::VectorXd z = p.rot_R_ * asy_vec(p.rot_R_ * shifted, 0.5);
        f = z[0] * z[0] + 1.0e6 * z.tail(d - 1).squaredNorm();
        break;
    }
    case 13: {
        const Eigen::VectorXd z = p.linear_ * shifted;
        f = z[0] * z[0] + 100.0 * z.tail(d - 1).norm();
        break;
    }
    case 14: {
        const Eigen::VectorXd z = p.rot_R_ * shifted;
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += std::pow(std::abs(z[i]), 2.0 + 4.0 * frac(i, d));
        f = std::sqrt(s);
        break;
    }
    case 15: {
        const Eigen::VectorXd z = p.linear_ * asy_vec(osz_vec(p.rot_R_ * shifted), 0.2);
        f = rastrigin_sum(z);
        break;
    }
    case 16: {
        const Eigen::VectorXd z = p.linear_ * osz_vec(p.rot_R_ * shifted);
        // f0 uses the same cosine expression at z = 0 so the optimum cancels exactly.
        auto inner = [](double v) {
            double s = 0.0;
            for (int k = 0; k < 12; ++k)
                s += std::cos(2.0 * std::numbers::pi * std::pow(3.0, k) * (v + 0.5)) / std::pow(2.0, k);
            return s;
        };
        const double f0 = inner(0.0);
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += inner(z[i]) - f0;
        const double m = s / dd;
        f = 10.0 * m * m * m + 10.0 / dd * boundary_penalty(x);
        break;
    }
    case 17:
    case 18: {
        const Eigen::VectorXd z = p.linear_ * asy_vec(p.rot_R_ * shifted, 0.5);
        double s = 0.0;
        for (int i = 0; i + 1 < d; ++i) {
            const double si = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
            const double sn = std::sin(50.0 * std::pow(si, 0.2));
            s += std::sqrt(si) + std::sqrt(si) * sn * sn;
        }
        const double m = s / (dd - 1.0);
        f = m * m + 10.0 * boundary_penalty(x);
        break;
    }
    case 20: {
        const Eigen::VectorXd xh = 2.0 * p.signs_.cwiseProduct(x);
        const Eigen::VectorXd two_abs = 2.0 * p.x_opt_.cwiseAbs();
        Eigen::VectorXd zh = xh;
        for (int i = 1; i < d; ++i) zh[i] = xh[i] + 0.25 * (xh[i - 1] - two_abs[i - 1]);
        const Eigen::VectorXd z =
            100.0 * (conditioning(d, 10.0).cwiseProduct(zh - two_abs) + two_abs);
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += z[i] * std::sin(std::sqrt(std::abs(z[i])));
        f = -s / (100.0 * dd) + 4.189828872724339 + 100.0 * boundary_penalty(z / 100.0);
        break;
    }
    case 21:
    case 22: {
        const Eigen::VectorXd rx = p.rot_R_ * x;
        double best = 0.0;
        for (int k = 0; k < p.peak_weights_.size(); ++k) {
            double q = 0.0;
            for (int i = 0; i < d; ++i) {
                const double r = rx[i] - p.rotated_peaks_(k, i);
                q += p.peak_scales_(k, i) * r * r;
            }
            best = std::max(best, p.peak_weights_[k] * std::exp(-q / (2.0 * dd)));
        }
        const double t = t_osz(10.0 - best);
        f = t * t + boundary_penalty(x);
        break;
    }
    case 23: {
        const Eigen::VectorXd z = p.linear_ * shifted;
        const double expo = 10.0 / std::pow(dd, 1.2);
        double prod = 1.0;
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            double scale = 2.0;
            for (int j = 1; j <= 32; ++j, scale *= 2.0) {
                const double v = scale * z[i];
                s += std::abs(v - std::nearbyint(v)) / scale;
            }
            prod *= std::pow(1.0 + (i + 1) * s, expo);
        }
        f = 10.0 / (dd * dd) * prod - 10.0 / (dd * dd) + boundary_penalty(x);
        break;
    }
    case 24: {
        constexpr double mu0 = 2.5;
        constexpr double depth = 1.0;
        const double s = 1.0 - 1.0 / (2.0 * std::sqrt(dd + 20.0) - 8.2);
        const double mu1 = -std::sqrt((mu0 * mu0 - depth) / s);
        const Eigen::VectorXd xh = 2.0 * p.signs_.cwiseProduct(x);
        const Eigen::VectorXd z = p.linear_ * (xh - Eigen::VectorXd::Constant(d, mu0));
        double a = 0.0;
        double b = 0.0;
        double c = 0.0;
        for (int i = 0; i < d; ++i) {
            a += (xh[i] - mu0) * (xh[i] - mu0);
            b += (xh[i] - mu1) * (xh[i] - mu1);
            c += std::cos(2.0 * std::numbers::pi * z[i]);
        }
        f = std::min(a, depth * dd + s * b) + 10.0 * (dd - c) + 1.0e4 * boundary_penalty(x);
        break;
    }
    default:
        throw InvalidArgument("invalid function id");
    }
    return f + p.f_opt_;
}

std::pair<Eigen::VectorXd, double> optimum(const ProblemInstance& instance) {
    return {instance.x_opt(), instance.f_opt()};
}

}  // namespace modfoot::bbob
