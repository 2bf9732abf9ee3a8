#include "modfoot/quasirandom.hpp"

#include "modfoot/error.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <initializer_list>

namespace modfoot::qmc {

namespace {

constexpr int kBits = 32;
constexpr std::uint64_t kScrambleTag = 0x50B0'15CAULL;
constexpr std::uint64_t kGaussianTag = 0x6A55'0001ULL;

struct DirectionEntry {
    std::uint32_t poly;
    std::initializer_list<std::uint32_t> m;
};

const DirectionEntry kDirections[kMaxSobolDim] = {
#include "sobol_directions.inc"
};

constexpr std::array<int, kMaxHaltonDim> kPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

using DirectionTable = std::array<std::array<std::uint32_t, kBits>, kMaxSobolDim>;

DirectionTable build_directions() {
    DirectionTable v{};
    for (int j = 0; j < kMaxSobolDim; ++j) {
        const auto& e = kDirections[j];
        if (e.poly == 1) {
            for (int k = 0; k < kBits; ++k) v[j][k] = 1u << (kBits - 1 - k);
            continue;
        }
        const int s = std::bit_width(e.poly) - 1;
        const auto* m = e.m.begin();
        for (int k = 0; k < s && k < kBits; ++k) v[j][k] = m[k] << (kBits - 1 - k);
        for (int k = s; k < kBits; ++k) {
            std::uint32_t val = v[j][k - s] ^ (v[j][k - s] >> s);
            for (int i = 1; i < s; ++i) {
                if ((e.poly >> (s - i)) & 1u) val ^= v[j][k - i];
            }
            v[j][k] = val;
        }
    }
    return v;
}

const DirectionTable& directions() {
    static const DirectionTable table = build_directions();
    return table;
}

void check_dim(const SequenceSpec& spec) {
    if (spec.dim < 1) throw InvalidArgument("sequence dimension must be >= 1");
    if (spec.kind == SequenceKind::halton && spec.dim > kMaxHaltonDim)
        throw CapacityError("halton supports at most " + std::to_string(kMaxHaltonDim) + " dimensions");
    if (spec.kind == SequenceKind::sobol && spec.dim > kMaxSobolDim)
        throw CapacityError("sobol supports at most " + std::to_string(kMaxSobolDim) + " dimensions");
}

// Acklam's rational approximation, relative error ~1.2e-9 before refinement.
double acklam(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double low = 0.02425;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

std::string to_string(SequenceKind kind) {
    switch (kind) {
    case SequenceKind::gaussian: return "gaussian";
    case SequenceKind::sobol: return "sobol";
    case SequenceKind::halton: return "halton";
    }
    return "unknown";
}

SequenceKind sequence_kind_from_string(const std::string& text) {
    if (text == "gaussian") return SequenceKind::gaussian;
    if (text == "sobol") return SequenceKind::sobol;
    if (text == "halton") return SequenceKind::halton;
    throw InvalidArgument("unknown sampler '" + text + "'");
}

double radical_inverse(std::uint64_t index, int base) {
    double result = 0.0;
    double scale = 1.0 / base;
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale /= base;
    }
    return result;
}

Eigen::MatrixXd halton(const SequenceSpec& spec, int n) {
    SequenceSpec s = spec;
    s.kind = SequenceKind::halton;
    check_dim(s);
    if (n < 1) throw InvalidArgument("halton: n must be >= 1");
    Eigen::MatrixXd out(n, s.dim);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < s.dim; ++j) out(k, j) = radical_inverse(static_cast<std::uint64_t>(k) + 1, kPrimes[j]);
    return out;
}

Eigen::MatrixXd sobol(const SequenceSpec& spec, int n) {
    SequenceSpec s = spec;
    s.kind = SequenceKind::sobol;
    check_dim(s);
    if (n < 1) throw InvalidArgument("sobol: n must be >= 1");
    PointStream stream(s);
    Eigen::MatrixXd out(n, s.dim);
    for (int k = 0; k < n; ++k) out.row(k) = stream.next_uniform().transpose();
    return out;
}

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("normal_quantile: argument must lie in (0, 1)");
    double x = acklam(u);
    // One Halley step against the exact CDF brings the error to ~1e-15.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
    const double g = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= g / (1.0 + 0.5 * x * g);
    return x;
}

Eigen::MatrixXd to_gaussian(const Eigen::MatrixXd& u) {
    return u.unaryExpr([](double v) { return normal_quantile(v); });
}

PointStream::PointStream(const SequenceSpec& spec) : spec_(spec), rng_(combine_keys({kGaussianTag, spec.seed})) {
    check_dim(spec_);
    if (spec_.kind == SequenceKind::sobol) {
        sobol_state_.assign(spec_.dim, 0u);
        if (spec_.scrambled) {
            Rng r(combine_keys({kScrambleTag, spec_.seed}));
            shifts_.resize(spec_.dim);
            for (auto& s : shifts_) s = static_cast<std::uint32_t>(r.next_u64() >> 32);
        }
    }
}

Eigen::VectorXd PointStream::next_uniform() {
    Eigen::VectorXd p(spec_.dim);
    switch (spec_.kind) {
    case SequenceKind::gaussian:
        for (int j = 0; j < spec_.dim; ++j) p[j] = rng_.uniform();
        ++index_;
        break;
    case SequenceKind::halton:
        ++index_;
        for (int j = 0; j < spec_.dim; ++j) p[j] = radical_inverse(index_, kPrimes[j]);
        break;
    case SequenceKind::sobol: {
        // Gray code: X_{n+1} = X_n ^ V[position of the lowest zero bit of n].
        const int bit = std::countr_one(index_);
        if (bit >= kBits) throw CapacityError("sobol: sequence exhausted (2^32 points)");
        const auto& v = directions();
        ++index_;
        for (int j = 0; j < spec_.dim; ++j) {
            sobol_state_[j] ^= v[j][bit];
            if (spec_.scrambled)
                p[j] = (static_cast<double>(sobol_state_[j] ^ shifts_[j]) + 0.5) * 0x1.0p-32;
            else
                p[j] = static_cast<double>(sobol_state_[j]) * 0x1.0p-32;
        }
        break;
    }
    }
    return p;
}

Eigen::VectorXd PointStream::next_gaussian() {
    return next_uniform().unaryExpr([](double v) { return normal_quantile(v); });
}

}  // namespace modfoot::qmc
