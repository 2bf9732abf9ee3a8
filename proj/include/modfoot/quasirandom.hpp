#pragma once

#include "modfoot/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace modfoot::qmc {

enum class SequenceKind { gaussian, sobol, halton };

std::string to_string(SequenceKind kind);
SequenceKind sequence_kind_from_string(const std::string& text);

inline constexpr int kMaxHaltonDim = 64;
inline constexpr int kMaxSobolDim = 64;

struct SequenceSpec {
    SequenceKind kind = SequenceKind::sobol;
    int dim = 1;
    /// Scramble key for sobol and stream key for gaussian; halton ignores it.
    std::uint64_t seed = 0;
    /// Apply a seed-keyed digital shift to sobol points.
    bool scrambled = false;
};

/// Radical inverse of index in the given base.
double radical_inverse(std::uint64_t index, int base);

/// n x dim matrix; row k holds the radical inverses of k + 1 in the first dim primes.
Eigen::MatrixXd halton(const SequenceSpec& spec, int n);

/// n x dim Gray-code Sobol points (Joe-Kuo direction numbers), index 0 skipped.
Eigen::MatrixXd sobol(const SequenceSpec& spec, int n);

/// Inverse standard-normal CDF; throws DomainError unless 0 < u < 1.
double normal_quantile(double u);

/// Componentwise normal_quantile.
Eigen::MatrixXd to_gaussian(const Eigen::MatrixXd& u);

/// Sequential point source. Value type: copying forks the stream at its
/// current position. Points of the three kinds are produced in the same order
/// as the batch functions above.
class PointStream {
public:
    explicit PointStream(const SequenceSpec& spec);

    Eigen::VectorXd next_uniform();
    Eigen::VectorXd next_gaussian();

    const SequenceSpec& spec() const { return spec_; }
    std::uint64_t index() const { return index_; }

private:
    SequenceSpec spec_;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> sobol_state_;
    std::vector<std::uint32_t> shifts_;
    Rng rng_;
};

}  // namespace modfoot::qmc
