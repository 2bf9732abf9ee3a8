#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace modfoot::tpe {

enum class DimKind { real, integer, categorical };

/// One search dimension. Categorical values are encoded as choice indices
/// 0..choices-1; lo and hi are ignored for them.
struct Dimension {
    std::string name;
    DimKind kind = DimKind::real;
    double lo = 0.0;
    double hi = 1.0;
    int choices = 0;
};

using SearchSpace = std::vector<Dimension>;
using Point = std::vector<double>;

struct Trial {
    Point params;
    double score = 0.0;  // NaN marks a failed trial
    bool guided = false;  // false in the random phase
};

struct SearchOptions {
    int trials = 50;
    int random_trials = 40;
    double gamma = 0.25;
    int candidates = 24;
    std::uint64_t seed = 1;
    int threads = 1;  // used for the random phase only
};

struct SearchResult {
    std::vector<Trial> trials;
    int best = -1;  // index of the first trial with the maximal finite score, -1 if none

    int completed() const;
};

/// Maximises `score` over the space: uniform random trials first, then
/// tree-structured Parzen estimator trials. Each guided trial splits the
/// finished trials at the gamma quantile of score, fits per-dimension kernel
/// densities l (good) and g (rest), draws `candidates` points from l and keeps
/// the one with the largest l/g. Gaussian kernels use bandwidth
/// range / sqrt(set size); categorical dimensions use smoothed frequencies.
SearchResult search(const SearchSpace& space, const std::function<double(const Point&)>& score,
                    const SearchOptions& options);

/// Uniform draw from the space for trial `index` (deterministic in seed, index).
Point random_point(const SearchSpace& space, std::uint64_t seed, int index);

/// Log of the product of per-dimension Parzen densities fitted to `set`.
double log_density(const SearchSpace& space, const std::vector<Point>& set, const Point& x);

/// Throws InvalidArgument for empty spaces or inverted ranges.
void validate(const SearchSpace& space);

}  // namespace modfoot::tpe
