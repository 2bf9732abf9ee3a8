#include "modfoot/parzen.hpp"

#include "modfoot/error.hpp"
#include "modfoot/parallel.hpp"
#include "modfoot/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace modfoot::tpe {

namespace {

constexpr std::uint64_t kRandomTag = 0x7A4D'0001ULL;
constexpr std::uint64_t kGuidedTag = 0x7A4D'0002ULL;

double snap(const Dimension& d, double v) {
    switch (d.kind) {
    case DimKind::real: return std::clamp(v, d.lo, d.hi);
    case DimKind::integer: return std::clamp(std::round(v), d.lo, d.hi);
    case DimKind::categorical: return std::clamp(std::round(v), 0.0, static_cast<double>(d.choices - 1));
    }
    return v;
}

double bandwidth(const Dimension& d, std::size_t set_size) {
    const double range = d.hi - d.lo;
    const double bw = range / std::sqrt(static_cast<double>(set_size));
    // Integer ranges keep at least half a step so neighbouring values share mass.
    return d.kind == DimKind::integer ? std::max(bw, 0.5) : std::max(bw, 1e-12 * std::max(1.0, range));
}

double log_density_1d(const Dimension& d, const std::vector<Point>& set, std::size_t k, double x) {
    const auto m = set.size();
    if (d.kind == DimKind::categorical) {
        double count = 0.0;
        for (const auto& p : set)
            if (p[k] == x) count += 1.0;
        return std::log((count + 1.0) / (static_cast<double>(m) + d.choices));
    }
    const double bw = bandwidth(d, m);
    double acc = 0.0;
    for (const auto& p : set) {
        const double u = (x - p[k]) / bw;
        acc += std::exp(-0.5 * u * u);
    }
    acc /= static_cast<double>(m) * bw * std::sqrt(2.0 * std::numbers::pi);
    return std::log(std::max(acc, std::numeric_limits<double>::min()));
}

Point sample_from(const SearchSpace& space, const std::vector<Point>& set, Rng& rng) {
    Point x(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto& d = space[k];
        const auto& centre = set[rng.below(set.size())];
        if (d.kind == DimKind::categorical) {
            // Smoothed frequency: with probability m/(m+c) copy an observed
            // value, otherwise draw a uniform choice.
            const double m = static_cast<double>(set.size());
            x[k] = rng.uniform() < m / (m + d.choices) ? centre[k] : static_cast<double>(rng.below(static_cast<std::uint64_t>(d.choices)));
            continue;
        }
        const double bw = bandwidth(d, set.size());
        double v = centre[k] + bw * rng.normal();
        for (int tries = 0; tries < 16 && (v < d.lo || v > d.hi); ++tries) v = centre[k] + bw * rng.normal();
        x[k] = snap(d, v);
    }
    return x;
}

}  // namespace

int SearchResult::completed() const {
    return static_cast<int>(std::count_if(trials.begin(), trials.end(), [](const Trial& t) { return std::isfinite(t.score); }));
}

void validate(const SearchSpace& space) {
    if (space.empty()) throw InvalidArgument("search: empty space");
    for (const auto& d : space) {
        if (d.kind == DimKind::categorical) {
            if (d.choices < 1) throw InvalidArgument("search: categorical '" + d.name + "' needs choices");
        } else if (!(d.lo <= d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi)) {
            throw InvalidArgument("search: bad range for '" + d.name + "'");
        }
    }
}

Point random_point(const SearchSpace& space, std::uint64_t seed, int index) {
    Rng rng = Rng::derive({kRandomTag, seed, static_cast<std::uint64_t>(index)});
    Point x(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto& d = space[k];
        switch (d.kind) {
        case DimKind::real: x[k] = d.lo + (d.hi - d.lo) * rng.uniform(); break;
        case DimKind::integer: {
            const auto span = static_cast<std::uint64_t>(d.hi - d.lo) + 1;
            x[k] = d.lo + static_cast<double>(rng.below(span));
            break;
        }
        case DimKind::categorical: x[k] = static_cast<double>(rng.below(static_cast<std::uint64_t>(d.choices))); break;
        }
    }
    return x;
}

double log_density(const SearchSpace& space, const std::vector<Point>& set, const Point& x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < space.size(); ++k) acc += log_density_1d(space[k], set, k, x[k]);
    return acc;
}

SearchResult search(const SearchSpace& space, const std::function<double(const Point&)>& score,
                    const SearchOptions& options) {
    validate(space);
    if (options.trials < 0 || options.random_trials < 0) throw InvalidArgument("search: negative trial count");
    if (!(options.gamma > 0.0 && options.gamma < 1.0)) throw InvalidArgument("search: gamma must be in (0, 1)");
    if (options.candidates < 1) throw InvalidArgument("search: need at least one candidate");

    SearchResult result;
    const int n_random = std::min(options.trials, options.random_trials);
    result.trials.resize(static_cast<std::size_t>(n_random));
    parallel_for(static_cast<std::size_t>(n_random), options.threads, [&](std::size_t i) {
        auto& t = result.trials[i];
        t.params = random_point(space, options.seed, static_cast<int>(i));
        t.score = score(t.params);
    });

    for (int i = n_random; i < options.trials; ++i) {
        std::vector<int> done;
        for (int k = 0; k < static_cast<int>(result.trials.size()); ++k)
            if (std::isfinite(result.trials[k].score)) done.push_back(k);
        Trial t;
        if (done.size() < 2) {
            t.params = random_point(space, options.seed, i);
        } else {
            std::stable_sort(done.begin(), done.end(), [&](int a, int b) { return result.trials[a].score > result.trials[b].score; });
            const auto n_good = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(options.gamma * static_cast<double>(done.size()))), 1, done.size() - 1);
            std::vector<Point> good, bad;
            for (std::size_t r = 0; r < done.size(); ++r) (r < n_good ? good : bad).push_back(result.trials[done[r]].params);
            Rng rng = Rng::derive({kGuidedTag, options.seed, static_cast<std::uint64_t>(i)});
            double best_ratio = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < options.candidates; ++c) {
                Point x = sample_from(space, good, rng);
                const double ratio = log_density(space, good, x) - log_density(space, bad, x);
                if (ratio > best_ratio) {
                    best_ratio = ratio;
                    t.params = std::move(x);
                }
            }
            t.guided = true;
        }
        t.score = score(t.params);
        result.trials.push_back(std::move(t));
    }

    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(result.trials.size()); ++k) {
        const double s = result.trials[k].score;
        if (std::isfinite(s) && s > best) {
            best = s;
            result.best = k;
        }
    }
    return result;
}

}  // namespace modfoot::tpe
