#include "modfoot/ela.hpp"

#include "modfoot/error.hpp"
#include "modfoot/parallel.hpp"
#include "modfoot/quasirandom.hpp"
#include "modfoot/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

namespace modfoot::ela {

namespace {

constexpr std::uint64_t kDesignTag = 0xE1A0'0001ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
}

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double sample_sd(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double den = std::sqrt(da.square().sum() * db.square().sum());
    if (den == 0.0) return 0.0;
    return (da * db).sum() / den;
}

// a / b with 0/0 mapped to 1 and x/0 mapped to 0 so every feature stays finite.
double safe_ratio(double a, double b) {
    if (b == 0.0) return a == 0.0 ? 1.0 : 0.0;
    return a / b;
}

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

// Condensed symmetric distance matrix.
class Distances {
public:
    explicit Distances(const Eigen::MatrixXd& X) : n_(static_cast<int>(X.rows())), d_(static_cast<std::size_t>(n_) * (n_ - 1) / 2) {
        std::size_t k = 0;
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) d_[k++] = (X.row(i) - X.row(j)).norm();
    }

    double operator()(int i, int j) const {
        if (i == j) return 0.0;
        if (i > j) std::swap(i, j);
        return d_[static_cast<std::size_t>(i) * (2 * n_ - i - 1) / 2 + (j - i - 1)];
    }

    const std::vector<double>& condensed() const { return d_; }
    int n() const { return n_; }

private:
    int n_;
    std::vector<double> d_;
};

struct FitResult {
    Eigen::VectorXd beta;
    double adj_r2 = 0.0;
};

Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd AtA = A.transpose() * A;
    const Eigen::VectorXd Aty = A.transpose() * y;
    Eigen::LLT<Eigen::MatrixXd> llt(AtA);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) return llt.solve(Aty);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() == A.cols()) return qr.solve(y);
    Eigen::MatrixXd ridge = AtA;
    ridge.diagonal().array() += 1e-10;
    return ridge.ldlt().solve(Aty);
}

FitResult fit(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double ss_tot) {
    FitResult r;
    const auto n = static_cast<double>(A.rows());
    const auto p = static_cast<double>(A.cols() - 1);
    if (ss_tot == 0.0) {
        r.beta = Eigen::VectorXd::Zero(A.cols());
        r.beta[0] = y.size() > 0 ? y[0] : 0.0;
        r.adj_r2 = 0.0;
        return r;
    }
    r.beta = least_squares(A, y);
    const double ss_res = (y - A * r.beta).squaredNorm();
    const double r2 = 1.0 - ss_res / ss_tot;
    r.adj_r2 = n - p - 1.0 > 0.0 ? 1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0) : r2;
    return r;
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& X, bool squares, bool interactions) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    const int cols = 1 + d + (squares ? d : 0) + (interactions ? d * (d - 1) / 2 : 0);
    Eigen::MatrixXd A(n, cols);
    A.col(0).setOnes();
    A.middleCols(1, d) = X;
    int c = 1 + d;
    if (squares) {
        A.middleCols(c, d) = X.array().square().matrix();
        c += d;
    }
    if (interactions) {
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) A.col(c++) = X.col(i).cwiseProduct(X.col(j));
    }
    return A;
}

// max/min of absolute values; both zero counts as ratio 1, min zero is floored
// at 1e-12 * max.
double spread_ratio(const Eigen::VectorXd& absvals) {
    const double hi = absvals.maxCoeff();
    const double lo = absvals.minCoeff();
    if (hi == 0.0) return 1.0;
    return hi / std::max(lo, 1e-12 * hi);
}

std::vector<int> best_order(const Eigen::VectorXd& y) {
    std::vector<int> idx(static_cast<std::size_t>(y.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return y[a] < y[b]; });
    return idx;
}

// Symbols of the slope sequence at threshold eps: -1, 0, 1.
void symbolize(const std::vector<double>& slopes, double eps, std::vector<int>& out) {
    out.resize(slopes.size());
    for (std::size_t i = 0; i < slopes.size(); ++i) out[i] = slopes[i] > eps ? 1 : (slopes[i] < -eps ? -1 : 0);
}

double entropy(const std::vector<int>& s) {
    if (s.size() < 2) return 0.0;
    int counts[3][3] = {};
    for (std::size_t i = 0; i + 1 < s.size(); ++i) ++counts[s[i] + 1][s[i + 1] + 1];
    const double total = static_cast<double>(s.size() - 1);
    double h = 0.0;
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            if (p == q || counts[p][q] == 0) continue;
            const double pr = counts[p][q] / total;
            h -= pr * std::log(pr) / std::log(6.0);
        }
    return h;
}

double partial_information(const std::vector<int>& s) {
    if (s.empty()) return 0.0;
    int count = 0;
    int last = 0;
    for (const int v : s) {
        if (v == 0 || v == last) continue;
        ++count;
        last = v;
    }
    return static_cast<double>(count) / static_cast<double>(s.size());
}

NamedValues disp_from(const Distances& dist, const Eigen::VectorXd& y) {
    static constexpr std::pair<double, const char*> kQuantiles[] = {{0.02, "02"}, {0.05, "05"}, {0.10, "10"}, {0.25, "25"}};
    const int n = dist.n();
    std::vector<double> all = dist.condensed();
    const double mean_full = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
    const double median_full = median_inplace(all);
    const auto order = best_order(y);

    double ratio_mean[4], ratio_median[4], diff_mean[4], diff_median[4];
    for (int qi = 0; qi < 4; ++qi) {
        const int m = static_cast<int>(std::ceil(kQuantiles[qi].first * n - 1e-9));
        if (m < 2) {
            ratio_mean[qi] = ratio_median[qi] = 1.0;
            diff_mean[qi] = diff_median[qi] = 0.0;
            continue;
        }
        std::vector<double> sub;
        sub.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) sub.push_back(dist(order[a], order[b]));
        const double mean_sub = std::accumulate(sub.begin(), sub.end(), 0.0) / static_cast<double>(sub.size());
        const double median_sub = median_inplace(sub);
        ratio_mean[qi] = safe_ratio(mean_sub, mean_full);
        ratio_median[qi] = safe_ratio(median_sub, median_full);
        diff_mean[qi] = mean_sub - mean_full;
        diff_median[qi] = median_sub - median_full;
    }
    NamedValues out;
    for (int qi = 0; qi < 4; ++qi) out.emplace_back(std::string("disp.ratio_mean_") + kQuantiles[qi].second, ratio_mean[qi]);
    for (int qi = 0; qi < 4; ++qi) out.emplace_back(std::string("disp.ratio_median_") + kQuantiles[qi].second, ratio_median[qi]);
    for (int qi = 0; qi < 4; ++qi) out.emplace_back(std::string("disp.diff_mean_") + kQuantiles[qi].second, diff_mean[qi]);
    for (int qi = 0; qi < 4; ++qi) out.emplace_back(std::string("disp.diff_median_") + kQuantiles[qi].second, diff_median[qi]);
    return out;
}

NamedValues nbc_from(const Distances& dist, const Eigen::VectorXd& y) {
    const int n = dist.n();
    Eigen::VectorXd nn(n), nb(n), indegree = Eigen::VectorXd::Zero(n);
    std::vector<int> nb_index(n, -1);
    // j is better than i when y_j < y_i, or on equal values when j < i.
    auto better = [&](int j, int i) { return y[j] < y[i] || (y[j] == y[i] && j < i); };
    for (int i = 0; i < n; ++i) {
        double nn_d = std::numeric_limits<double>::infinity();
        double nb_d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dij = dist(i, j);
            nn_d = std::min(nn_d, dij);
            if (better(j, i) && dij < nb_d) {
                nb_d = dij;
                nb_index[i] = j;
            }
        }
        nn[i] = nn_d;
        nb[i] = nb_d;
    }
    int global_best = 0;
    double max_nb = 0.0;
    for (int i = 0; i < n; ++i) {
        if (nb_index[i] < 0) {
            global_best = i;
        } else {
            max_nb = std::max(max_nb, nb[i]);
            indegree[nb_index[i]] += 1.0;
        }
    }
    nb[global_best] = max_nb;

    NamedValues out;
    out.emplace_back("nbc.nn_nb.sd_ratio", safe_ratio(sample_sd(nn), sample_sd(nb)));
    out.emplace_back("nbc.nn_nb.mean_ratio", safe_ratio(mean(nn), mean(nb)));
    out.emplace_back("nbc.nn_nb.cor", pearson(nn, nb));
    out.emplace_back("nbc.dist_ratio.coeff_var", safe_ratio(sample_sd(nb), mean(nb)));
    out.emplace_back("nbc.nb_fitness.cor", pearson(indegree, y));
    return out;
}

NamedValues ic_from(const Distances& dist, const Eigen::VectorXd& y) {
    const int n = dist.n();
    NamedValues out;
    const bool constant = (y.array() == y[0]).all();
    if (constant) {
        for (const char* k : {"ic.h.max", "ic.eps.s", "ic.eps.max", "ic.eps.ratio", "ic.m0"}) out.emplace_back(k, 0.0);
        return out;
    }
    // Greedy nearest-neighbour tour from point 0; ties go to the lower index.
    std::vector<char> visited(n, 0);
    std::vector<int> tour;
    tour.reserve(n);
    int cur = 0;
    visited[0] = 1;
    tour.push_back(0);
    for (int step = 1; step < n; ++step) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (visited[j]) continue;
            const double dj = dist(cur, j);
            if (dj < best_d) {
                best_d = dj;
                best = j;
            }
        }
        visited[best] = 1;
        tour.push_back(best);
        cur = best;
    }
    std::vector<double> slopes(n - 1);
    double max_slope = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double dx = dist(tour[i], tour[i + 1]);
        slopes[i] = dx > 0.0 ? (y[tour[i + 1]] - y[tour[i]]) / dx : 0.0;
        max_slope = std::max(max_slope, std::abs(slopes[i]));
    }

    constexpr int kSteps = 1000;
    constexpr double kLow = 1e-5;
    const double high = std::max(max_slope, 10.0 * kLow);
    const double log_lo = std::log10(kLow);
    const double log_hi = std::log10(high);
    std::vector<int> sym;

    symbolize(slopes, 0.0, sym);
    const double h0 = entropy(sym);
    const double m0 = partial_information(sym);

    double h_max = h0;
    double eps_max = log_lo;
    double best_h = -1.0;
    double eps_s = log_hi;
    bool settled = false;
    double eps_ratio = log_lo;
    for (int k = 0; k < kSteps; ++k) {
        const double le = log_lo + (log_hi - log_lo) * k / (kSteps - 1);
        symbolize(slopes, std::pow(10.0, le), sym);
        const double h = entropy(sym);
        const double m = partial_information(sym);
        h_max = std::max(h_max, h);
        if (h > best_h) {
            best_h = h;
            eps_max = le;
        }
        if (!settled && h < 0.05) {
            eps_s = le;
            settled = true;
        }
        if (m > 0.5 * m0) eps_ratio = le;
    }
    out.emplace_back("ic.h.max", h_max);
    out.emplace_back("ic.eps.s", eps_s);
    out.emplace_back("ic.eps.max", eps_max);
    out.emplace_back("ic.eps.ratio", eps_ratio);
    out.emplace_back("ic.m0", m0);
    return out;
}

// Eigenvalues (descending) of the covariance or correlation matrix of M.
Eigen::VectorXd pca_spectrum(const Eigen::MatrixXd& M, bool correlation) {
    Eigen::MatrixXd centered = M.rowwise() - M.colwise().mean();
    if (correlation) {
        std::vector<int> keep;
        for (int c = 0; c < centered.cols(); ++c) {
            const double s = centered.col(c).norm();
            if (s > 0.0) keep.push_back(c);
        }
        Eigen::MatrixXd z(centered.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) z.col(static_cast<Eigen::Index>(k)) = centered.col(keep[k]) / centered.col(keep[k]).norm();
        centered = z;
    }
    if (centered.cols() == 0) return Eigen::VectorXd::Zero(0);
    const Eigen::MatrixXd S = centered.transpose() * centered / std::max<double>(1.0, static_cast<double>(M.rows() - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    Eigen::VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0.0);
    return ev;
}

std::pair<double, double> pca_summary(const Eigen::VectorXd& ev) {
    const double total = ev.sum();
    if (ev.size() == 0 || total <= 0.0) return {1.0, 1.0};
    double cum = 0.0;
    int needed = 0;
    for (int i = 0; i < ev.size(); ++i) {
        cum += ev[i];
        ++needed;
        if (cum >= 0.9 * total) break;
    }
    return {static_cast<double>(needed) / static_cast<double>(ev.size()), ev[0] / total};
}

}  // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {
            "ela_meta.lin_simple.adj_r2",
            "ela_meta.lin_simple.intercept",
            "ela_meta.lin_simple.coef.min",
            "ela_meta.lin_simple.coef.max",
            "ela_meta.lin_simple.coef.max_by_min",
            "ela_meta.lin_w_interact.adj_r2",
            "ela_meta.quad_simple.adj_r2",
            "ela_meta.quad_simple.cond",
            "ela_meta.quad_w_interact.adj_r2",
            "ela_distr.skewness",
            "ela_distr.kurtosis",
            "ela_distr.number_of_peaks",
            "ic.h.max",
            "ic.eps.s",
            "ic.eps.max",
            "ic.eps.ratio",
            "ic.m0",
            "nbc.nn_nb.sd_ratio",
            "nbc.nn_nb.mean_ratio",
            "nbc.nn_nb.cor",
            "nbc.dist_ratio.coeff_var",
            "nbc.nb_fitness.cor",
        };
        for (const char* stat : {"ratio_mean", "ratio_median", "diff_mean", "diff_median"})
            for (const char* q : {"02", "05", "10", "25"}) v.push_back(std::string("disp.") + stat + "_" + q);
        for (const char* kind : {"expl_var", "expl_var_PC1"})
            for (const char* var : {"cov_x", "cor_x", "cov_init", "cor_init"})
                v.push_back(std::string("pca.") + kind + "." + var);
        return v;
    }();
    return names;
}

double FeatureVector::at(std::string_view name) const {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values.at(i);
    throw SchemaError("unknown feature '" + std::string(name) + "'");
}

std::uint64_t repetition_seed(std::uint64_t master_seed, int dim, int rep) {
    return combine_keys({kDesignTag, master_seed, static_cast<std::uint64_t>(dim), static_cast<std::uint64_t>(rep)});
}

DesignSample sample_design(const bbob::ProblemInstance& instance, int n, std::uint64_t rep_seed) {
    const int d = instance.dim();
    if (n < 10 * d) throw InvalidArgument("sample_design: need n >= 10 * dim");
    qmc::SequenceSpec spec{qmc::SequenceKind::sobol, d, rep_seed, true};
    DesignSample s;
    s.X = qmc::sobol(spec, n).array() * (bbob::kUpperBound - bbob::kLowerBound) + bbob::kLowerBound;
    s.y.resize(n);
    for (int i = 0; i < n; ++i) s.y[i] = bbob::evaluate(instance, s.X.row(i).transpose());
    if (!s.y.allFinite()) throw DomainError("sample_design: non-finite objective value");
    return s;
}

NamedValues ela_meta(const DesignSample& s) {
    const int n = s.n();
    const int d = s.dim();
    require(n > d + 1, "ela_meta: need n > dim + 1");
    const double ss_tot = (s.y.array() - s.y.mean()).square().sum();

    const FitResult lin = fit(design_matrix(s.X, false, false), s.y, ss_tot);
    const FitResult lin_int = fit(design_matrix(s.X, false, true), s.y, ss_tot);
    const FitResult quad = fit(design_matrix(s.X, true, false), s.y, ss_tot);
    const FitResult quad_int = fit(design_matrix(s.X, true, true), s.y, ss_tot);

    const Eigen::VectorXd slopes = lin.beta.segment(1, d).cwiseAbs();
    const Eigen::VectorXd quad_coef = quad.beta.segment(1 + d, d).cwiseAbs();
    return {
        {"ela_meta.lin_simple.adj_r2", lin.adj_r2},
        {"ela_meta.lin_simple.intercept", lin.beta[0]},
        {"ela_meta.lin_simple.coef.min", slopes.minCoeff()},
        {"ela_meta.lin_simple.coef.max", slopes.maxCoeff()},
        {"ela_meta.lin_simple.coef.max_by_min", spread_ratio(slopes)},
        {"ela_meta.lin_w_interact.adj_r2", lin_int.adj_r2},
        {"ela_meta.quad_simple.adj_r2", quad.adj_r2},
        {"ela_meta.quad_simple.cond", spread_ratio(quad_coef)},
        {"ela_meta.quad_w_interact.adj_r2", quad_int.adj_r2},
    };
}

NamedValues ela_distr(const DesignSample& s) {
    const int n = s.n();
    require(n >= 30, "ela_distr: need n >= 30");
    const Eigen::ArrayXd c = s.y.array() - s.y.mean();
    const double m2 = c.square().mean();
    if (m2 == 0.0) return {{"ela_distr.skewness", 0.0}, {"ela_distr.kurtosis", 0.0}, {"ela_distr.number_of_peaks", 1.0}};
    const double m3 = c.cube().mean();
    const double m4 = c.square().square().mean();
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2) - 3.0;

    // Gaussian KDE, Silverman bandwidth, evaluated on a 512-point grid.
    std::vector<double> sorted(s.y.data(), s.y.data() + n);
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * (n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
    };
    const double sd = sample_sd(s.y);
    const double iqr = quantile(0.75) - quantile(0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    constexpr int kGrid = 512;
    const double lo = sorted.front() - 3.0 * h;
    const double hi = sorted.back() + 3.0 * h;
    std::vector<double> dens(kGrid, 0.0);
    for (int g = 0; g < kGrid; ++g) {
        const double t = lo + (hi - lo) * g / (kGrid - 1);
        double acc = 0.0;
        for (const double v : sorted) {
            const double u = (t - v) / h;
            acc += std::exp(-0.5 * u * u);
        }
        dens[g] = acc;
    }
    // Split the density at valleys that dip below 80 % of both neighbouring
    // peaks and count the pieces holding more than a tenth of the total mass,
    // so sampling wiggles are not peaks.
    std::vector<int> cuts;
    double peak = dens[0], valley = dens[0];
    int valley_at = 0;
    for (int g = 1; g < kGrid; ++g) {
        if (dens[g] < valley) {
            valley = dens[g];
            valley_at = g;
        }
        const bool maximum = dens[g] > dens[g - 1] && (g + 1 == kGrid || dens[g] >= dens[g + 1]);
        if (!maximum) continue;
        if (valley < 0.8 * std::min(peak, dens[g])) {
            cuts.push_back(valley_at);
            peak = dens[g];
        } else {
            peak = std::max(peak, dens[g]);
        }
        valley = dens[g];
        valley_at = g;
    }
    cuts.push_back(kGrid);
    const double total = std::accumulate(dens.begin(), dens.end(), 0.0);
    int peaks = 0;
    int start = 0;
    for (const int c : cuts) {
        const double mass = std::accumulate(dens.begin() + start, dens.begin() + c, 0.0);
        if (mass > 0.1 * total) ++peaks;
        start = c;
    }
    return {{"ela_distr.skewness", skew}, {"ela_distr.kurtosis", kurt}, {"ela_distr.number_of_peaks", static_cast<double>(std::max(peaks, 1))}};
}

NamedValues ic(const DesignSample& s) {
    require(s.n() >= 50, "ic: need n >= 50");
    return ic_from(Distances(s.X), s.y);
}

NamedValues nbc(const DesignSample& s) {
    require(s.n() >= 50, "nbc: insufficient sample (need n >= 50)");
    require(!(s.y.array() == s.y[0]).all(), "nbc: all objective values are equal");
    return nbc_from(Distances(s.X), s.y);
}

NamedValues disp(const DesignSample& s) {
    require(s.n() >= 100, "disp: need n >= 100");
    return disp_from(Distances(s.X), s.y);
}

NamedValues pca_feats(const DesignSample& s) {
    require(s.n() > s.dim(), "pca: need n > dim");
    Eigen::MatrixXd init(s.n(), s.dim() + 1);
    init << s.X, s.y;
    const auto cov_x = pca_summary(pca_spectrum(s.X, false));
    const auto cor_x = pca_summary(pca_spectrum(s.X, true));
    const auto cov_init = pca_summary(pca_spectrum(init, false));
    const auto cor_init = pca_summary(pca_spectrum(init, true));
    return {
        {"pca.expl_var.cov_x", cov_x.first},         {"pca.expl_var.cor_x", cor_x.first},
        {"pca.expl_var.cov_init", cov_init.first},   {"pca.expl_var.cor_init", cor_init.first},
        {"pca.expl_var_PC1.cov_x", cov_x.second},    {"pca.expl_var_PC1.cor_x", cor_x.second},
        {"pca.expl_var_PC1.cov_init", cov_init.second}, {"pca.expl_var_PC1.cor_init", cor_init.second},
    };
}

FeatureVector compute_single(const DesignSample& sample) {
    const auto& names = feature_names();
    FeatureVector fv;
    fv.values.assign(names.size(), kNaN);
    auto put = [&](const NamedValues& group) {
        for (const auto& [k, v] : group) {
            const auto it = std::find(names.begin(), names.end(), k);
            fv.values[static_cast<std::size_t>(it - names.begin())] = std::isfinite(v) ? v : kNaN;
        }
    };
    auto guarded = [&](auto&& fn) {
        try {
            put(fn());
        } catch (const Error&) {
            // Entries of a failing group stay NaN and drop out of the median.
        }
    };
    guarded([&] { return ela_meta(sample); });
    guarded([&] { return ela_distr(sample); });
    // ic, nbc and disp share one distance matrix.
    std::optional<Distances> dist;
    if (sample.n() >= 2) dist.emplace(sample.X);
    guarded([&] {
        require(sample.n() >= 50, "ic: need n >= 50");
        return ic_from(*dist, sample.y);
    });
    guarded([&] {
        require(sample.n() >= 50, "nbc: insufficient sample (need n >= 50)");
        require(!(sample.y.array() == sample.y[0]).all(), "nbc: all objective values are equal");
        return nbc_from(*dist, sample.y);
    });
    guarded([&] {
        require(sample.n() >= 100, "disp: need n >= 100");
        return disp_from(*dist, sample.y);
    });
    guarded([&] { return pca_feats(sample); });
    return fv;
}

FeatureVector median_of(const std::vector<FeatureVector>& reps) {
    FeatureVector out;
    out.values.assign(feature_names().size(), 0.0);
    std::vector<double> col;
    for (std::size_t f = 0; f < out.values.size(); ++f) {
        col.clear();
        for (const auto& r : reps)
            if (f < r.values.size() && std::isfinite(r.values[f])) col.push_back(r.values[f]);
        out.values[f] = col.empty() ? 0.0 : median_inplace(col);
    }
    return out;
}

FeatureVector compute_features(const bbob::ProblemInstance& instance, const FeatureOptions& options) {
    if (options.reps < 1) throw InvalidArgument("compute_features: reps must be >= 1");
    if (options.n_mult < 10) throw InvalidArgument("compute_features: n_mult must be >= 10");
    const int n = options.n_mult * instance.dim();
    std::vector<FeatureVector> reps(static_cast<std::size_t>(options.reps));
    parallel_for(reps.size(), options.threads, [&](std::size_t r) {
        const auto sample = sample_design(instance, n, repetition_seed(options.master_seed, instance.dim(), static_cast<int>(r)));
        reps[r] = compute_single(sample);
    });
    return median_of(reps);
}

}  // namespace modfoot::ela
