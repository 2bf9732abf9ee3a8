#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <variant>

namespace modfoot::bbob {

inline constexpr int kFunctionCount = 24;
inline constexpr double kLowerBound = -5.0;
inline constexpr double kUpperBound = 5.0;

/// One transformed noiseless BBOB function. Immutable after construction and
/// safe to evaluate concurrently.
///
/// Instances come from an in-repo counter-based generator keyed by (fid, iid);
/// the dimension only controls how many draws are taken. Parameters are not
/// bit-compatible with the COCO reference generator.
class ProblemInstance {
public:
    int fid() const { return fid_; }
    int iid() const { return iid_; }
    int dim() const { return dim_; }
    const Eigen::VectorXd& x_opt() const { return x_opt_; }
    double f_opt() const { return f_opt_; }
    /// Identity when the function definition does not use the rotation.
    const Eigen::MatrixXd& rot_R() const { return rot_R_; }
    const Eigen::MatrixXd& rot_Q() const { return rot_Q_; }

    // Gallagher peak data (f21, f22); empty for every other function.
    const Eigen::MatrixXd& peak_centers() const { return peak_centers_; }
    const Eigen::VectorXd& peak_weights() const { return peak_weights_; }
    const Eigen::MatrixXd& peak_scales() const { return peak_scales_; }

private:
    friend ProblemInstance make_instance(int fid, int iid, int dim);
    friend double evaluate(const ProblemInstance& instance, const Eigen::Ref<const Eigen::VectorXd>& x);

    int fid_ = 0;
    int iid_ = 0;
    int dim_ = 0;
    Eigen::VectorXd x_opt_;
    double f_opt_ = 0.0;
    Eigen::MatrixXd rot_R_;
    Eigen::MatrixXd rot_Q_;
    Eigen::VectorXd signs_;          // f20, f24
    Eigen::MatrixXd linear_;         // precomposed linear map, function specific
    Eigen::MatrixXd peak_centers_;   // rows = peaks
    Eigen::MatrixXd rotated_peaks_;  // rows = R * peak
    Eigen::VectorXd peak_weights_;
    Eigen::MatrixXd peak_scales_;    // rows = diagonal of C_i
};

/// Throws InvalidArgument for fid outside 1..24, iid < 1, or dim < 2.
ProblemInstance make_instance(int fid, int iid, int dim);

/// f(x). Throws ShapeError on a length mismatch and DomainError on non-finite x.
double evaluate(const ProblemInstance& instance, const Eigen::Ref<const Eigen::VectorXd>& x);

std::pair<Eigen::VectorXd, double> optimum(const ProblemInstance& instance);

std::string function_name(int fid);

// Helper transformations shared by the function definitions.

struct Oscillate {};
struct Asymmetric {
    double beta;
};
/// Per-axis factors alpha^((i-1)/(d-1)), i.e. the squared diagonal of the
/// conditioning matrix Lambda^alpha. (1,1,1) with alpha = 100 maps to (1,10,100).
struct DiagScale {
    double alpha;
};
using TransformKind = std::variant<Oscillate, Asymmetric, DiagScale>;

Eigen::VectorXd transform(const Eigen::Ref<const Eigen::VectorXd>& x, const TransformKind& kind);

double t_osz(double v);
/// Diagonal of Lambda^alpha: entries alpha^(0.5 (i-1)/(d-1)).
Eigen::VectorXd conditioning(int dim, double alpha);
/// Sum of squared excursions outside [-5, 5].
double boundary_penalty(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace modfoot::bbob
