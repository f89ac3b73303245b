#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "pkb/types.hpp"

namespace pkb {

enum class Penalty { l1, l2 };

Penalty penalty_from_string(const std::string& name);
std::string to_string(Penalty penalty);

inline constexpr double kCurvatureFloor = 1e-10;  // lower clamp on q before eta = h/q
inline constexpr double kLassoTol = 1e-6;
// Total sweep budget including the warm-start ladder; centered kernel
// designs are rank-deficient and need a few thousand sweeps at small
// penalties.
inline constexpr int kLassoMaxSweeps = 20000;
inline constexpr double kLineSearchDMax = 100.0;
inline constexpr double kLineSearchDerivTol = 1e-8;

/// First/second derivatives of the sample-averaged log loss at the current
/// fit, plus the derived working-response quantities.
struct DerivativeState {
    Eigen::VectorXd h;    // dl/dF_i        = -y_i / (1 + exp(y_i F_i))
    Eigen::VectorXd q;    // d2l/dF_i^2, clamped below at kCurvatureFloor
    Eigen::VectorXd eta;  // h / q
    Eigen::VectorXd w;    // q / 2, the diagonal of the weight matrix
    double w_sum = 0.0;   // trace of the weight matrix
};

/// One pathway's fitted base learner: f(x) = sum_i K_m(x_i, x) beta_i + c.
struct BaseLearnerFit {
    int pathway_index = -1;
    Eigen::VectorXd beta;
    double intercept = 0.0;
    double regularized_loss = 0.0;
};

/// Evaluates the log-loss derivatives at fitted values F. Numerically stable
/// for |F| up to 1e4; q is clamped before forming eta so eta stays finite
/// even for confidently classified samples.
DerivativeState compute_derivatives(const LabelVector& y, const Eigen::VectorXd& F);

/// Mean log loss (1/N) sum log(1 + exp(-y_i F_i)).
double log_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& F);

/// Applies W^{1/2} [I - 1 1^T W / tr(W)] to a vector: scale-centered so the
/// intercept direction is annihilated.
Eigen::VectorXd weighted_center_vector(const Eigen::VectorXd& x, const Eigen::VectorXd& w);

/// Same transform applied to every column of a matrix.
Eigen::MatrixXd weighted_center_matrix(const Eigen::MatrixXd& k, const Eigen::VectorXd& w);

/// The transform that turns the penalized working loss into an
/// intercept-free problem in beta alone.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> weighted_centering(const Eigen::VectorXd& eta,
                                                               const Eigen::VectorXd& w,
                                                               const Eigen::MatrixXd& k);

/// Ridge solution of (K~^T K~ + N lambda I) beta = -K~^T eta~ via Cholesky
/// with one step of iterative refinement. The normal-equation residual is
/// kept below 1e-8 * (1 + |K~^T eta~|).
Eigen::VectorXd solve_l2(const Eigen::MatrixXd& k_tilde,
                         const Eigen::VectorXd& eta_tilde,
                         double lambda);

/// LASSO solution of min (1/N)|eta~ + K~ beta|^2 + lambda |beta|_1 by cyclic
/// coordinate descent with soft thresholding, falling back to warm-started
/// continuation down a penalty ladder on hard instances. The result carries
/// an explicit KKT certificate at tolerance kLassoTol; SolverError (with the
/// last iterate) is thrown if the sweep budget runs out first.
Eigen::VectorXd solve_l1(const Eigen::MatrixXd& k_tilde,
                         const Eigen::VectorXd& eta_tilde,
                         double lambda);

/// Smallest L1 penalty at which the all-zero solution is optimal:
/// max_j |(2/N) K~_j^T eta~|.
double l1_lambda_max(const Eigen::MatrixXd& k_tilde, const Eigen::VectorXd& eta_tilde);

/// Optimal intercept for a fixed beta: the weighted mean residual with sign
/// flipped, c = -sum_i w_i (eta_i + (K beta)_i) / sum_i w_i.
double recover_intercept(const Eigen::VectorXd& eta,
                         const Eigen::VectorXd& w,
                         const Eigen::MatrixXd& k,
                         const Eigen::VectorXd& beta);

/// Working loss (1/N) sum w_i (eta_i + (K beta)_i + c)^2 + penalty(beta),
/// with the additive constant in F dropped.
double regularized_loss(const BaseLearnerFit& fit,
                        const DerivativeState& deriv,
                        const Eigen::MatrixXd& k,
                        double lambda,
                        Penalty penalty);

/// Exact-to-tolerance minimization of d -> mean log loss of F + d * f over
/// (0, kLineSearchDMax]. Returns kLineSearchDMax when the loss is still
/// decreasing there (separable case). Requires f not identically zero.
double line_search(const LabelVector& y, const Eigen::VectorXd& F, const Eigen::VectorXd& f_vals);

}  // namespace pkb
