// Test-side reference implementations, kept independent of the library's
// computation paths: brute-force loops, dense matrix products, generic
// first-order optimizers, and 1-D search. Expected values in the tests are
// computed (or were frozen) from these.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "pkb/kernels.hpp"

namespace oracle {

// Kernel formulas evaluated with plain loops.
inline double kernel_entry(const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v,
                           const pkb::KernelSpec& spec,
                           int p_m) {
    double dot = 0.0, sq_dist = 0.0;
    for (Eigen::Index t = 0; t < u.size(); ++t) {
        dot += u[t] * v[t];
        sq_dist += (u[t] - v[t]) * (u[t] - v[t]);
    }
    switch (spec.kind) {
        case pkb::KernelKind::rbf:
            return std::exp(-sq_dist / p_m);
        case pkb::KernelKind::polynomial:
            return std::pow((spec.poly_scaled ? dot / p_m : dot) + 1.0, spec.degree);
        case pkb::KernelKind::linear:
            return dot / p_m;
    }
    return 0.0;
}

// The centering transform assembled as explicit dense matrices.
struct DenseTransform {
    Eigen::MatrixXd s;  // W^{1/2} (I - 1 1^T W / tr W)
};

inline DenseTransform dense_transform(const Eigen::VectorXd& w) {
    const Eigen::Index n = w.size();
    const Eigen::MatrixXd projector =
        Eigen::MatrixXd::Identity(n, n) -
        Eigen::VectorXd::Ones(n) * w.transpose() / w.sum();
    DenseTransform t;
    t.s = w.array().sqrt().matrix().asDiagonal() * projector;
    return t;
}

// Generic dense solve of the ridge normal equations via full-pivot LU.
inline Eigen::VectorXd ridge_lu(const Eigen::MatrixXd& k_tilde,
                                const Eigen::VectorXd& eta_tilde,
                                double lambda) {
    const Eigen::Index n = k_tilde.cols();
    const Eigen::MatrixXd a = k_tilde.transpose() * k_tilde +
                              static_cast<double>(n) * lambda *
                                  Eigen::MatrixXd::Identity(n, n);
    return Eigen::FullPivLU<Eigen::MatrixXd>(a).solve(-(k_tilde.transpose() * eta_tilde));
}

inline double soft(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

// FISTA on (1/N)|eta + A z|_W^2 [+ lambda |z_pen|_2^2] + lambda |z_pen|_1,
// penalizing only the first n_pen coordinates. With W = I and A = K~ this is
// the transformed problem; with A = [K 1] and the actual weights it is the
// joint problem in (beta, c).
struct ProxProblem {
    Eigen::MatrixXd a;
    Eigen::VectorXd eta;
    Eigen::VectorXd w;  // per-sample weights
    double lambda = 0.0;
    bool l1 = true;
    Eigen::Index n_pen = 0;  // penalized coordinate count
    Eigen::Index n_obs = 0;  // the N in the 1/N factor
};

inline double prox_objective(const ProxProblem& p, const Eigen::VectorXd& z) {
    const Eigen::VectorXd r = p.eta + p.a * z;
    double value = p.w.dot(r.cwiseProduct(r)) / static_cast<double>(p.n_obs);
    const auto head = z.head(p.n_pen);
    value += p.l1 ? p.lambda * head.template lpNorm<1>() : p.lambda * head.squaredNorm();
    return value;
}

inline Eigen::VectorXd fista_minimize(const ProxProblem& p, int max_iters = 200000) {
    const Eigen::Index dim = p.a.cols();
    const Eigen::MatrixXd awa =
        p.a.transpose() * p.w.asDiagonal() * p.a * (2.0 / static_cast<double>(p.n_obs));
    double lip = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(awa).eigenvalues().maxCoeff();
    if (!p.l1) lip += 2.0 * p.lambda;
    if (lip <= 0.0) lip = 1.0;
    const double step = 1.0 / lip;

    Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd momentum = z;
    double t_k = 1.0;
    double best = prox_objective(p, z);
    int stall = 0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd grad =
            p.a.transpose() * (p.w.cwiseProduct(p.eta + p.a * momentum)) *
            (2.0 / static_cast<double>(p.n_obs));
        if (!p.l1) grad.head(p.n_pen) += 2.0 * p.lambda * momentum.head(p.n_pen);
        Eigen::VectorXd next = momentum - step * grad;
        if (p.l1) {
            for (Eigen::Index j = 0; j < p.n_pen; ++j) {
                next[j] = soft(next[j], step * p.lambda);
            }
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
        momentum = next + ((t_k - 1.0) / t_next) * (next - z);
        z = next;
        t_k = t_next;

        const double value = prox_objective(p, z);
        if (value < best - 1e-15 * (1.0 + std::abs(best))) {
            best = value;
            stall = 0;
        } else if (++stall > 200) {
            break;
        }
    }
    return z;
}

// Golden-section minimization of a convex univariate function, followed by a
// parabolic-vertex refinement. Pure golden section bottoms out near
// sqrt(machine epsilon) argument accuracy on flat quadratics; fitting a
// parabola through three well-separated points recovers the vertex to much
// higher precision for smooth objectives.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         double tol = 1e-12) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);

    const double h = 1e-3 * (1.0 + std::abs(mid));
    const double f_minus = f(mid - h), f_mid = f(mid), f_plus = f(mid + h);
    const double denom = f_plus - 2.0 * f_mid + f_minus;
    if (denom > 0.0) {
        const double vertex = mid - 0.5 * h * (f_plus - f_minus) / denom;
        if (vertex > lo && vertex < hi && f(vertex) <= f_mid) return vertex;
    }
    return mid;
}

// Random PSD kernel-like matrix: G G^T scaled into a sane range.
inline Eigen::MatrixXd random_psd(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(rng);
    }
    Eigen::MatrixXd psd = g * g.transpose() / static_cast<double>(n);
    return psd;
}

}  // namespace oracle
