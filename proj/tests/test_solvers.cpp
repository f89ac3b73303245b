#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pkb/error.hpp"
#include "pkb/solvers.hpp"

namespace {

pkb::LabelVector labels_from(std::initializer_list<double> values) {
    pkb::LabelVector y;
    y.y.resize(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) y.y[i++] = v;
    return y;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

Eigen::VectorXd random_weights(Eigen::Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.01, 0.125);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = uni(rng);
    return w;
}

}  // namespace

TEST_CASE("log-loss derivatives at hand-evaluated points") {
    const auto y = labels_from({1, -1, 1});
    Eigen::VectorXd f(3);
    f << 0.0, 0.0, std::log(3.0);
    const pkb::DerivativeState d = pkb::compute_derivatives(y, f);

    CHECK(d.h[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(d.q[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d.eta[0] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(d.h[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.q[1] == doctest::Approx(0.25).epsilon(1e-15));
    // e^{yF} = 3: h = -1/4, q = 3/16
    CHECK(d.h[2] == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(d.q[2] == doctest::Approx(3.0 / 16.0).epsilon(1e-14));
    CHECK(d.w[2] == doctest::Approx(3.0 / 32.0).epsilon(1e-14));
    CHECK(d.w_sum == doctest::Approx(d.w.sum()));
}

TEST_CASE("derivatives stay finite and correctly signed") {
    std::mt19937_64 rng(3);
    const auto y = labels_from({1, -1, 1, -1, 1, -1});

    SUBCASE("extreme fitted values do not overflow and q is clamped") {
        Eigen::VectorXd f(6);
        f << 1e4, -1e4, 40.0, -40.0, 0.0, 1.0;
        const pkb::DerivativeState d = pkb::compute_derivatives(y, f);
        CHECK(d.h.allFinite());
        CHECK(d.q.allFinite());
        CHECK(d.eta.allFinite());
        // yF = 40 puts the raw curvature ~ e^-40 below the clamp floor
        CHECK(d.q[2] == pkb::kCurvatureFloor);
        CHECK((d.q.array() >= pkb::kCurvatureFloor).all());
        CHECK((d.q.array() <= 0.25).all());
    }

    SUBCASE("sign structure on moderate values") {
        for (int rep = 0; rep < 50; ++rep) {
            const Eigen::VectorXd f = random_vector(6, rng, 10.0);
            const pkb::DerivativeState d = pkb::compute_derivatives(y, f);
            for (Eigen::Index i = 0; i < 6; ++i) {
                CHECK(d.h[i] * y.y[i] < 0.0);
                CHECK(std::abs(d.h[i]) < 1.0);
                CHECK(d.eta[i] * y.y[i] < 0.0);
                CHECK(d.q[i] > 0.0);
                CHECK(d.q[i] <= 0.25);
            }
        }
    }
}

TEST_CASE("weighted centering annihilates constants and matches the dense oracle") {
    SUBCASE("constant vector with equal weights maps to zero") {
        const Eigen::VectorXd eta = Eigen::VectorXd::Constant(5, 3.7);
        const Eigen::VectorXd w = Eigen::VectorXd::Constant(5, 0.125);
        CHECK(pkb::weighted_center_vector(eta, w).cwiseAbs().maxCoeff() <= 1e-15);
    }

    SUBCASE("N = 1 collapses to zero") {
        Eigen::VectorXd eta(1), w(1);
        eta << 2.0;
        w << 0.125;
        Eigen::MatrixXd k(1, 1);
        k << 0.9;
        const auto [eta_tilde, k_tilde] = pkb::weighted_centering(eta, w, k);
        CHECK(eta_tilde[0] == 0.0);
        CHECK(k_tilde(0, 0) == 0.0);
    }

    SUBCASE("worked 3-sample instance against the dense matrix product") {
        Eigen::VectorXd w(3), eta(3);
        w << 0.1, 0.2, 0.2;
        eta << 1.0, -1.0, 2.0;
        const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);

        const auto t = oracle::dense_transform(w);
        const auto [eta_tilde, k_tilde] = pkb::weighted_centering(eta, w, k);
        CHECK((eta_tilde - t.s * eta).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((k_tilde - t.s * k).cwiseAbs().maxCoeff() <= 1e-14);
    }

    SUBCASE("random instances against the dense matrix product") {
        std::mt19937_64 rng(19);
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 9);
            const Eigen::VectorXd w = random_weights(n, rng);
            const Eigen::VectorXd eta = random_vector(n, rng, 3.0);
            const Eigen::MatrixXd k = oracle::random_psd(n, rng);
            const auto t = oracle::dense_transform(w);
            const auto [eta_tilde, k_tilde] = pkb::weighted_centering(eta, w, k);
            CHECK((eta_tilde - t.s * eta).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK((k_tilde - t.s * k).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("ridge subproblem solutions") {
    SUBCASE("zero response gives zero coefficients") {
        const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(4, 4);
        CHECK(pkb::solve_l2(k, Eigen::VectorXd::Zero(4), 0.7).cwiseAbs().maxCoeff() <= 1e-15);
    }

    SUBCASE("hand linear solve: identity design, N=2, lambda=1/2") {
        const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(2, 2);
        Eigen::VectorXd eta(2);
        eta << 1.0, 1.0;
        const Eigen::VectorXd beta = pkb::solve_l2(k, eta, 0.5);
        CHECK(beta[0] == doctest::Approx(-0.5).epsilon(1e-14));
        CHECK(beta[1] == doctest::Approx(-0.5).epsilon(1e-14));
    }

    SUBCASE("random instances match the LU oracle and satisfy the residual bound") {
        std::mt19937_64 rng(41);
        for (int rep = 0; rep < 50; ++rep) {
            const Eigen::Index n = 5;
            const Eigen::MatrixXd k = oracle::random_psd(n, rng);
            const Eigen::VectorXd eta = random_vector(n, rng);
            const double lambda = std::pow(10.0, -1.0 - static_cast<double>(rng() % 4));

            const Eigen::VectorXd beta = pkb::solve_l2(k, eta, lambda);
            const Eigen::VectorXd ref = oracle::ridge_lu(k, eta, lambda);
            CHECK((beta - ref).cwiseAbs().maxCoeff() <= 1e-10);

            const Eigen::VectorXd rhs = -(k.transpose() * eta);
            const Eigen::VectorXd residual =
                (k.transpose() * k + n * lambda * Eigen::MatrixXd::Identity(n, n)) * beta - rhs;
            CHECK(residual.norm() <= 1e-8 * (1.0 + rhs.norm()));
        }
    }
}

TEST_CASE("lasso subproblem solutions") {
    std::mt19937_64 rng(59);

    SUBCASE("lambda at or above lambda_max yields exactly zero") {
        for (int rep = 0; rep < 10; ++rep) {
            const Eigen::Index n = 6;
            const Eigen::MatrixXd k = oracle::random_psd(n, rng);
            const Eigen::VectorXd eta = random_vector(n, rng);
            const double lmax = pkb::l1_lambda_max(k, eta);
            CHECK((pkb::solve_l1(k, eta, lmax * 1.000001).array() == 0.0).all());
            CHECK((pkb::solve_l1(k, eta, lmax * 5.0).array() == 0.0).all());
        }
    }

    SUBCASE("zero response gives exactly zero") {
        const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);
        CHECK((pkb::solve_l1(k, Eigen::VectorXd::Zero(3), 0.1).array() == 0.0).all());
    }

    SUBCASE("objective value matches the proximal-gradient oracle") {
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::Index n = 6;
            const Eigen::MatrixXd k = oracle::random_psd(n, rng);
            const Eigen::VectorXd eta = random_vector(n, rng);
            const double lambda = 0.5 * pkb::l1_lambda_max(k, eta);
            if (!(lambda > 0.0)) continue;

            const Eigen::VectorXd beta = pkb::solve_l1(k, eta, lambda);

            oracle::ProxProblem p;
            p.a = k;
            p.eta = eta;
            p.w = Eigen::VectorXd::Ones(n);
            p.lambda = lambda;
            p.l1 = true;
            p.n_pen = n;
            p.n_obs = n;
            const Eigen::VectorXd ref = oracle::fista_minimize(p);

            const double ours = oracle::prox_objective(p, beta);
            const double theirs = oracle::prox_objective(p, ref);
            CHECK(ours <= theirs + 1e-8 * (1.0 + std::abs(theirs)));
            CHECK(std::abs(ours - theirs) <= 1e-8 * (1.0 + std::abs(theirs)));
        }
    }

    SUBCASE("KKT conditions hold at tolerance 1e-6") {
        for (int rep = 0; rep < 30; ++rep) {
            const Eigen::Index n = 4 + static_cast<Eigen::Index>(rng() % 5);
            const Eigen::MatrixXd k = oracle::random_psd(n, rng);
            const Eigen::VectorXd eta = random_vector(n, rng, 2.0);
            const double lmax = pkb::l1_lambda_max(k, eta);
            if (!(lmax > 0.0)) continue;
            for (double frac : {0.9, 0.3, 0.05}) {
                const double lambda = frac * lmax;
                const Eigen::VectorXd beta = pkb::solve_l1(k, eta, lambda);
                const Eigen::VectorXd grad =
                    (2.0 / static_cast<double>(n)) * (k.transpose() * (eta + k * beta));
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (beta[j] == 0.0) {
                        CHECK(std::abs(grad[j]) <= lambda + 1e-6);
                    } else {
                        CHECK(std::abs(grad[j] + lambda * (beta[j] > 0 ? 1.0 : -1.0)) <= 1e-6);
                    }
                }
            }
        }
    }
}

TEST_CASE("intercept recovery is the weighted-mean minimizer") {
    SUBCASE("zero beta and constant eta") {
        const Eigen::VectorXd eta = Eigen::VectorXd::Constant(4, 1.7);
        Eigen::VectorXd w(4);
        w << 0.1, 0.05, 0.125, 0.08;
        const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(4, 4);
        CHECK(pkb::recover_intercept(eta, w, k, Eigen::VectorXd::Zero(4)) ==
              doctest::Approx(-1.7).epsilon(1e-14));
    }

    SUBCASE("eta equal to -K beta gives zero intercept") {
        std::mt19937_64 rng(3);
        const Eigen::MatrixXd k = oracle::random_psd(4, rng);
        const Eigen::VectorXd beta = random_vector(4, rng);
        const Eigen::VectorXd eta = -(k * beta);
        const Eigen::VectorXd w = random_weights(4, rng);
        CHECK(std::abs(pkb::recover_intercept(eta, w, k, beta)) <= 1e-12);
    }

    SUBCASE("random instances match 1-D golden-section minimization") {
        std::mt19937_64 rng(71);
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::Index n = 4;
            const Eigen::MatrixXd k = oracle::random_psd(n, rng);
            const Eigen::VectorXd beta = random_vector(n, rng);
            const Eigen::VectorXd eta = random_vector(n, rng, 2.0);
            const Eigen::VectorXd w = random_weights(n, rng);

            const auto objective = [&](double c) {
                const Eigen::VectorXd r =
                    eta + k * beta + Eigen::VectorXd::Constant(n, c);
                return w.dot(r.cwiseProduct(r)) / static_cast<double>(n);
            };
            const double ref = oracle::golden_min(objective, -50.0, 50.0, 1e-12);
            CHECK(std::abs(pkb::recover_intercept(eta, w, k, beta) - ref) <= 1e-8);
        }
    }
}

TEST_CASE("regularized loss evaluation") {
    std::mt19937_64 rng(83);
    const auto y = labels_from({1, -1, 1, -1});
    const Eigen::VectorXd f = random_vector(4, rng);
    const pkb::DerivativeState d = pkb::compute_derivatives(y, f);
    const Eigen::MatrixXd k = oracle::random_psd(4, rng);

    SUBCASE("constant-fit baseline") {
        pkb::BaseLearnerFit fit;
        fit.beta = Eigen::VectorXd::Zero(4);
        fit.intercept = 0.0;
        const double expected = d.w.dot(d.eta.cwiseProduct(d.eta)) / 4.0;
        CHECK(pkb::regularized_loss(fit, d, k, 0.3, pkb::Penalty::l1) ==
              doctest::Approx(expected).epsilon(1e-14));
    }

    SUBCASE("lambda = 0 leaves the pure weighted quadratic term") {
        pkb::BaseLearnerFit fit;
        fit.beta = random_vector(4, rng);
        fit.intercept = 0.4;
        const double l1_val = pkb::regularized_loss(fit, d, k, 0.0, pkb::Penalty::l1);
        const double l2_val = pkb::regularized_loss(fit, d, k, 0.0, pkb::Penalty::l2);
        CHECK(l1_val == l2_val);
    }

    SUBCASE("random instance matches term-by-term summation") {
        pkb::BaseLearnerFit fit;
        fit.beta = random_vector(4, rng);
        fit.intercept = -0.2;
        const double lambda = 0.05;

        double quad = 0.0;
        for (Eigen::Index i = 0; i < 4; ++i) {
            double kb = 0.0;
            for (Eigen::Index j = 0; j < 4; ++j) kb += k(i, j) * fit.beta[j];
            const double r = d.eta[i] + kb + fit.intercept;
            quad += d.w[i] * r * r;
        }
        quad /= 4.0;
        double l1_pen = 0.0, l2_pen = 0.0;
        for (Eigen::Index j = 0; j < 4; ++j) {
            l1_pen += std::abs(fit.beta[j]);
            l2_pen += fit.beta[j] * fit.beta[j];
        }
        CHECK(pkb::regularized_loss(fit, d, k, lambda, pkb::Penalty::l1) ==
              doctest::Approx(quad + lambda * l1_pen).epsilon(1e-13));
        CHECK(pkb::regularized_loss(fit, d, k, lambda, pkb::Penalty::l2) ==
              doctest::Approx(quad + lambda * l2_pen).epsilon(1e-13));
    }
}

TEST_CASE("line search") {
    SUBCASE("separable direction runs to the cap") {
        const auto y = labels_from({1, -1});
        Eigen::VectorXd f0 = Eigen::VectorXd::Zero(2);
        Eigen::VectorXd dir(2);
        dir << 1.0, -1.0;  // always-correct direction: loss decreases forever
        CHECK(pkb::line_search(y, f0, dir) == pkb::kLineSearchDMax);
        CHECK(pkb::log_loss(y.y, f0 + 1.0 * dir) < pkb::log_loss(y.y, f0));
    }

    SUBCASE("all-zero direction is rejected") {
        const auto y = labels_from({1, -1});
        CHECK_THROWS_AS(pkb::line_search(y, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                        pkb::InvalidInput);
    }

    SUBCASE("random instances agree with a 10^4-point log-scale grid") {
        std::mt19937_64 rng(97);
        for (int rep = 0; rep < 10; ++rep) {
            pkb::LabelVector y;
            y.y.resize(10);
            for (Eigen::Index i = 0; i < 10; ++i) y.y[i] = (rng() % 2 == 0) ? 1.0 : -1.0;
            const Eigen::VectorXd F = random_vector(10, rng);
            const Eigen::VectorXd f = random_vector(10, rng);

            const double d_hat = pkb::line_search(y, F, f);
            const auto phi = [&](double d) { return pkb::log_loss(y.y, F + d * f); };

            // densest grid point with minimal loss
            const int grid_n = 10000;
            const double lo = 1e-6, hi = pkb::kLineSearchDMax;
            double best_d = lo, best_v = phi(lo);
            const double ratio = std::pow(hi / lo, 1.0 / (grid_n - 1));
            double d = lo;
            for (int g = 1; g < grid_n; ++g) {
                d *= ratio;
                const double v = phi(d);
                if (v < best_v) {
                    best_v = v;
                    best_d = d;
                }
            }
            if (d_hat == pkb::kLineSearchDMax) {
                // grid agrees the minimum sits at the boundary
                CHECK(best_d >= hi / (ratio * ratio));
            } else if (d_hat > 2e-6) {
                CHECK(std::abs(std::log(d_hat) - std::log(best_d)) <= 2.0 * std::log(ratio));
            }
            // never increases the loss
            CHECK(phi(d_hat) <= phi(0.0) + 1e-12);
        }
    }
}

TEST_CASE("transform equivalence against the joint optimizer on small instances") {
    std::mt19937_64 rng(113);
    for (int rep = 0; rep < 8; ++rep) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 8);
        const Eigen::MatrixXd k = oracle::random_psd(n, rng);
        const Eigen::VectorXd w = random_weights(n, rng);
        const Eigen::VectorXd eta = random_vector(n, rng, 2.0);
        const double lambda = 0.02 + 0.1 * static_cast<double>(rng() % 5);

        Eigen::MatrixXd design(n, n + 1);
        design.leftCols(n) = k;
        design.col(n) = Eigen::VectorXd::Ones(n);

        for (pkb::Penalty penalty : {pkb::Penalty::l1, pkb::Penalty::l2}) {
            const auto [eta_tilde, k_tilde] = pkb::weighted_centering(eta, w, k);
            const Eigen::VectorXd beta = (penalty == pkb::Penalty::l1)
                                             ? pkb::solve_l1(k_tilde, eta_tilde, lambda)
                                             : pkb::solve_l2(k_tilde, eta_tilde, lambda);
            const double c = pkb::recover_intercept(eta, w, k, beta);

            oracle::ProxProblem joint;
            joint.a = design;
            joint.eta = eta;
            joint.w = w;
            joint.lambda = lambda;
            joint.l1 = penalty == pkb::Penalty::l1;
            joint.n_pen = n;
            joint.n_obs = n;
            const Eigen::VectorXd z = oracle::fista_minimize(joint);

            Eigen::VectorXd ours(n + 1);
            ours.head(n) = beta;
            ours[n] = c;
            const double v_ours = oracle::prox_objective(joint, ours);
            const double v_joint = oracle::prox_objective(joint, z);
            CHECK(std::abs(v_ours - v_joint) <= 1e-6 * (1.0 + std::abs(v_joint)));
        }
    }
}
