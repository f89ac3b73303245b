#include "pkb/boosting.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pkb/error.hpp"
#include "pkb/parallel.hpp"
#include "pkb/random.hpp"

namespace pkb {

void FitConfig::validate() const {
    if (max_iters < 1) throw InvalidInput("max_iters must be >= 1");
    if (!(nu > 0.0) || nu > 1.0) throw InvalidInput("nu must be in (0, 1]");
    if (lambda && !(*lambda > 0.0)) throw InvalidInput("lambda must be > 0");
    if (!(lambda_factor > 0.0)) throw InvalidInput("lambda_factor must be > 0");
    if (cv_folds_inner < 2) throw InvalidInput("cv_folds_inner must be >= 2");
    if (kernel.degree < 1) throw InvalidInput("kernel degree must be >= 1");
    for (double f : lambda_grid_factors) {
        if (!(f > 0.0)) throw InvalidInput("lambda grid factors must be > 0");
    }
}

double init_intercept(const LabelVector& y) {
    y.validate();
    return std::log(static_cast<double>(y.positive_count()) /
                    static_cast<double>(y.negative_count()));
}

namespace {

// Fits one pathway's base learner through the centering transform. The
// straightforward route, used by the public selection entry point and by the
// L1 training loop.
BaseLearnerFit fit_pathway(int m,
                           const DerivativeState& deriv,
                           const Eigen::VectorXd& eta_tilde,
                           const Eigen::MatrixXd& k,
                           double lambda,
                           Penalty penalty) {
    const Eigen::MatrixXd k_tilde = weighted_center_matrix(k, deriv.w);
    BaseLearnerFit fit;
    fit.pathway_index = m;
    fit.beta = (penalty == Penalty::l1) ? solve_l1(k_tilde, eta_tilde, lambda)
                                        : solve_l2(k_tilde, eta_tilde, lambda);
    fit.intercept = recover_intercept(deriv.eta, deriv.w, k, fit.beta);
    fit.regularized_loss = regularized_loss(fit, deriv, k, lambda, penalty);
    return fit;
}

// Ridge route that avoids forming K~^T K~: with S the centering map,
// K~ K~^T = S K^2 S^T assembles in O(N^2) from a precomputed K^2, and
// beta = -K~^T (K~ K~^T + N lambda I)^{-1} eta~ by the push-through identity.
BaseLearnerFit fit_pathway_l2_fast(int m,
                                   const DerivativeState& deriv,
                                   const Eigen::VectorXd& eta_tilde,
                                   const Eigen::MatrixXd& k,
                                   const Eigen::MatrixXd& k_squared,
                                   double lambda) {
    const Eigen::Index n = k.rows();
    const Eigen::VectorXd v = deriv.w / deriv.w_sum;
    const Eigen::VectorXd sqrt_w = deriv.w.array().sqrt();
    const Eigen::VectorXd cm = k_squared * v;
    const double total = v.dot(cm);

    Eigen::MatrixXd system(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            system(i, j) = sqrt_w[i] * sqrt_w[j] * (k_squared(i, j) - cm[i] - cm[j] + total);
        }
    }
    system.diagonal().array() += static_cast<double>(n) * lambda;

    Eigen::LLT<Eigen::MatrixXd> llt(system);
    Eigen::VectorXd z = llt.solve(eta_tilde);
    z += llt.solve(eta_tilde - system * z);

    // S^T z, then beta = -K (S^T z).
    const Eigen::VectorXd st_z = (sqrt_w.array() * z.array()).matrix() - v * sqrt_w.dot(z);

    BaseLearnerFit fit;
    fit.pathway_index = m;
    fit.beta = -(k * st_z);
    fit.intercept = recover_intercept(deriv.eta, deriv.w, k, fit.beta);
    fit.regularized_loss = regularized_loss(fit, deriv, k, lambda, Penalty::l2);
    return fit;
}

int argmin_fit(const std::vector<BaseLearnerFit>& fits) {
    int best = 0;
    for (int m = 1; m < static_cast<int>(fits.size()); ++m) {
        if (fits[m].regularized_loss < fits[best].regularized_loss) best = m;
    }
    return best;
}

struct ValidationSet {
    std::vector<Eigen::MatrixXd> cross;  // per pathway, N_train x N_val
    Eigen::VectorXd y_val;
};

struct EngineOptions {
    int max_iters = 1;
    double nu = 0.05;
    double lambda = 0.0;
    Penalty penalty = Penalty::l1;
};

// The boosting loop of the algorithm: derivatives, per-pathway penalized
// fits, selection, exact line search, damped update. Optionally tracks
// held-out loss after every iteration.
BoostState run_engine(const KernelSet& kernels,
                      const LabelVector& y,
                      const EngineOptions& opt,
                      const ValidationSet* val,
                      std::vector<double>* val_losses,
                      std::ostream* log) {
    const Eigen::Index n = y.size();
    const std::size_t n_pathways = kernels.size();

    BoostState state;
    state.F = Eigen::VectorXd::Constant(n, init_intercept(y));
    state.intercept = state.F[0];
    state.beta_acc.assign(n_pathways, Eigen::VectorXd::Zero(n));
    state.loss_history.push_back(log_loss(y.y, state.F));

    Eigen::VectorXd f_val;
    if (val != nullptr) f_val = Eigen::VectorXd::Constant(val->y_val.size(), state.intercept);

    // K^2 per pathway lets the ridge subproblem skip the Gram product.
    std::vector<Eigen::MatrixXd> k_squared;
    if (opt.penalty == Penalty::l2) {
        k_squared.resize(n_pathways);
        parallel_for(n_pathways, [&](std::size_t m) {
            k_squared[m] = kernels.matrices[m] * kernels.matrices[m];
        });
    }

    std::vector<BaseLearnerFit> fits(n_pathways);
    for (int t = 0; t < opt.max_iters; ++t) {
        const DerivativeState deriv = compute_derivatives(y, state.F);
        const Eigen::VectorXd eta_tilde = weighted_center_vector(deriv.eta, deriv.w);

        parallel_for(n_pathways, [&](std::size_t m) {
            try {
                fits[m] = (opt.penalty == Penalty::l2)
                              ? fit_pathway_l2_fast(static_cast<int>(m), deriv, eta_tilde,
                                                    kernels.matrices[m], k_squared[m], opt.lambda)
                              : fit_pathway(static_cast<int>(m), deriv, eta_tilde,
                                            kernels.matrices[m], opt.lambda, opt.penalty);
            } catch (const SolverError& e) {
                throw SolverError("pathway '" + kernels.pathway_names[m] + "' (index " +
                                      std::to_string(m) + "): " + e.what(),
                                  e.last_iterate);
            }
        });

        const int best = argmin_fit(fits);
        const BaseLearnerFit& fit = fits[best];
        if ((fit.beta.array() == 0.0).all()) {
            if (log != nullptr) {
                *log << "iter " << (t + 1)
                     << " selected base learner has all-zero coefficients; stopping early"
                     << " (lambda may be too large)\n";
            }
            break;
        }

        const Eigen::VectorXd f_train =
            kernels.matrices[best] * fit.beta + Eigen::VectorXd::Constant(n, fit.intercept);
        const double step_len = line_search(y, state.F, f_train);
        if (!(step_len > 0.0)) {
            if (log != nullptr) *log << "iter " << (t + 1) << " no descent step; stopping early\n";
            break;
        }

        const double step = opt.nu * step_len;
        state.F += step * f_train;
        state.beta_acc[best] += step * fit.beta;
        state.intercept += step * fit.intercept;
        state.selection_history.push_back(best);
        state.loss_history.push_back(log_loss(y.y, state.F));

        if (val != nullptr) {
            f_val += step * (val->cross[best].transpose() * fit.beta +
                             Eigen::VectorXd::Constant(f_val.size(), fit.intercept));
            val_losses->push_back(log_loss(val->y_val, f_val));
        }
        if (log != nullptr) {
            *log << "iter " << (t + 1) << " pathway " << kernels.pathway_names[best] << " loss "
                 << state.loss_history.back() << '\n';
        }
    }
    state.t = static_cast<int>(state.selection_history.size());
    return state;
}

double resolve_lambda(const FitConfig& config, const KernelSet& kernels, const LabelVector& y) {
    double lambda = 0.0;
    if (config.lambda) {
        lambda = *config.lambda;
    } else {
        const Eigen::VectorXd f0 = Eigen::VectorXd::Constant(y.size(), init_intercept(y));
        lambda = auto_lambda(compute_derivatives(y, f0), kernels, config.penalty);
    }
    lambda *= config.lambda_factor;
    if (!(lambda > 0.0)) throw InvalidInput("resolved lambda must be > 0");
    return lambda;
}

}  // namespace

BaseLearnerFit select_base_learner(const DerivativeState& deriv,
                                   const KernelSet& kernels,
                                   double lambda,
                                   Penalty penalty) {
    if (kernels.size() == 0) throw InvalidInput("select_base_learner: no pathways");
    const Eigen::VectorXd eta_tilde = weighted_center_vector(deriv.eta, deriv.w);
    std::vector<BaseLearnerFit> fits(kernels.size());
    parallel_for(kernels.size(), [&](std::size_t m) {
        try {
            fits[m] = fit_pathway(static_cast<int>(m), deriv, eta_tilde, kernels.matrices[m],
                                  lambda, penalty);
        } catch (const SolverError& e) {
            throw SolverError("pathway '" + kernels.pathway_names[m] + "' (index " +
                                  std::to_string(m) + "): " + e.what(),
                              e.last_iterate);
        }
    });
    return fits[static_cast<std::size_t>(argmin_fit(fits))];
}

double auto_lambda(const DerivativeState& deriv0, const KernelSet& kernels, Penalty /*penalty*/) {
    if (kernels.size() == 0) throw InvalidInput("auto_lambda: no pathways");
    const Eigen::VectorXd eta_tilde = weighted_center_vector(deriv0.eta, deriv0.w);

    std::vector<double> lambda_max(kernels.size());
    parallel_for(kernels.size(), [&](std::size_t m) {
        lambda_max[m] = l1_lambda_max(weighted_center_matrix(kernels.matrices[m], deriv0.w),
                                      eta_tilde);
    });

    std::sort(lambda_max.begin(), lambda_max.end());
    const std::size_t count = lambda_max.size();
    const double median = (count % 2 == 1)
                              ? lambda_max[count / 2]
                              : 0.5 * (lambda_max[count / 2 - 1] + lambda_max[count / 2]);
    const double value = 0.2 * median;
    return value > 0.0 ? value : 1e-3;
}

PKBModel fit(const ExpressionDataset& data,
             const PathwayCollection& pathways,
             const LabelVector& y,
             const FitConfig& config,
             std::ostream* log) {
    config.validate();
    data.validate(/*for_training=*/true);
    pathways.validate(data.n_genes());
    y.validate();
    if (y.size() != data.n_samples()) throw InvalidInput("label count does not match samples");
    if (pathways.size() == 0) throw InvalidInput("need at least one pathway");

    const KernelSet kernels = build_kernel_set(data, pathways, config.kernel);
    const double lambda = resolve_lambda(config, kernels, y);
    if (log != nullptr && !config.lambda) *log << "auto lambda " << lambda << '\n';

    EngineOptions opt;
    opt.max_iters = config.max_iters;
    opt.nu = config.nu;
    opt.lambda = lambda;
    opt.penalty = config.penalty;
    BoostState state = run_engine(kernels, y, opt, nullptr, nullptr, log);

    PKBModel model;
    model.kernel = config.kernel;
    model.intercept = state.intercept;
    model.penalty = config.penalty;
    model.lambda_used = lambda;
    model.nu = config.nu;
    model.seed = config.seed;
    model.t_used = state.t;
    model.loss_history = std::move(state.loss_history);
    model.selection_history = std::move(state.selection_history);
    model.pathway_names = kernels.pathway_names;
    model.weights.resize(pathways.size());
    for (std::size_t m = 0; m < pathways.size(); ++m) {
        model.weights[m] = state.beta_acc[m].norm();
        if (model.weights[m] == 0.0) continue;

        SelectedPathway sel;
        sel.name = pathways[m].name;
        for (Eigen::Index g : pathways[m].gene_indices) {
            sel.gene_ids.push_back(data.gene_ids[static_cast<std::size_t>(g)]);
        }
        const Eigen::MatrixXd slice = pathway_slice(data.values, pathways[m]);
        std::vector<Eigen::Index> nonzero;
        for (Eigen::Index i = 0; i < state.beta_acc[m].size(); ++i) {
            if (state.beta_acc[m][i] != 0.0) nonzero.push_back(i);
        }
        sel.sample_rows.resize(static_cast<Eigen::Index>(nonzero.size()), slice.cols());
        sel.beta.resize(static_cast<Eigen::Index>(nonzero.size()));
        for (std::size_t k = 0; k < nonzero.size(); ++k) {
            sel.sample_rows.row(static_cast<Eigen::Index>(k)) = slice.row(nonzero[k]);
            sel.beta[static_cast<Eigen::Index>(k)] = state.beta_acc[m][nonzero[k]];
        }
        model.selected.push_back(std::move(sel));
    }
    return model;
}

int pick_t_star(const std::vector<double>& mean_val_loss) {
    if (mean_val_loss.empty()) throw InvalidInput("pick_t_star: empty loss curve");
    std::size_t best = 0;
    for (std::size_t t = 1; t < mean_val_loss.size(); ++t) {
        if (mean_val_loss[t] < mean_val_loss[best]) best = t;
    }
    return static_cast<int>(best) + 1;
}

CvSelection select_T_by_cv(const ExpressionDataset& data,
                           const PathwayCollection& pathways,
                           const LabelVector& y,
                           const FitConfig& config,
                           std::ostream* log) {
    config.validate();
    const std::vector<int> fold_of = stratified_folds(y.y, config.cv_folds_inner, config.seed);

    CvSelection result;
    const std::size_t t_max = static_cast<std::size_t>(config.max_iters);
    result.mean_val_loss.assign(t_max, 0.0);

    for (int fold = 0; fold < config.cv_folds_inner; ++fold) {
        std::vector<Eigen::Index> train_rows, val_rows;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            (fold_of[static_cast<std::size_t>(i)] == fold ? val_rows : train_rows).push_back(i);
        }
        const ExpressionDataset train_data = subset_samples(data, train_rows);
        const LabelVector train_y = subset_labels(y, train_rows);
        const ExpressionDataset val_data = subset_samples(data, val_rows);

        const KernelSet kernels = build_kernel_set(train_data, pathways, config.kernel);
        const double lambda = resolve_lambda(config, kernels, train_y);

        ValidationSet val;
        val.y_val = subset_labels(y, val_rows).y;
        val.cross.resize(pathways.size());
        parallel_for(pathways.size(), [&](std::size_t m) {
            val.cross[m] = build_cross_kernel(pathway_slice(train_data.values, pathways[m]),
                                              pathway_slice(val_data.values, pathways[m]),
                                              config.kernel,
                                              static_cast<Eigen::Index>(pathways[m].size()));
        });

        EngineOptions opt;
        opt.max_iters = config.max_iters;
        opt.nu = config.nu;
        opt.lambda = lambda;
        opt.penalty = config.penalty;
        std::vector<double> val_losses;
        BoostState state = run_engine(kernels, train_y, opt, &val, &val_losses, nullptr);

        // Early-terminated runs leave the target function unchanged from
        // then on; the curve is padded with the last seen loss.
        const double f0 = init_intercept(train_y);
        double last = log_loss(val.y_val, Eigen::VectorXd::Constant(val.y_val.size(), f0));
        for (std::size_t t = 0; t < t_max; ++t) {
            if (t < val_losses.size()) last = val_losses[t];
            result.mean_val_loss[t] += last;
        }
        result.fold_train_loss.push_back(std::move(state.loss_history));
        if (log != nullptr) {
            *log << "inner fold " << (fold + 1) << " lambda " << lambda << " iterations "
                 << state.t << '\n';
        }
    }

    for (double& v : result.mean_val_loss) v /= static_cast<double>(config.cv_folds_inner);
    result.t_star = pick_t_star(result.mean_val_loss);
    if (log != nullptr) *log << "selected T* " << result.t_star << '\n';
    return result;
}

Prediction predict(const PKBModel& model, const ExpressionDataset& new_data) {
    new_data.validate(/*for_training=*/false);
    const Eigen::Index n_new = new_data.n_samples();

    std::unordered_map<std::string, Eigen::Index> col_of;
    col_of.reserve(new_data.gene_ids.size());
    for (std::size_t j = 0; j < new_data.gene_ids.size(); ++j) {
        col_of.emplace(new_data.gene_ids[j], static_cast<Eigen::Index>(j));
    }

    Prediction out;
    out.scores = Eigen::VectorXd::Constant(n_new, model.intercept);
    for (const auto& sel : model.selected) {
        Eigen::MatrixXd new_slice(n_new, static_cast<Eigen::Index>(sel.gene_ids.size()));
        for (std::size_t g = 0; g < sel.gene_ids.size(); ++g) {
            auto it = col_of.find(sel.gene_ids[g]);
            if (it == col_of.end()) {
                throw InvalidInput("prediction data is missing gene '" + sel.gene_ids[g] +
                                   "' required by pathway '" + sel.name + "'");
            }
            new_slice.col(static_cast<Eigen::Index>(g)) = new_data.values.col(it->second);
        }
        const Eigen::MatrixXd cross =
            build_cross_kernel(sel.sample_rows, new_slice, model.kernel,
                               static_cast<Eigen::Index>(sel.gene_ids.size()));
        out.scores += cross.transpose() * sel.beta;
    }

    out.labels.resize(n_new);
    for (Eigen::Index i = 0; i < n_new; ++i) out.labels[i] = out.scores[i] < 0.0 ? -1.0 : 1.0;
    return out;
}

std::vector<std::pair<std::string, double>> pathway_weights(const PKBModel& model) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(model.pathway_names.size());
    for (std::size_t m = 0; m < model.pathway_names.size(); ++m) {
        out.emplace_back(model.pathway_names[m], model.weights[m]);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

}  // namespace pkb
