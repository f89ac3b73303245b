#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pkb/kernels.hpp"
#include "pkb/solvers.hpp"
#include "pkb/types.hpp"

namespace pkb {

/// Training hyperparameters. A missing lambda means "choose automatically
/// from the data"; lambda_factor scales whatever value is resolved, which is
/// how a sweep around the automatic value is expressed.
struct FitConfig {
    Penalty penalty = Penalty::l1;
    std::optional<double> lambda;  // nullopt = auto
    double lambda_factor = 1.0;
    double nu = 0.05;
    int max_iters = 500;  // T
    int cv_folds_inner = 3;
    KernelSpec kernel;
    std::uint64_t seed = 0;
    std::vector<double> lambda_grid_factors = {1.0 / 25.0, 1.0 / 5.0, 1.0, 5.0, 25.0};

    void validate() const;
};

/// Mutable training-loop state. loss_history[0] is the loss of the constant
/// model; entry t is the loss after iteration t.
struct BoostState {
    Eigen::VectorXd F;
    std::vector<Eigen::VectorXd> beta_acc;  // one accumulated vector per pathway
    double intercept = 0.0;                 // accumulated C, includes the initial constant
    int t = 0;
    std::vector<double> loss_history;
    std::vector<int> selection_history;
};

/// Everything needed to score new samples for one selected pathway: the
/// training rows with nonzero accumulated coefficients and those
/// coefficients, plus the gene ids that locate the columns in new data.
struct SelectedPathway {
    std::string name;
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd sample_rows;  // k x p_m
    Eigen::VectorXd beta;         // k
};

/// Frozen trained model.
struct PKBModel {
    KernelSpec kernel;
    double intercept = 0.0;
    std::vector<std::string> pathway_names;  // all M, training order
    std::vector<double> weights;             // |beta^(m)|_2 per pathway, training order
    std::vector<SelectedPathway> selected;   // pathways with nonzero weight only

    // training metadata
    Penalty penalty = Penalty::l1;
    double lambda_used = 0.0;
    double nu = 0.0;
    std::uint64_t seed = 0;
    int t_used = 0;
    std::vector<double> loss_history;
    std::vector<int> selection_history;
};

struct Prediction {
    Eigen::VectorXd scores;
    Eigen::VectorXd labels;  // sign(score), zero mapped to +1
};

/// Inner cross-validation outcome for the stopping iteration.
struct CvSelection {
    int t_star = 1;                        // 1-based iteration count with minimal mean loss
    std::vector<double> mean_val_loss;     // averaged held-out loss, index t-1
    std::vector<std::vector<double>> fold_train_loss;  // per-fold training histories
};

/// Optimal constant model: log(N+ / N-).
double init_intercept(const LabelVector& y);

/// Fits every pathway's penalized base learner at the current derivatives and
/// returns the one with minimal regularized loss (ties to the lowest index).
BaseLearnerFit select_base_learner(const DerivativeState& deriv,
                                   const KernelSet& kernels,
                                   double lambda,
                                   Penalty penalty);

/// Data-driven penalty scale: 0.2 times the median over pathways of the
/// smallest lambda that zeroes the pathway's L1 solution at the constant
/// model, with a 1e-3 floor when the gradient vanishes. The same scale is
/// shared by both penalties.
double auto_lambda(const DerivativeState& deriv0, const KernelSet& kernels, Penalty penalty);

/// Runs the full boosting loop and freezes the result. A null log stream
/// silences per-iteration reporting.
PKBModel fit(const ExpressionDataset& data,
             const PathwayCollection& pathways,
             const LabelVector& y,
             const FitConfig& config,
             std::ostream* log = nullptr);

/// Index (1-based) of the smallest value, lowest index on ties.
int pick_t_star(const std::vector<double>& mean_val_loss);

/// Chooses the stopping iteration by stratified inner cross-validation:
/// trains on all-but-one fold while recording held-out loss at every
/// iteration, averages the curves, and picks the argmin.
CvSelection select_T_by_cv(const ExpressionDataset& data,
                           const PathwayCollection& pathways,
                           const LabelVector& y,
                           const FitConfig& config,
                           std::ostream* log = nullptr);

/// Scores new samples: sum of selected-pathway kernel expansions plus the
/// accumulated intercept. Genes are matched by id; all genes used by the
/// model must be present.
Prediction predict(const PKBModel& model, const ExpressionDataset& new_data);

/// (name, |beta^(m)|_2) for all pathways, sorted by descending weight with
/// ties broken by name.
std::vector<std::pair<std::string, double>> pathway_weights(const PKBModel& model);

}  // namespace pkb
