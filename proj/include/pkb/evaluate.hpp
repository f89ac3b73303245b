#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pkb/boosting.hpp"
#include "pkb/types.hpp"

namespace pkb {

struct OuterFoldResult {
    int fold = 0;  // 1-based
    double test_error = 0.0;
    int t_star = 0;
    double lambda_used = 0.0;
    std::vector<double> weights;  // refit model weights, training pathway order
    std::vector<double> refit_loss_history;
    std::vector<std::vector<double>> scan_loss_histories;  // inner-fold training histories
};

struct EvaluateResult {
    std::vector<OuterFoldResult> folds;
    double mean_error = 0.0;
    // Cross-fold average weight per pathway, sorted descending (ties by name).
    std::vector<std::pair<std::string, double>> mean_weights;
};

/// Outer k-fold protocol: each fold serves once as the test set while the
/// rest is trained with the stopping iteration chosen by inner
/// cross-validation, then refit in full and scored on the held-out fold.
EvaluateResult evaluate_cv(const ExpressionDataset& data,
                           const PathwayCollection& pathways,
                           const LabelVector& y,
                           const FitConfig& config,
                           int outer_folds = 3,
                           std::ostream* log = nullptr);

/// Runs evaluate_cv once per lambda grid factor and returns the results in
/// factor order plus the index of the best (lowest mean error).
struct SweepResult {
    std::vector<double> factors;
    std::vector<EvaluateResult> results;
    std::size_t best_index = 0;
};

SweepResult evaluate_lambda_sweep(const ExpressionDataset& data,
                                  const PathwayCollection& pathways,
                                  const LabelVector& y,
                                  const FitConfig& config,
                                  int outer_folds = 3,
                                  std::ostream* log = nullptr);

}  // namespace pkb
