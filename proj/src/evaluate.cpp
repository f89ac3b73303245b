#include "pkb/evaluate.hpp"

#include <algorithm>

#include "pkb/error.hpp"
#include "pkb/random.hpp"

namespace pkb {

EvaluateResult evaluate_cv(const ExpressionDataset& data,
                           const PathwayCollection& pathways,
                           const LabelVector& y,
                           const FitConfig& config,
                           int outer_folds,
                           std::ostream* log) {
    config.validate();
    data.validate(/*for_training=*/true);
    pathways.validate(data.n_genes());
    y.validate();
    if (y.size() != data.n_samples()) throw InvalidInput("label count does not match samples");
    if (outer_folds < 2) throw InvalidInput("outer_folds must be >= 2");

    const std::vector<int> fold_of = stratified_folds(y.y, outer_folds, config.seed);

    EvaluateResult result;
    std::vector<double> weight_sums(pathways.size(), 0.0);
    double error_sum = 0.0;

    for (int fold = 0; fold < outer_folds; ++fold) {
        std::vector<Eigen::Index> train_rows, test_rows;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            (fold_of[static_cast<std::size_t>(i)] == fold ? test_rows : train_rows).push_back(i);
        }
        const ExpressionDataset train_data = subset_samples(data, train_rows);
        const LabelVector train_y = subset_labels(y, train_rows);
        const ExpressionDataset test_data = subset_samples(data, test_rows);
        const LabelVector test_y = subset_labels(y, test_rows);

        FitConfig fold_config = config;
        fold_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(fold) + 1);

        if (log != nullptr) *log << "outer fold " << (fold + 1) << ": selecting T*\n";
        const CvSelection scan = select_T_by_cv(train_data, pathways, train_y, fold_config, log);

        FitConfig refit_config = fold_config;
        refit_config.max_iters = scan.t_star;
        const PKBModel model = fit(train_data, pathways, train_y, refit_config, nullptr);

        const Prediction pred = predict(model, test_data);
        Eigen::Index wrong = 0;
        for (Eigen::Index i = 0; i < test_y.size(); ++i) {
            if (pred.labels[i] != test_y.y[i]) ++wrong;
        }

        OuterFoldResult fr;
        fr.fold = fold + 1;
        fr.test_error = static_cast<double>(wrong) / static_cast<double>(test_y.size());
        fr.t_star = scan.t_star;
        fr.lambda_used = model.lambda_used;
        fr.weights = model.weights;
        fr.refit_loss_history = model.loss_history;
        fr.scan_loss_histories = scan.fold_train_loss;

        error_sum += fr.test_error;
        for (std::size_t m = 0; m < pathways.size(); ++m) weight_sums[m] += model.weights[m];
        if (log != nullptr) {
            *log << "outer fold " << (fold + 1) << " T* " << fr.t_star << " lambda "
                 << fr.lambda_used << " test error " << fr.test_error << '\n';
        }
        result.folds.push_back(std::move(fr));
    }

    result.mean_error = error_sum / static_cast<double>(outer_folds);
    for (std::size_t m = 0; m < pathways.size(); ++m) {
        result.mean_weights.emplace_back(pathways[m].name,
                                         weight_sums[m] / static_cast<double>(outer_folds));
    }
    std::stable_sort(result.mean_weights.begin(), result.mean_weights.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    return result;
}

SweepResult evaluate_lambda_sweep(const ExpressionDataset& data,
                                  const PathwayCollection& pathways,
                                  const LabelVector& y,
                                  const FitConfig& config,
                                  int outer_folds,
                                  std::ostream* log) {
    if (config.lambda_grid_factors.empty()) throw InvalidInput("empty lambda grid");
    SweepResult sweep;
    sweep.factors = config.lambda_grid_factors;
    for (double factor : sweep.factors) {
        FitConfig run = config;
        run.lambda_factor = config.lambda_factor * factor;
        if (log != nullptr) *log << "lambda sweep factor " << factor << '\n';
        sweep.results.push_back(evaluate_cv(data, pathways, y, run, outer_folds, log));
    }
    for (std::size_t i = 1; i < sweep.results.size(); ++i) {
        if (sweep.results[i].mean_error < sweep.results[sweep.best_index].mean_error) {
            sweep.best_index = i;
        }
    }
    return sweep;
}

}  // namespace pkb
