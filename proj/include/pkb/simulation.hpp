#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pkb/types.hpp"

namespace pkb {

enum class OutcomeRule { bernoulli_logistic, deterministic_sign };

OutcomeRule outcome_rule_from_string(const std::string& name);
std::string to_string(OutcomeRule rule);

/// Synthetic-data recipe: m_total disjoint pathways of pathway_size standard
/// normal genes each, class labels driven by one of three log-odds models.
struct SimSpec {
    int model_id = 1;
    int m_total = 50;
    int pathway_size = 5;
    int n_samples = 900;
    std::uint64_t seed = 0;
    OutcomeRule outcome = OutcomeRule::bernoulli_logistic;

    int n_relevant() const { return model_id == 3 ? 10 : 3; }
    void validate() const;
};

struct SimulatedData {
    ExpressionDataset data;
    PathwayCollection pathways;
    LabelVector labels;
    std::vector<int> relevant_pathways;  // 0-based pathway indices
};

/// True log odds of one sample under the given model. The sample vector is
/// laid out as consecutive pathway blocks of pathway_size genes.
///   model 1: 2 x1(1) + 3 x2(1) + exp(0.8 x1(2) + 0.8 x2(2)) + 4 x1(3) x2(3)
///   model 2: 4 sin(x1(1) + x2(1)) + 3 |x1(2) - x2(2)| + 2 x1(3)^2 - 2 x2(3)^2
///   model 3: 2 sum_{m=1..10} |x(m)|_2
double true_log_odds(const Eigen::VectorXd& x, int model_id, int pathway_size);

/// Draws the expression matrix, evaluates the model's log odds per sample,
/// median-centers them, and converts to labels per the outcome rule.
/// Deterministic given the seed.
SimulatedData generate(const SimSpec& spec);

}  // namespace pkb
