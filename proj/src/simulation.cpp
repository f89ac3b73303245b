#include "pkb/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pkb/error.hpp"
#include "pkb/random.hpp"

namespace pkb {

OutcomeRule outcome_rule_from_string(const std::string& name) {
    if (name == "bernoulli" || name == "bernoulli_logistic") return OutcomeRule::bernoulli_logistic;
    if (name == "sign" || name == "deterministic_sign") return OutcomeRule::deterministic_sign;
    throw InvalidInput("unknown outcome rule '" + name + "' (expected bernoulli or sign)");
}

std::string to_string(OutcomeRule rule) {
    return rule == OutcomeRule::bernoulli_logistic ? "bernoulli" : "sign";
}

void SimSpec::validate() const {
    if (model_id < 1 || model_id > 3) throw InvalidInput("model_id must be 1, 2, or 3");
    if (m_total < n_relevant()) {
        throw InvalidInput("m_total must be at least the relevant-pathway count (" +
                           std::to_string(n_relevant()) + ")");
    }
    if (pathway_size < (model_id == 3 ? 1 : 2)) {
        throw InvalidInput("pathway_size too small for this model");
    }
    if (n_samples < 2) throw InvalidInput("n_samples must be >= 2");
}

double true_log_odds(const Eigen::VectorXd& x, int model_id, int pathway_size) {
    const auto block = [&](int m) { return x.segment(m * pathway_size, pathway_size); };
    switch (model_id) {
        case 1:
            return 2.0 * block(0)[0] + 3.0 * block(0)[1] +
                   std::exp(0.8 * block(1)[0] + 0.8 * block(1)[1]) +
                   4.0 * block(2)[0] * block(2)[1];
        case 2:
            return 4.0 * std::sin(block(0)[0] + block(0)[1]) +
                   3.0 * std::abs(block(1)[0] - block(1)[1]) +
                   2.0 * block(2)[0] * block(2)[0] - 2.0 * block(2)[1] * block(2)[1];
        case 3: {
            double total = 0.0;
            for (int m = 0; m < 10; ++m) total += block(m).norm();
            return 2.0 * total;
        }
        default:
            throw InvalidInput("model_id must be 1, 2, or 3");
    }
}

SimulatedData generate(const SimSpec& spec) {
    spec.validate();
    const Eigen::Index n = spec.n_samples;
    const Eigen::Index p = static_cast<Eigen::Index>(spec.m_total) * spec.pathway_size;

    std::mt19937_64 rng(spec.seed);

    SimulatedData sim;
    sim.data.values.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) sim.data.values(i, j) = standard_normal(rng);
    }
    sim.data.gene_ids.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) sim.data.gene_ids.push_back("g" + std::to_string(j + 1));
    sim.data.sample_ids.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sim.data.sample_ids.push_back("s" + std::to_string(i + 1));

    for (int m = 0; m < spec.m_total; ++m) {
        Pathway pw;
        pw.name = "pw" + std::to_string(m + 1);
        for (int g = 0; g < spec.pathway_size; ++g) {
            pw.gene_indices.push_back(static_cast<Eigen::Index>(m) * spec.pathway_size + g);
        }
        sim.pathways.pathways.push_back(std::move(pw));
    }

    Eigen::VectorXd log_odds(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        log_odds[i] = true_log_odds(sim.data.values.row(i), spec.model_id, spec.pathway_size);
    }

    // Sample median; even counts average the two middle order statistics.
    std::vector<double> sorted(log_odds.data(), log_odds.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double median = (n % 2 == 1)
                              ? sorted[static_cast<std::size_t>(n / 2)]
                              : 0.5 * (sorted[static_cast<std::size_t>(n / 2 - 1)] +
                                       sorted[static_cast<std::size_t>(n / 2)]);
    const Eigen::VectorXd centered = log_odds.array() - median;

    sim.labels.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (spec.outcome == OutcomeRule::bernoulli_logistic) {
            const double p_pos = 1.0 / (1.0 + std::exp(-centered[i]));
            sim.labels.y[i] = uniform01(rng) < p_pos ? 1.0 : -1.0;
        } else {
            sim.labels.y[i] = centered[i] < 0.0 ? -1.0 : 1.0;
        }
    }

    for (int m = 0; m < spec.n_relevant(); ++m) sim.relevant_pathways.push_back(m);

    sim.data.validate(/*for_training=*/true);
    sim.pathways.validate(p);
    sim.labels.validate();
    return sim;
}

}  // namespace pkb
