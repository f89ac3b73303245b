#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "pkb/boosting.hpp"
#include "pkb/error.hpp"
#include "pkb/evaluate.hpp"
#include "pkb/io.hpp"
#include "pkb/model_io.hpp"
#include "pkb/simulation.hpp"

namespace {

namespace fs = std::filesystem;

struct FitFlags {
    std::string expression;
    std::string pathways;
    std::string labels;
    std::string penalty = "l1";
    std::string kernel = "rbf";
    std::string lambda = "auto";
    double lambda_factor = 1.0;
    double nu = 0.05;
    int max_iters = 0;  // 0 = not set: choose T by inner cross-validation
    int inner_folds = 3;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

void add_fit_flags(CLI::App& cmd, FitFlags& flags) {
    cmd.add_option("--expression", flags.expression, "Expression CSV (samples x genes)")
        ->required();
    cmd.add_option("--pathways", flags.pathways, "GMT pathway file")->required();
    cmd.add_option("--labels", flags.labels, "Two-column sample_id,label CSV")->required();
    cmd.add_option("--penalty", flags.penalty, "Penalty: l1 or l2")
        ->check(CLI::IsMember({"l1", "l2"}));
    cmd.add_option("--kernel", flags.kernel, "Kernel: rbf, poly3, or linear")
        ->check(CLI::IsMember({"rbf", "poly3", "linear"}));
    cmd.add_option("--lambda", flags.lambda, "Penalty strength, or 'auto'");
    cmd.add_option("--lambda-factor", flags.lambda_factor, "Multiplier applied to lambda");
    cmd.add_option("--nu", flags.nu, "Learning rate in (0,1]");
    cmd.add_option("--max-iters", flags.max_iters,
                   "Boosting iterations; when omitted, T* is chosen by inner CV (scan up to 500)");
    cmd.add_option("--inner-folds", flags.inner_folds, "Inner CV folds for choosing T*");
    cmd.add_option("--seed", flags.seed, "RNG seed for fold assignment");
    cmd.add_option("--out-dir", flags.out_dir, "Directory for reports");
    cmd.set_config("--config");
}

pkb::FitConfig make_config(const FitFlags& flags) {
    pkb::FitConfig config;
    config.penalty = pkb::penalty_from_string(flags.penalty);
    if (flags.lambda != "auto") {
        try {
            std::size_t used = 0;
            const double value = std::stod(flags.lambda, &used);
            if (used != flags.lambda.size()) throw std::invalid_argument(flags.lambda);
            config.lambda = value;
        } catch (const std::exception&) {
            throw pkb::InvalidInput("--lambda must be a positive number or 'auto'");
        }
    }
    config.lambda_factor = flags.lambda_factor;
    config.nu = flags.nu;
    config.max_iters = flags.max_iters > 0 ? flags.max_iters : 500;
    config.cv_folds_inner = flags.inner_folds;
    config.kernel.kind = pkb::kernel_kind_from_string(flags.kernel);
    config.seed = flags.seed;
    config.validate();
    return config;
}

struct LoadedInputs {
    pkb::ExpressionDataset data;
    pkb::PathwayCollection pathways;
    pkb::LabelVector labels;
};

LoadedInputs load_inputs(const FitFlags& flags) {
    LoadedInputs in;
    in.data = pkb::load_expression_csv(flags.expression);
    std::size_t dropped = 0;
    in.pathways = pkb::load_gmt(flags.pathways, in.data, &dropped);
    if (dropped > 0) {
        std::clog << "warning: dropped " << dropped << " pathway(s) with no dataset genes\n";
    }
    in.labels = pkb::load_labels(flags.labels, in.data);
    return in;
}

void write_weight_report(const std::vector<std::pair<std::string, double>>& weights,
                         const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw pkb::Error("cannot write report: " + path.string());
    out << "pathway,weight\n";
    for (const auto& [name, weight] : weights) {
        out << name << ',' << pkb::format_double(weight) << '\n';
    }
}

int cmd_fit(const FitFlags& flags, const std::string& model_out) {
    const LoadedInputs in = load_inputs(flags);
    pkb::FitConfig config = make_config(flags);

    if (flags.max_iters <= 0) {
        const pkb::CvSelection scan =
            pkb::select_T_by_cv(in.data, in.pathways, in.labels, config, &std::clog);
        config.max_iters = scan.t_star;
    }
    const pkb::PKBModel model = pkb::fit(in.data, in.pathways, in.labels, config, &std::clog);

    fs::create_directories(flags.out_dir);
    pkb::save_model(model, model_out);
    write_weight_report(pkb::pathway_weights(model), fs::path(flags.out_dir) / "pathway_weights.csv");
    std::clog << "model written to " << model_out << " (" << model.t_used << " iterations)\n";
    return 0;
}

int cmd_predict(const std::string& expression,
                const std::string& model_in,
                const std::string& out_dir) {
    const pkb::PKBModel model = pkb::load_model(model_in);
    const pkb::ExpressionDataset data =
        pkb::load_expression_csv(expression, /*samples_as_rows=*/true, /*allow_empty=*/true);
    const pkb::Prediction pred = pkb::predict(model, data);

    fs::create_directories(out_dir);
    const fs::path out_path = fs::path(out_dir) / "predictions.csv";
    std::ofstream out(out_path);
    if (!out) throw pkb::Error("cannot write predictions: " + out_path.string());
    out << "sample_id,score,label\n";
    for (Eigen::Index i = 0; i < pred.scores.size(); ++i) {
        out << data.sample_ids[static_cast<std::size_t>(i)] << ','
            << pkb::format_double(pred.scores[i]) << ',' << (pred.labels[i] > 0 ? "1" : "-1")
            << '\n';
    }
    std::clog << "predictions written to " << out_path.string() << '\n';
    return 0;
}

int cmd_simulate(const pkb::SimSpec& spec, const std::string& out_dir) {
    const pkb::SimulatedData sim = pkb::generate(spec);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    pkb::write_expression_csv(sim.data, dir / "expression.csv");
    pkb::write_gmt(sim.pathways, sim.data, dir / "pathways.gmt");
    pkb::write_labels(sim.labels, sim.data, dir / "labels.csv");

    nlohmann::json truth;
    truth["model"] = spec.model_id;
    truth["seed"] = spec.seed;
    truth["outcome_rule"] = pkb::to_string(spec.outcome);
    truth["relevant_pathways"] = nlohmann::json::array();
    for (int m : sim.relevant_pathways) {
        truth["relevant_pathways"].push_back(sim.pathways[static_cast<std::size_t>(m)].name);
    }
    std::ofstream truth_out(dir / "ground_truth.json");
    if (!truth_out) throw pkb::Error("cannot write ground truth JSON");
    truth_out << truth.dump(2) << '\n';

    std::clog << "simulated " << sim.data.n_samples() << " samples, " << sim.pathways.size()
              << " pathways into " << out_dir << '\n';
    return 0;
}

int cmd_evaluate(const FitFlags& flags, int outer_folds) {
    const LoadedInputs in = load_inputs(flags);
    const pkb::FitConfig config = make_config(flags);

    const pkb::EvaluateResult result =
        pkb::evaluate_cv(in.data, in.pathways, in.labels, config, outer_folds, &std::clog);

    fs::create_directories(flags.out_dir);
    const fs::path dir(flags.out_dir);
    {
        std::ofstream out(dir / "evaluation.csv");
        if (!out) throw pkb::Error("cannot write evaluation report");
        out << "fold,t_star,lambda,test_error\n";
        for (const auto& fr : result.folds) {
            out << fr.fold << ',' << fr.t_star << ',' << pkb::format_double(fr.lambda_used) << ','
                << pkb::format_double(fr.test_error) << '\n';
        }
        out << "mean,,," << pkb::format_double(result.mean_error) << '\n';
    }
    write_weight_report(result.mean_weights, dir / "mean_pathway_weights.csv");
    std::clog << "mean test error " << result.mean_error << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathway-based kernel boosting for binary classification"};
    app.require_subcommand(1);

    FitFlags fit_flags;
    std::string model_out;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Train a model and write it to disk");
    add_fit_flags(*fit_cmd, fit_flags);
    fit_cmd->add_option("--model-out", model_out, "Output model file (JSON)")->required();

    std::string pred_expression, model_in, pred_out_dir = ".";
    CLI::App* predict_cmd = app.add_subcommand("predict", "Score new samples with a saved model");
    predict_cmd->add_option("--expression", pred_expression, "Expression CSV")->required();
    predict_cmd->add_option("--model-in", model_in, "Trained model file")->required();
    predict_cmd->add_option("--out-dir", pred_out_dir, "Directory for predictions.csv");
    predict_cmd->set_config("--config");

    pkb::SimSpec sim_spec;
    std::string sim_outcome = "bernoulli", sim_out_dir = ".";
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
    sim_cmd->add_option("--sim-model", sim_spec.model_id, "Truth model: 1, 2, or 3")->required();
    sim_cmd->add_option("--sim-pathways", sim_spec.m_total, "Total number of pathways");
    sim_cmd->add_option("--sim-pathway-size", sim_spec.pathway_size, "Genes per pathway");
    sim_cmd->add_option("--sim-n", sim_spec.n_samples, "Number of samples");
    sim_cmd->add_option("--outcome-rule", sim_outcome, "bernoulli or sign")
        ->check(CLI::IsMember({"bernoulli", "sign"}));
    sim_cmd->add_option("--seed", sim_spec.seed, "RNG seed");
    sim_cmd->add_option("--out-dir", sim_out_dir, "Output directory");
    sim_cmd->set_config("--config");

    FitFlags eval_flags;
    int outer_folds = 3;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "Outer cross-validated test error and mean weights");
    add_fit_flags(*eval_cmd, eval_flags);
    eval_cmd->add_option("--outer-folds", outer_folds, "Outer CV folds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_flags, model_out);
        if (predict_cmd->parsed()) return cmd_predict(pred_expression, model_in, pred_out_dir);
        if (sim_cmd->parsed()) {
            sim_spec.outcome = pkb::outcome_rule_from_string(sim_outcome);
            return cmd_simulate(sim_spec, sim_out_dir);
        }
        if (eval_cmd->parsed()) return cmd_evaluate(eval_flags, outer_folds);
    } catch (const std::exception& e) {
        std::cerr << "pkb: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
