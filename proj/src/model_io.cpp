#include "pkb/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "pkb/error.hpp"

namespace pkb {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index n_cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), n_cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const json& row = rows[i];
        if (static_cast<Eigen::Index>(row.size()) != n_cols) {
            throw ParseError("model file: ragged sample-row matrix");
        }
        for (Eigen::Index j = 0; j < n_cols; ++j) {
            m(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
        }
    }
    return m;
}

}  // namespace

void save_model(const PKBModel& model, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "pkb-model";
    doc["version"] = kFormatVersion;
    doc["kernel"] = {{"kind", to_string(model.kernel.kind)},
                     {"degree", model.kernel.degree},
                     {"poly_scaled", model.kernel.poly_scaled}};
    doc["intercept"] = model.intercept;
    doc["pathway_names"] = model.pathway_names;
    doc["pathway_weights"] = model.weights;

    json selected = json::array();
    for (const auto& sel : model.selected) {
        json entry;
        entry["name"] = sel.name;
        entry["gene_ids"] = sel.gene_ids;
        entry["beta"] = vector_to_json(sel.beta);
        entry["sample_rows"] = matrix_to_json(sel.sample_rows);
        selected.push_back(std::move(entry));
    }
    doc["selected"] = std::move(selected);

    doc["training"] = {{"penalty", to_string(model.penalty)},
                       {"lambda", model.lambda_used},
                       {"nu", model.nu},
                       {"seed", model.seed},
                       {"t_used", model.t_used},
                       {"loss_history", model.loss_history},
                       {"selection_history", model.selection_history}};

    std::ofstream out(path);
    if (!out) throw ParseError("cannot write model file: " + path.string());
    out << doc.dump(2) << '\n';
}

PKBModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("model file " + path.string() + ": " + e.what());
    }

    try {
        if (doc.at("format") != "pkb-model") {
            throw ParseError("model file " + path.string() + ": unrecognized format tag");
        }
        if (doc.at("version").get<int>() != kFormatVersion) {
            throw ParseError("model file " + path.string() + ": unsupported version");
        }

        PKBModel model;
        const json& kernel = doc.at("kernel");
        model.kernel.kind = kernel_kind_from_string(kernel.at("kind").get<std::string>());
        model.kernel.degree = kernel.at("degree").get<int>();
        model.kernel.poly_scaled = kernel.at("poly_scaled").get<bool>();
        model.intercept = doc.at("intercept").get<double>();
        model.pathway_names = doc.at("pathway_names").get<std::vector<std::string>>();
        model.weights = doc.at("pathway_weights").get<std::vector<double>>();

        for (const json& entry : doc.at("selected")) {
            SelectedPathway sel;
            sel.name = entry.at("name").get<std::string>();
            sel.gene_ids = entry.at("gene_ids").get<std::vector<std::string>>();
            sel.beta = vector_from_json(entry.at("beta"));
            sel.sample_rows = matrix_from_json(entry.at("sample_rows"),
                                               static_cast<Eigen::Index>(sel.gene_ids.size()));
            if (sel.sample_rows.rows() != sel.beta.size()) {
                throw ParseError("model file: beta/sample_rows size mismatch");
            }
            model.selected.push_back(std::move(sel));
        }

        const json& training = doc.at("training");
        model.penalty = penalty_from_string(training.at("penalty").get<std::string>());
        model.lambda_used = training.at("lambda").get<double>();
        model.nu = training.at("nu").get<double>();
        model.seed = training.at("seed").get<std::uint64_t>();
        model.t_used = training.at("t_used").get<int>();
        model.loss_history = training.at("loss_history").get<std::vector<double>>();
        model.selection_history = training.at("selection_history").get<std::vector<int>>();
        return model;
    } catch (const json::exception& e) {
        throw ParseError("model file " + path.string() + ": " + e.what());
    }
}

}  // namespace pkb
