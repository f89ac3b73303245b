#include "pkb/types.hpp"

#include <cmath>
#include <unordered_set>

#include "pkb/error.hpp"

namespace pkb {

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw InvalidInput(std::string("duplicate ") + what + ": '" + id + "'");
        }
    }
}

}  // namespace

Eigen::Index ExpressionDataset::gene_index(const std::string& id) const {
    for (std::size_t j = 0; j < gene_ids.size(); ++j) {
        if (gene_ids[j] == id) return static_cast<Eigen::Index>(j);
    }
    return -1;
}

void ExpressionDataset::validate(bool for_training) const {
    if (values.rows() != static_cast<Eigen::Index>(sample_ids.size())) {
        throw InvalidInput("sample id count does not match matrix rows");
    }
    if (values.cols() != static_cast<Eigen::Index>(gene_ids.size())) {
        throw InvalidInput("gene id count does not match matrix columns");
    }
    if (for_training && values.rows() < 2) {
        throw InvalidInput("training requires at least 2 samples");
    }
    if (for_training && values.cols() < 1) {
        throw InvalidInput("training requires at least 1 gene");
    }
    if (!values.allFinite()) {
        throw InvalidInput("expression matrix contains NaN or Inf");
    }
    require_unique(gene_ids, "gene id");
    require_unique(sample_ids, "sample id");
}

void PathwayCollection::validate(Eigen::Index n_genes) const {
    std::unordered_set<std::string> names;
    for (const auto& pw : pathways) {
        if (!names.insert(pw.name).second) {
            throw InvalidInput("duplicate pathway name: '" + pw.name + "'");
        }
        if (pw.gene_indices.empty()) {
            throw InvalidInput("pathway '" + pw.name + "' is empty");
        }
        std::unordered_set<Eigen::Index> idx;
        for (Eigen::Index g : pw.gene_indices) {
            if (g < 0 || g >= n_genes) {
                throw InvalidInput("pathway '" + pw.name + "' has gene index out of range");
            }
            if (!idx.insert(g).second) {
                throw InvalidInput("pathway '" + pw.name + "' repeats a gene index");
            }
        }
    }
}

Eigen::Index LabelVector::positive_count() const {
    return (y.array() > 0).count();
}

Eigen::Index LabelVector::negative_count() const {
    return (y.array() < 0).count();
}

void LabelVector::validate() const {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 1.0 && y[i] != -1.0) {
            throw InvalidInput("label at position " + std::to_string(i) + " is not +1/-1");
        }
    }
    if (positive_count() == 0 || negative_count() == 0) {
        throw InvalidInput("labels contain a single class; need both +1 and -1");
    }
}

Eigen::MatrixXd pathway_slice(const Eigen::MatrixXd& values, const Pathway& pathway) {
    Eigen::MatrixXd slice(values.rows(), static_cast<Eigen::Index>(pathway.size()));
    for (std::size_t k = 0; k < pathway.gene_indices.size(); ++k) {
        slice.col(static_cast<Eigen::Index>(k)) = values.col(pathway.gene_indices[k]);
    }
    return slice;
}

ExpressionDataset subset_samples(const ExpressionDataset& dataset,
                                 const std::vector<Eigen::Index>& rows) {
    ExpressionDataset out;
    out.gene_ids = dataset.gene_ids;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), dataset.n_genes());
    out.sample_ids.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.values.row(static_cast<Eigen::Index>(k)) = dataset.values.row(rows[k]);
        out.sample_ids.push_back(dataset.sample_ids[static_cast<std::size_t>(rows[k])]);
    }
    return out;
}

LabelVector subset_labels(const LabelVector& labels, const std::vector<Eigen::Index>& rows) {
    LabelVector out;
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.y[static_cast<Eigen::Index>(k)] = labels.y[rows[k]];
    }
    return out;
}

}  // namespace pkb
