#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

namespace pkb {

/// Expression matrix with samples as rows and genes as columns.
/// Immutable after construction; safe to share across threads.
struct ExpressionDataset {
    Eigen::MatrixXd values;               // N x p
    std::vector<std::string> gene_ids;    // p, unique
    std::vector<std::string> sample_ids;  // N, unique

    Eigen::Index n_samples() const { return values.rows(); }
    Eigen::Index n_genes() const { return values.cols(); }

    /// Column index of a gene id, or -1 if absent.
    Eigen::Index gene_index(const std::string& id) const;

    /// Checks finiteness and id uniqueness; throws InvalidInput on violation.
    /// Prediction inputs may be empty, so N >= 2 is only required when
    /// `for_training` is set.
    void validate(bool for_training = false) const;
};

/// A named group of gene column indices.
struct Pathway {
    std::string name;
    std::vector<Eigen::Index> gene_indices;  // unique, each in [0, p)

    std::size_t size() const { return gene_indices.size(); }
};

/// Ordered list of pathways over one dataset's gene columns.
struct PathwayCollection {
    std::vector<Pathway> pathways;

    std::size_t size() const { return pathways.size(); }
    const Pathway& operator[](std::size_t m) const { return pathways[m]; }

    /// Throws InvalidInput unless names are unique and every pathway is a
    /// non-empty set of distinct valid column indices.
    void validate(Eigen::Index n_genes) const;
};

/// Class labels, one per sample, each exactly +1 or -1.
struct LabelVector {
    Eigen::VectorXd y;

    Eigen::Index size() const { return y.size(); }

    Eigen::Index positive_count() const;
    Eigen::Index negative_count() const;

    /// Throws InvalidInput unless all entries are +/-1 and both classes occur.
    void validate() const;
};

/// Pathway-m sub-matrix of the expression values (all samples, p_m columns).
Eigen::MatrixXd pathway_slice(const Eigen::MatrixXd& values, const Pathway& pathway);

/// Row-subset of a dataset (gene columns unchanged), preserving order.
ExpressionDataset subset_samples(const ExpressionDataset& dataset,
                                 const std::vector<Eigen::Index>& rows);

LabelVector subset_labels(const LabelVector& labels, const std::vector<Eigen::Index>& rows);

}  // namespace pkb
