#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "pkb/types.hpp"

namespace pkb {

enum class KernelKind { rbf, polynomial, linear };

KernelKind kernel_kind_from_string(const std::string& name);
std::string to_string(KernelKind kind);

/// Kernel family plus its fixed per-pathway bandwidth rule: every pathway m
/// uses gamma_m = 1 / p_m, i.e. the inverse of its gene count.
struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    int degree = 3;            // polynomial only
    bool poly_scaled = true;   // divide the inner product by p_m (polynomial only)
};

/// Per-pathway kernel matrices over the training samples, aligned with the
/// pathway collection order. Immutable after construction.
struct KernelSet {
    std::vector<Eigen::MatrixXd> matrices;  // M symmetric PSD N x N matrices
    std::vector<std::string> pathway_names;
    KernelSpec spec;

    std::size_t size() const { return matrices.size(); }
};

/// K(u, v) for one pathway of size p_m.
///   rbf:        exp(-|u - v|^2 / p_m)
///   polynomial: (u.v / p_m + 1)^degree   (u.v unscaled when !poly_scaled)
///   linear:     u.v / p_m
double kernel_value(const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v,
                    const KernelSpec& spec,
                    Eigen::Index p_m);

/// Builds all M training kernel matrices. The upper triangle is computed and
/// mirrored, so symmetry is exact; the rbf diagonal is exactly 1.
KernelSet build_kernel_set(const ExpressionDataset& data,
                           const PathwayCollection& pathways,
                           const KernelSpec& spec);

/// Kernel block between training rows and new rows for one pathway:
/// entry (i, j) = K(train_i, new_j). Column counts must match.
Eigen::MatrixXd build_cross_kernel(const Eigen::MatrixXd& train_slice,
                                   const Eigen::MatrixXd& new_slice,
                                   const KernelSpec& spec,
                                   Eigen::Index p_m);

}  // namespace pkb
