#include "pkb/kernels.hpp"

#include <cmath>

#include "pkb/error.hpp"
#include "pkb/parallel.hpp"

namespace pkb {

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "rbf") return KernelKind::rbf;
    if (name == "poly3" || name == "polynomial" || name == "poly") return KernelKind::polynomial;
    if (name == "linear") return KernelKind::linear;
    throw InvalidInput("unknown kernel '" + name + "' (expected rbf, poly3, or linear)");
}

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::rbf: return "rbf";
        case KernelKind::polynomial: return "polynomial";
        case KernelKind::linear: return "linear";
    }
    return "?";
}

namespace {

template <typename DerivedU, typename DerivedV>
double kernel_value_impl(const Eigen::MatrixBase<DerivedU>& u,
                         const Eigen::MatrixBase<DerivedV>& v,
                         const KernelSpec& spec,
                         double inv_pm) {
    switch (spec.kind) {
        case KernelKind::rbf:
            return std::exp(-(u - v).squaredNorm() * inv_pm);
        case KernelKind::polynomial: {
            const double dot = u.dot(v) * (spec.poly_scaled ? inv_pm : 1.0);
            double out = 1.0;
            for (int d = 0; d < spec.degree; ++d) out *= dot + 1.0;
            return out;
        }
        case KernelKind::linear:
            return u.dot(v) * inv_pm;
    }
    return 0.0;
}

}  // namespace

double kernel_value(const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v,
                    const KernelSpec& spec,
                    Eigen::Index p_m) {
    if (u.size() != v.size()) throw InvalidInput("kernel_value: vector length mismatch");
    if (p_m < 1) throw InvalidInput("kernel_value: pathway size must be >= 1");
    if (spec.degree < 1) throw InvalidInput("kernel_value: polynomial degree must be >= 1");
    return kernel_value_impl(u, v, spec, 1.0 / static_cast<double>(p_m));
}

KernelSet build_kernel_set(const ExpressionDataset& data,
                           const PathwayCollection& pathways,
                           const KernelSpec& spec) {
    if (spec.degree < 1) throw InvalidInput("polynomial degree must be >= 1");
    const Eigen::Index n = data.n_samples();

    KernelSet set;
    set.spec = spec;
    set.matrices.resize(pathways.size());
    set.pathway_names.resize(pathways.size());

    parallel_for(pathways.size(), [&](std::size_t m) {
        const Pathway& pw = pathways[m];
        const Eigen::MatrixXd slice = pathway_slice(data.values, pw);
        const double inv_pm = 1.0 / static_cast<double>(pw.size());

        Eigen::MatrixXd k(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            k(i, i) = (spec.kind == KernelKind::rbf)
                          ? 1.0
                          : kernel_value_impl(slice.row(i), slice.row(i), spec, inv_pm);
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double v = kernel_value_impl(slice.row(i), slice.row(j), spec, inv_pm);
                k(i, j) = v;
                k(j, i) = v;
            }
        }
        set.matrices[m] = std::move(k);
        set.pathway_names[m] = pw.name;
    });
    return set;
}

Eigen::MatrixXd build_cross_kernel(const Eigen::MatrixXd& train_slice,
                                   const Eigen::MatrixXd& new_slice,
                                   const KernelSpec& spec,
                                   Eigen::Index p_m) {
    if (train_slice.cols() != new_slice.cols()) {
        throw InvalidInput("build_cross_kernel: column counts differ");
    }
    if (p_m < 1) throw InvalidInput("build_cross_kernel: pathway size must be >= 1");
    const double inv_pm = 1.0 / static_cast<double>(p_m);

    Eigen::MatrixXd k(train_slice.rows(), new_slice.rows());
    for (Eigen::Index j = 0; j < new_slice.rows(); ++j) {
        for (Eigen::Index i = 0; i < train_slice.rows(); ++i) {
            k(i, j) = kernel_value_impl(train_slice.row(i), new_slice.row(j), spec, inv_pm);
        }
    }
    return k;
}

}  // namespace pkb
