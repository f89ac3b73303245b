#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pkb/error.hpp"

namespace pkb {

// All randomness in the library flows through these helpers so that a given
// seed produces the same stream regardless of standard-library vendor
// (std::normal_distribution and std::shuffle are implementation-defined).

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller.
inline double standard_normal(std::mt19937_64& rng) {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// In-place Fisher-Yates shuffle.
template <typename T>
void fisher_yates(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

/// Stratified k-fold assignment: fold index per sample, classes distributed
/// round-robin after a seeded per-class shuffle. Requires every class to
/// contribute at least one sample to each fold.
inline std::vector<int> stratified_folds(const Eigen::VectorXd& y, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw InvalidInput("need at least 2 folds");
    std::vector<std::size_t> pos, neg;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        (y[i] > 0 ? pos : neg).push_back(static_cast<std::size_t>(i));
    }
    if (pos.size() < static_cast<std::size_t>(n_folds) ||
        neg.size() < static_cast<std::size_t>(n_folds)) {
        throw InvalidInput("stratification failure: a class has fewer samples than folds");
    }
    std::mt19937_64 rng(seed);
    fisher_yates(pos, rng);
    fisher_yates(neg, rng);
    std::vector<int> fold(static_cast<std::size_t>(y.size()), 0);
    for (std::size_t k = 0; k < pos.size(); ++k) fold[pos[k]] = static_cast<int>(k % n_folds);
    for (std::size_t k = 0; k < neg.size(); ++k) fold[neg[k]] = static_cast<int>(k % n_folds);
    return fold;
}

/// SplitMix64 step; used to derive independent sub-seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace pkb
