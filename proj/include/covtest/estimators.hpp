#pragma once

#include <span>
#include <vector>

#include "covtest/linalg.hpp"

namespace covtest {

/// Problem dimensions: observation dimension M, per-group sample counts and
/// the assumed spike rank K. Ratios use the actual finite sizes.
struct ModelDims {
    int M = 0;
    std::vector<int> N;
    int K = 0;

    int L() const noexcept { return static_cast<int>(N.size()); }
    long long total_samples() const noexcept;
    /// c_ell = M / N_ell for ell = 1..L (zero-based index ell - 1).
    double c_group(int group) const;
    /// Pooled ratio c = M / sum N_ell.
    double c_pooled() const;
    /// Ratio indexed the way the CLT blocks are: 0 is pooled, 1..L groups.
    double c_at(int ell) const { return ell == 0 ? c_pooled() : c_group(ell - 1); }
    /// Pooling weight N_ell / N.
    double weight(int group) const;

    /// Throws DomainError unless M >= 2, L >= 1, 1 <= K < M and every N_ell >= 1.
    /// A single group is accepted for degenerate checks; the test itself needs L >= 2.
    void validate() const;
};

/// Per-group and pooled sample covariances with their descending spectra.
struct SampleCovariances {
    std::vector<CMatrix> per_group;
    CMatrix pooled;
    std::vector<RVector> eigvals_per_group;
    RVector eigvals_pooled;
};

/// Spike and noise estimates. gamma_per_group is K x L; diff_vector has KL
/// entries gamma_k - gamma_{k,l} laid out k-major, l-minor (index k L + l).
struct SpikeEstimates {
    double sigma2_hat = 0.0;
    RVector gamma_pooled;
    RMatrix gamma_per_group;
    RVector diff_vector;
};

/// (1/N) sum y_i y_i^* over the columns of an M x N sample matrix. Only one
/// triangle is accumulated; the result is mirrored so it is exactly Hermitian.
CMatrix compute_scm(const CMatrix& samples);

/// Weighted sum of group SCMs with weights N_ell / N.
CMatrix pool_scms(std::span<const CMatrix> scms, const ModelDims& dims);

/// Assembles SampleCovariances from already computed group SCMs.
SampleCovariances make_sample_covariances(std::vector<CMatrix> scms, const ModelDims& dims);

/// SCMs and spectra from raw group samples (M x N_ell each).
SampleCovariances sample_covariances_from_data(std::span<const CMatrix> groups,
                                               const ModelDims& dims);

/// Pooled tail average of the M - K smallest group eigenvalues.
double noise_variance_hat(const SampleCovariances& covs, const ModelDims& dims);

/// Noise variance, pooled and per-group spike estimates and their differences.
SpikeEstimates spike_estimates(const SampleCovariances& covs, const ModelDims& dims);

/// Per-group rank estimates: number of eigenvalues above the bulk edge
/// sigma2 (1 + sqrt(c_ell))^2 plus margin.
std::vector<int> rank_estimate(const SampleCovariances& covs, double sigma2,
                               const ModelDims& dims, double margin);

/// Share of the trace carried by the k largest eigenvalues, estimated as the
/// ratio of means over a collection of descending spectra (one per patch).
double energy_ratio(std::span<const RVector> spectra, int k);

/// Same ratio for the first group of a single SampleCovariances.
double energy_ratio(const SampleCovariances& covs, int k);

}  // namespace covtest
