#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "covtest/estimators.hpp"
#include "covtest/parallel.hpp"

namespace covtest {

// ---------------------------------------------------------------------------
// Wishart spike statistic and its calibration

/// Squared norm of the spike-difference vector.
double wishart_statistic(const SpikeEstimates& est);

/// Joint CLT covariance of the top-K eigenvalues of (R, R_1, ..., R_L).
/// Block-diagonal with K blocks of size L + 1; inside block k, index 0 is the
/// pooled matrix and 1..L the groups.
struct CltCovariance {
    int K = 0;
    int L = 0;
    RMatrix theta;

    /// Row/column of (k, ell) in theta, ell in 0..L.
    Eigen::Index index(int k, int ell) const { return static_cast<Eigen::Index>(k) * (L + 1) + ell; }
};

/// Theta from population spikes. Requires strictly decreasing gammas above
/// sigma2 max(sqrt c, sqrt c_1, ..., sqrt c_L); throws DomainError otherwise.
CltCovariance theta_matrix(std::span<const double> gammas, double sigma2, const ModelDims& dims);

/// Product formula for det(Theta) (same preconditions as theta_matrix).
double theta_determinant_closed_form(std::span<const double> gammas, double sigma2,
                                     const ModelDims& dims);

/// Block-diagonal Upsilon with blocks of size L + 1: diagonal
/// omega^2_{k,l} = c_l g^2 (g + s2)^2 / (g^2 - s2^2 c_l) and first row/column
/// xi_k = omega^2_{k,0}. Throws DegenerateSpike(k, l) when
/// g^2 - s2^2 c_l < 1e-6 s2^2.
RMatrix upsilon_matrix(std::span<const double> gammas, double sigma2, const ModelDims& dims);

/// Upsilon evaluated at the pooled spike estimates and sigma2_hat.
RMatrix upsilon_hat(const SpikeEstimates& est, const ModelDims& dims);

/// bdiag(H~, ..., H~) with K copies; row l of H~ is e_0 - e_{l+1}.
RMatrix contrast_matrix(int K, int L);

/// H Upsilon H^T, the asymptotic covariance of sqrt(M) times the difference vector.
RMatrix difference_covariance(const RMatrix& upsilon, int K, int L);

inline constexpr std::size_t kDefaultQuantileSamples = 200'000;
inline constexpr double kChi2ConditionCap = 1e12;

struct Calibration {
    RMatrix upsilon_hat;
    RMatrix h;
    std::size_t quantile_samples = 0;
    double alpha = 0.0;
    double epsilon_hat = 0.0;

    RMatrix difference_covariance() const { return h * upsilon_hat * h.transpose(); }
};

/// n draws of x^T xi x with x standard normal. Draws are generated in
/// fixed-size blocks, each with its own counter-derived generator, so the
/// result depends only on (xi, n, seed).
std::vector<double> sample_quadratic_form(const RMatrix& xi, std::size_t n, std::uint64_t seed,
                                          Execution exec = Execution::parallel);

/// Order statistic at 1-based index ceil((1 - alpha) n).
double upper_quantile(std::span<const double> samples, double alpha);

/// Thresholds (1/M) * quantile_{1-alpha}(x^T xi x) for each alpha, sharing
/// one set of draws. Throws DomainError for alpha outside (0, 1) or
/// n < 1000.
std::vector<double> calibrate_thresholds(const RMatrix& xi, int M, std::span<const double> alphas,
                                         std::size_t n_samples, std::uint64_t seed,
                                         Execution exec = Execution::parallel);

double calibrate_threshold(const RMatrix& xi, int M, double alpha, std::size_t n_samples,
                           std::uint64_t seed, Execution exec = Execution::parallel);

/// Full threshold calibration from spike estimates.
Calibration calibrate(const SpikeEstimates& est, const ModelDims& dims, double alpha,
                      std::size_t n_samples = kDefaultQuantileSamples, std::uint64_t seed = 0,
                      Execution exec = Execution::parallel);

/// Whitened statistic M ||(H Upsilon H^T)^{-1/2} diff||^2. Throws
/// IllConditioned if the condition number exceeds the cap or the matrix is
/// not positive definite.
double chi2_statistic(const SpikeEstimates& est, const Calibration& cal, const ModelDims& dims,
                      double condition_cap = kChi2ConditionCap);

/// Upper alpha quantile of the chi-square distribution with dof degrees of freedom.
double chi2_upper_quantile(int dof, double alpha);

/// Empirical threshold: order statistic at index ceil((1 - alpha) n) of
/// replicates under the null; reject when a value is strictly above it.
double empirical_threshold(std::span<const double> null_values, double alpha);

// ---------------------------------------------------------------------------
// Competitor statistics

struct FisherEdges {
    double nu_minus;
    double nu_plus;
};

/// Limiting spectrum edges of R_l^{-1} R_l' under the null.
FisherEdges fisher_edges(double c_l, double c_lp);

/// Sum over ordered pairs and k = 1..K of the excursions of the k-th largest
/// and k-th smallest Fisher eigenvalues beyond the null edges.
/// Requires M < min N_ell; throws SingularCovariance otherwise.
double fisher_statistic(const SampleCovariances& covs, const ModelDims& dims);

struct FisherParams {
    double nu_minus = 0.0;
    double nu_plus = 0.0;
    double beta_subspace = 0.0;
    /// Empty when the eigenvalue-change condition cannot be met for this delta.
    std::optional<double> beta_eigenvalue;
    double delta_min = 0.0;
};

/// Minimal-SNR thresholds of the Fisher test for L = 2, N_1 = N_2 (so
/// c_1 = c_2 = 2c). Requires 0 < c < 1/2.
FisherParams fisher_consistency_thresholds(double c, double delta);

/// Linear spectral statistic with phi = log:
/// sum_l (N_l / N) (1/M) sum_k log lambda_k(R_l^{-1} R).
double glr_statistic(const SampleCovariances& covs, const ModelDims& dims);

/// Low-rank GLR with the sign convention of its closed form (larger values
/// favour a change).
double glr_lr_statistic(const SampleCovariances& covs, const ModelDims& dims);

/// Closed-form almost-sure limit attached to the low-rank GLR:
/// sum_l (c / c_l) sum_k (psi(phi_c(g_k)/s2) - psi(phi_{c_l}(g_{k,l})/s2)),
/// psi(x) = x - log x. gamma_per_group is K x L. Note that glr_lr_statistic / N
/// converges to the negative of this value.
double glr_lr_limit(std::span<const double> gamma_pooled, const RMatrix& gamma_per_group,
                    double sigma2, const ModelDims& dims);

}  // namespace covtest
