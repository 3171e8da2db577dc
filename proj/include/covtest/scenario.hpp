#pragma once

#include <cstdint>
#include <string>

#include "covtest/estimators.hpp"
#include "covtest/rng.hpp"

namespace covtest {

enum class Hypothesis { h0, h1 };

/// Rank-K steering-vector model: group ell has
/// Gamma_ell = sum_k strengths(k, ell) a(angles(k, ell)) a(angles(k, ell))^*.
struct ScenarioPreset {
    std::string name;
    ModelDims dims;
    double sigma2 = 1.0;
    RMatrix angles;     // K x L, radians
    RMatrix strengths;  // K x L
    Hypothesis hypothesis = Hypothesis::h0;

    /// Shapes agree with dims, sigma2 > 0, strengths nonnegative and
    /// nonincreasing in k.
    void validate() const;
};

struct ScenarioPair {
    ScenarioPreset h0;
    ScenarioPreset h1;
};

/// Where the second spike sits.
///  - orthogonal: angle 2 pi / M, so a(0) and a(angle) are orthogonal for every M
///    and Gamma has eigenvalues exactly (gamma_1, gamma_2).
///  - offset: angle pi/8; orthogonal to a(0) only when M is a multiple of 16.
///  - collinear: both spikes at angle 0, Gamma has rank one.
enum class SpikeLayout { orthogonal, offset, collinear };

SpikeLayout parse_layout(const std::string& name);
std::string layout_name(SpikeLayout layout);

inline constexpr double kDefaultSigma2 = 0.5;

/// Type-I preset: gamma = (3, 1.5) in both groups, N_1 = N_2 = 2M; h1 equals h0.
ScenarioPair type1_scenario(int M, double sigma2 = kDefaultSigma2,
                            SpikeLayout layout = SpikeLayout::orthogonal);

/// Change of subspace: gamma = (2, 1), N_1 = N_2 = 2M. Angles (0, pi/8) in both
/// groups under h0; group 2 moves to (pi/2, pi/2 + pi/8) under h1.
ScenarioPair subspace_scenario(int M, double sigma2 = kDefaultSigma2);

/// Change of eigenvalues: gamma = (2, 1.5) in both groups under h0, group 2
/// becomes (5, 4) under h1; N_1 = N_2 = 4M.
ScenarioPair eigenvalue_scenario(int M, double sigma2 = kDefaultSigma2,
                                 SpikeLayout layout = SpikeLayout::orthogonal);

/// Lookup by name: "type1", "subspace" or "eigenvalue".
ScenarioPair scenario_by_name(const std::string& name, int M, double sigma2,
                              SpikeLayout layout = SpikeLayout::orthogonal);

/// a(theta) = (1, e^{i theta}, ..., e^{i (M-1) theta})^T / sqrt(M).
CVector steering_vector(double theta, int M);

/// Gamma_ell for a zero-based group index.
CMatrix build_gamma(const ScenarioPreset& preset, int group);

/// R_ell = Gamma_ell + sigma2 I.
CMatrix build_covariance(const ScenarioPreset& preset, int group);

/// Top-K eigenvalues of Gamma_ell (group >= 0) or of the pooled
/// sum_ell (N_ell / N) Gamma_ell (group = -1).
RVector population_spikes(const ScenarioPreset& preset, int group);

/// Draws columns y = R^{1/2} w with w circular standard complex normal, using
/// the Hermitian square root. When R is a multiple of the identity plus a
/// low-rank term the square root is applied in factored form.
class GaussianSampler {
public:
    /// Throws NumericError when R is not Hermitian positive semidefinite.
    explicit GaussianSampler(const CMatrix& r);

    Eigen::Index dimension() const noexcept { return dim_; }

    CMatrix sample(int n, Engine& engine, NormalSource& normal) const;

private:
    Eigen::Index dim_ = 0;
    double floor_sqrt_ = 0.0;  // sqrt of the repeated smallest eigenvalue
    CMatrix basis_;            // eigenvectors above the floor (low-rank form)
    RVector excess_;           // sqrt(lambda) - floor_sqrt on those vectors
    CMatrix full_root_;        // dense root when the low-rank form does not apply
    bool low_rank_ = false;
};

/// M x N matrix of i.i.d. CN(0, R) columns, deterministic in seed.
CMatrix sample_complex_gaussian(const CMatrix& r, int n, std::uint64_t seed);

}  // namespace covtest
