#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "covtest/parallel.hpp"
#include "covtest/scenario.hpp"
#include "covtest/statistics.hpp"

namespace covtest {

enum class StatisticKind { wishart, glr, glr_lr, fisher };

std::string statistic_name(StatisticKind kind);
StatisticKind parse_statistic(const std::string& name);

/// True for statistics that invert a group SCM (need N_ell > M).
bool needs_inversion(StatisticKind kind);

/// Value of one statistic on a set of sample covariances.
double evaluate_statistic(StatisticKind kind, const SampleCovariances& covs, const ModelDims& dims);

/// One row of a results table.
struct RateEntry {
    std::string statistic;
    int M = 0;
    double alpha = 0.0;
    double value = 0.0;
    double stderr_value = 0.0;
};

/// Header "statistic,M,alpha,value,stderr", one line per entry.
std::string rates_to_csv(std::span<const RateEntry> rows);
nlohmann::json rates_to_json(std::span<const RateEntry> rows);

/// Draws the L sample blocks of one trial from a preset.
class TrialGenerator {
public:
    explicit TrialGenerator(const ScenarioPreset& preset);

    const ScenarioPreset& preset() const noexcept { return preset_; }

    /// Sample covariances for trial `index` of `stream`.
    SampleCovariances draw(std::uint64_t seed, Stream stream, std::uint64_t index) const;

private:
    ScenarioPreset preset_;
    std::vector<GaussianSampler> samplers_;
};

struct Type1Result {
    std::string scenario;
    int M = 0;
    std::size_t trials = 0;
    std::size_t quantile_samples = 0;
    std::vector<double> alphas;
    std::vector<double> rates;
    /// Trials whose spike estimates sat at the detectability edge; they are
    /// counted as acceptances.
    std::size_t degenerate = 0;

    std::vector<RateEntry> table() const;
    nlohmann::json to_json() const;
};

/// Rejection frequency of the Wishart test with the Gaussian quadratic-form
/// threshold recalibrated on every trial. Requires trials >= 100.
Type1Result run_type1(const ScenarioPreset& h0, std::span<const double> alphas, std::size_t trials,
                      std::uint64_t seed, std::size_t quantile_samples = kDefaultQuantileSamples,
                      Execution exec = Execution::parallel);

struct PowerResult {
    std::string scenario;
    int M = 0;
    double sigma2 = 0.0;
    std::size_t trials = 0;
    std::vector<StatisticKind> statistics;
    std::vector<double> alphas;
    RMatrix thresholds;  // statistic x alpha
    RMatrix power;       // rejection frequency under h1
    RMatrix null_rate;   // rejection frequency of the same thresholds under h0

    std::vector<RateEntry> table() const;
    nlohmann::json to_json() const;
};

/// Thresholds are empirical upper quantiles of `trials` h0 replicates; power
/// is measured on `trials` independent h1 replicates. Requires trials >= 100.
PowerResult run_power(const ScenarioPair& pair, std::span<const StatisticKind> statistics,
                      std::span<const double> alphas, std::size_t trials, std::uint64_t seed,
                      Execution exec = Execution::parallel);

/// Top `count` eigenvalues of the pooled (index 0) and group SCMs for each trial.
std::vector<std::vector<RVector>> simulate_spectra(const ScenarioPreset& preset, std::size_t trials,
                                                   std::uint64_t seed, int count,
                                                   Execution exec = Execution::parallel);

struct SpikeLimitReport {
    int M = 0;
    std::size_t trials = 0;
    double tolerance = 0.0;
    RVector limits;          // phi_c(gamma_k) for the pooled SCM
    RVector within;          // share of trials with |lambda_k / limit - 1| <= tolerance
    double edge = 0.0;       // sigma2 (1 + sqrt c)^2
    double edge_within = 0.0;  // same share for lambda_{KL+1}

    nlohmann::json to_json() const;
};

/// Pooled-SCM spike eigenvalues against their almost-sure limits.
SpikeLimitReport run_spike_limits(const ScenarioPreset& preset, std::size_t trials,
                                  std::uint64_t seed, double tolerance = 0.03,
                                  Execution exec = Execution::parallel);

struct CltEntry {
    int k = 0;
    int ell_row = 0;
    int ell_col = 0;
    double theoretical = 0.0;
    double empirical = 0.0;
    double rel_error = 0.0;
};

struct CltReport {
    int M = 0;
    std::size_t trials = 0;
    RVector gammas;
    RMatrix theta;
    RMatrix empirical;
    /// Diagonal and first-row entries above 10% of their block's largest diagonal.
    std::vector<CltEntry> checked;
    double max_rel_error = 0.0;
    /// |empirical| / standard error over entries with k != k'.
    double max_cross_block_z = 0.0;
    /// Same over the structural zeros inside each block.
    double max_in_block_zero_z = 0.0;
    /// |mean| / standard error of each centred coordinate.
    RVector mean_z;

    nlohmann::json to_json() const;
};

/// Empirical covariance of sqrt(M) (lambda_k(R_ell hat) - phi_{c_ell}(gamma_k))
/// against Theta. Needs a null preset whose spikes satisfy the CLT conditions.
CltReport run_clt_check(const ScenarioPreset& preset, std::size_t trials, std::uint64_t seed,
                        Execution exec = Execution::parallel);

}  // namespace covtest
