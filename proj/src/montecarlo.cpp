#include "covtest/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "covtest/errors.hpp"
#include "covtest/rmt.hpp"

namespace covtest {

std::string statistic_name(StatisticKind kind) {
    switch (kind) {
        case StatisticKind::wishart:
            return "wishart";
        case StatisticKind::glr:
            return "glr";
        case StatisticKind::glr_lr:
            return "glr-lr";
        case StatisticKind::fisher:
            return "fisher";
    }
    return "wishart";
}

StatisticKind parse_statistic(const std::string& name) {
    if (name == "wishart") {
        return StatisticKind::wishart;
    }
    if (name == "glr") {
        return StatisticKind::glr;
    }
    if (name == "glr-lr" || name == "glr_lr") {
        return StatisticKind::glr_lr;
    }
    if (name == "fisher") {
        return StatisticKind::fisher;
    }
    throw DomainError("unknown statistic '" + name + "' (wishart, glr, glr-lr, fisher)");
}

bool needs_inversion(StatisticKind kind) {
    return kind == StatisticKind::glr || kind == StatisticKind::fisher;
}

double evaluate_statistic(StatisticKind kind, const SampleCovariances& covs, const ModelDims& dims) {
    switch (kind) {
        case StatisticKind::wishart:
            return wishart_statistic(spike_estimates(covs, dims));
        case StatisticKind::glr:
            return glr_statistic(covs, dims);
        case StatisticKind::glr_lr:
            return glr_lr_statistic(covs, dims);
        case StatisticKind::fisher:
            return fisher_statistic(covs, dims);
    }
    throw DomainError("unknown statistic");
}

std::string rates_to_csv(std::span<const RateEntry> rows) {
    std::ostringstream out;
    out.precision(6);
    out << "statistic,M,alpha,value,stderr\n";
    for (const auto& r : rows) {
        out << r.statistic << ',' << r.M << ',' << r.alpha << ',' << r.value << ','
            << r.stderr_value << '\n';
    }
    return out.str();
}

nlohmann::json rates_to_json(std::span<const RateEntry> rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"statistic", r.statistic},
                       {"M", r.M},
                       {"alpha", r.alpha},
                       {"value", r.value},
                       {"stderr", r.stderr_value}});
    }
    return arr;
}

namespace {

void check_alphas(std::span<const double> alphas) {
    if (alphas.empty()) {
        throw DomainError("at least one alpha is required");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw DomainError("alpha must lie in (0, 1)");
        }
    }
}

void check_trials(std::size_t trials) {
    if (trials < 100) {
        throw DomainError("Monte-Carlo runs need at least 100 trials");
    }
}

double binomial_stderr(double p, std::size_t n) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

nlohmann::json vector_json(const RVector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json matrix_json(const RMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows.push_back(vector_json(m.row(i).transpose()));
    }
    return rows;
}

}  // namespace

TrialGenerator::TrialGenerator(const ScenarioPreset& preset) : preset_(preset) {
    preset_.validate();
    samplers_.reserve(static_cast<std::size_t>(preset_.dims.L()));
    for (int g = 0; g < preset_.dims.L(); ++g) {
        samplers_.emplace_back(build_covariance(preset_, g));
    }
}

SampleCovariances TrialGenerator::draw(std::uint64_t seed, Stream stream, std::uint64_t index) const {
    Engine engine = make_engine(seed, stream, index);
    NormalSource normal;
    std::vector<CMatrix> scms;
    scms.reserve(samplers_.size());
    for (int g = 0; g < preset_.dims.L(); ++g) {
        const CMatrix y = samplers_[static_cast<std::size_t>(g)].sample(
            preset_.dims.N[static_cast<std::size_t>(g)], engine, normal);
        scms.push_back(compute_scm(y));
    }
    return make_sample_covariances(std::move(scms), preset_.dims);
}

// ---------------------------------------------------------------------------

std::vector<RateEntry> Type1Result::table() const {
    std::vector<RateEntry> rows;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        rows.push_back({"wishart", M, alphas[a], rates[a], binomial_stderr(rates[a], trials)});
    }
    return rows;
}

nlohmann::json Type1Result::to_json() const {
    const auto rows = table();
    return {{"scenario", scenario},
            {"M", M},
            {"trials", trials},
            {"quantile_samples", quantile_samples},
            {"degenerate_trials", degenerate},
            {"rates", rates_to_json(rows)}};
}

Type1Result run_type1(const ScenarioPreset& h0, std::span<const double> alphas, std::size_t trials,
                      std::uint64_t seed, std::size_t quantile_samples, Execution exec) {
    check_alphas(alphas);
    check_trials(trials);
    const TrialGenerator gen(h0);
    const ModelDims& dims = h0.dims;

    struct Record {
        std::vector<char> reject;
        bool degenerate = false;
    };
    const auto records = map_indexed<Record>(
        trials,
        [&](std::size_t t) {
            Record rec;
            rec.reject.assign(alphas.size(), 0);
            const SampleCovariances covs = gen.draw(seed, Stream::h0_trials, t);
            const SpikeEstimates est = spike_estimates(covs, dims);
            const double stat = wishart_statistic(est);
            try {
                const RMatrix xi = difference_covariance(upsilon_hat(est, dims), dims.K, dims.L());
                const auto eps = calibrate_thresholds(xi, dims.M, alphas, quantile_samples,
                                                      derive_seed(seed, Stream::calibration, t),
                                                      Execution::serial);
                for (std::size_t a = 0; a < alphas.size(); ++a) {
                    rec.reject[a] = stat > eps[a] ? 1 : 0;
                }
            } catch (const DegenerateSpike&) {
                rec.degenerate = true;
            }
            return rec;
        },
        exec);

    Type1Result result;
    result.scenario = h0.name;
    result.M = dims.M;
    result.trials = trials;
    result.quantile_samples = quantile_samples;
    result.alphas.assign(alphas.begin(), alphas.end());
    result.rates.assign(alphas.size(), 0.0);
    for (const auto& rec : records) {
        result.degenerate += rec.degenerate ? 1 : 0;
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            result.rates[a] += rec.reject[a];
        }
    }
    for (double& r : result.rates) {
        r /= static_cast<double>(trials);
    }
    return result;
}

// ---------------------------------------------------------------------------

std::vector<RateEntry> PowerResult::table() const {
    std::vector<RateEntry> rows;
    for (std::size_t s = 0; s < statistics.size(); ++s) {
        const std::string name = statistic_name(statistics[s]);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            const double p = power(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
            rows.push_back({name, M, alphas[a], p, binomial_stderr(p, trials)});
        }
    }
    for (std::size_t s = 0; s < statistics.size(); ++s) {
        const std::string name = statistic_name(statistics[s]) + "_h0";
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            const double p = null_rate(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
            rows.push_back({name, M, alphas[a], p, binomial_stderr(p, trials)});
        }
    }
    return rows;
}

nlohmann::json PowerResult::to_json() const {
    const auto rows = table();
    nlohmann::json thr = nlohmann::json::object();
    for (std::size_t s = 0; s < statistics.size(); ++s) {
        thr[statistic_name(statistics[s])] =
            vector_json(thresholds.row(static_cast<Eigen::Index>(s)).transpose());
    }
    return {{"scenario", scenario},
            {"M", M},
            {"sigma2", sigma2},
            {"trials", trials},
            {"alphas", alphas},
            {"thresholds", thr},
            {"rates", rates_to_json(rows)}};
}

PowerResult run_power(const ScenarioPair& pair, std::span<const StatisticKind> statistics,
                      std::span<const double> alphas, std::size_t trials, std::uint64_t seed,
                      Execution exec) {
    check_alphas(alphas);
    check_trials(trials);
    if (statistics.empty()) {
        throw DomainError("at least one statistic is required");
    }
    const ModelDims& dims = pair.h0.dims;
    if (pair.h1.dims.M != dims.M || pair.h1.dims.N != dims.N || pair.h1.dims.K != dims.K) {
        throw ShapeError("h0 and h1 presets must share their dimensions");
    }
    for (StatisticKind s : statistics) {
        if (needs_inversion(s)) {
            for (int n : dims.N) {
                if (n <= dims.M) {
                    throw SingularCovariance(statistic_name(s) + " needs more samples than the dimension");
                }
            }
        }
    }
    const TrialGenerator gen0(pair.h0);
    const TrialGenerator gen1(pair.h1);
    auto phase = [&](const TrialGenerator& gen, Stream stream) {
        return map_indexed<std::vector<double>>(
            trials,
            [&](std::size_t t) {
                const SampleCovariances covs = gen.draw(seed, stream, t);
                std::vector<double> values;
                values.reserve(statistics.size());
                for (StatisticKind s : statistics) {
                    values.push_back(evaluate_statistic(s, covs, dims));
                }
                return values;
            },
            exec);
    };
    const auto null_values = phase(gen0, Stream::h0_trials);
    const auto alt_values = phase(gen1, Stream::h1_trials);

    PowerResult result;
    result.scenario = pair.h1.name;
    result.M = dims.M;
    result.sigma2 = pair.h1.sigma2;
    result.trials = trials;
    result.statistics.assign(statistics.begin(), statistics.end());
    result.alphas.assign(alphas.begin(), alphas.end());
    const auto S = static_cast<Eigen::Index>(statistics.size());
    const auto A = static_cast<Eigen::Index>(alphas.size());
    result.thresholds.resize(S, A);
    result.power.resize(S, A);
    result.null_rate.resize(S, A);
    std::vector<double> column(trials);
    for (Eigen::Index s = 0; s < S; ++s) {
        for (std::size_t t = 0; t < trials; ++t) {
            column[t] = null_values[t][static_cast<std::size_t>(s)];
        }
        for (Eigen::Index a = 0; a < A; ++a) {
            const double thr = empirical_threshold(column, alphas[static_cast<std::size_t>(a)]);
            std::size_t h0_hits = 0;
            std::size_t h1_hits = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                h0_hits += null_values[t][static_cast<std::size_t>(s)] > thr ? 1 : 0;
                h1_hits += alt_values[t][static_cast<std::size_t>(s)] > thr ? 1 : 0;
            }
            result.thresholds(s, a) = thr;
            result.null_rate(s, a) = static_cast<double>(h0_hits) / static_cast<double>(trials);
            result.power(s, a) = static_cast<double>(h1_hits) / static_cast<double>(trials);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<RVector>> simulate_spectra(const ScenarioPreset& preset, std::size_t trials,
                                                   std::uint64_t seed, int count, Execution exec) {
    if (count < 1 || count > preset.dims.M) {
        throw DomainError("eigenvalue count must lie in 1..M");
    }
    const TrialGenerator gen(preset);
    const Stream stream = preset.hypothesis == Hypothesis::h0 ? Stream::h0_trials : Stream::h1_trials;
    return map_indexed<std::vector<RVector>>(
        trials,
        [&](std::size_t t) {
            const SampleCovariances covs = gen.draw(seed, stream, t);
            std::vector<RVector> tops;
            tops.reserve(covs.per_group.size() + 1);
            tops.push_back(covs.eigvals_pooled.head(count));
            for (const auto& ev : covs.eigvals_per_group) {
                tops.push_back(ev.head(count));
            }
            return tops;
        },
        exec);
}

nlohmann::json SpikeLimitReport::to_json() const {
    return {{"M", M},
            {"trials", trials},
            {"tolerance", tolerance},
            {"limits", vector_json(limits)},
            {"within", vector_json(within)},
            {"edge", edge},
            {"edge_within", edge_within}};
}

SpikeLimitReport run_spike_limits(const ScenarioPreset& preset, std::size_t trials,
                                  std::uint64_t seed, double tolerance, Execution exec) {
    preset.validate();
    if (trials < 1) {
        throw DomainError("at least one trial is required");
    }
    const int K = preset.dims.K;
    const int count = K * preset.dims.L() + 1;
    const rmt::MpParams mp{preset.sigma2, preset.dims.c_pooled()};
    const RVector gammas = population_spikes(preset, -1);

    SpikeLimitReport report;
    report.M = preset.dims.M;
    report.trials = trials;
    report.tolerance = tolerance;
    report.limits.resize(K);
    for (int k = 0; k < K; ++k) {
        report.limits(k) = rmt::spike_forward(gammas(k), mp).location;
    }
    report.edge = rmt::mp_edges(mp).upper;
    report.within = RVector::Zero(K);

    const auto spectra = simulate_spectra(preset, trials, seed, count, exec);
    for (const auto& tops : spectra) {
        const RVector& pooled = tops.front();
        for (int k = 0; k < K; ++k) {
            report.within(k) += std::abs(pooled(k) / report.limits(k) - 1.0) <= tolerance ? 1.0 : 0.0;
        }
        report.edge_within += std::abs(pooled(count - 1) / report.edge - 1.0) <= tolerance ? 1.0 : 0.0;
    }
    report.within /= static_cast<double>(trials);
    report.edge_within /= static_cast<double>(trials);
    return report;
}

// ---------------------------------------------------------------------------

nlohmann::json CltReport::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : checked) {
        entries.push_back({{"k", e.k + 1},
                           {"ell_row", e.ell_row},
                           {"ell_col", e.ell_col},
                           {"theoretical", e.theoretical},
                           {"empirical", e.empirical},
                           {"rel_error", e.rel_error}});
    }
    return {{"M", M},
            {"trials", trials},
            {"gammas", vector_json(gammas)},
            {"theta", matrix_json(theta)},
            {"empirical", matrix_json(empirical)},
            {"checked", entries},
            {"max_rel_error", max_rel_error},
            {"max_cross_block_z", max_cross_block_z},
            {"max_in_block_zero_z", max_in_block_zero_z},
            {"mean_z", vector_json(mean_z)}};
}

CltReport run_clt_check(const ScenarioPreset& preset, std::size_t trials, std::uint64_t seed,
                        Execution exec) {
    preset.validate();
    if (trials < 10) {
        throw DomainError("CLT check needs at least 10 trials");
    }
    const ModelDims& dims = preset.dims;
    const int K = dims.K;
    const int L = dims.L();
    const RVector gammas = population_spikes(preset, -1);
    for (int g = 0; g < L; ++g) {
        if ((population_spikes(preset, g) - gammas).cwiseAbs().maxCoeff() > 1e-9 * gammas(0)) {
            throw DomainError("CLT check needs a preset with identical spikes in every group");
        }
    }
    const std::vector<double> gamma_list(gammas.data(), gammas.data() + gammas.size());
    CltReport report;
    report.M = dims.M;
    report.trials = trials;
    report.gammas = gammas;
    const CltCovariance theta = theta_matrix(gamma_list, preset.sigma2, dims);
    report.theta = theta.theta;

    const Eigen::Index D = static_cast<Eigen::Index>(K) * (L + 1);
    RVector limits(D);
    for (int k = 0; k < K; ++k) {
        for (int ell = 0; ell <= L; ++ell) {
            limits(theta.index(k, ell)) =
                rmt::spike_forward(gammas(k), {preset.sigma2, dims.c_at(ell)}).location;
        }
    }
    const auto spectra = simulate_spectra(preset, trials, seed, K, exec);
    const auto T = static_cast<Eigen::Index>(trials);
    RMatrix z(T, D);
    const double root_m = std::sqrt(static_cast<double>(dims.M));
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto& tops = spectra[static_cast<std::size_t>(t)];
        for (int k = 0; k < K; ++k) {
            for (int ell = 0; ell <= L; ++ell) {
                const Eigen::Index i = theta.index(k, ell);
                z(t, i) = root_m * (tops[static_cast<std::size_t>(ell)](k) - limits(i));
            }
        }
    }
    const RVector mean = z.colwise().mean().transpose();
    const RMatrix centred = z.rowwise() - mean.transpose();
    report.empirical = centred.transpose() * centred / static_cast<double>(T - 1);
    const RVector sd = report.empirical.diagonal().cwiseSqrt();
    report.mean_z = (mean.array() / (sd.array() / std::sqrt(static_cast<double>(T)))).matrix();

    auto product_stderr = [&](Eigen::Index i, Eigen::Index j) {
        const RVector prod = centred.col(i).cwiseProduct(centred.col(j));
        const double m = prod.mean();
        const double var = (prod.array() - m).square().sum() / static_cast<double>(T - 1);
        return std::sqrt(var / static_cast<double>(T));
    };

    for (int k = 0; k < K; ++k) {
        double block_max = 0.0;
        for (int ell = 0; ell <= L; ++ell) {
            block_max = std::max(block_max, std::abs(report.theta(theta.index(k, ell), theta.index(k, ell))));
        }
        auto check = [&](int row, int col) {
            const double th = report.theta(theta.index(k, row), theta.index(k, col));
            if (std::abs(th) <= 0.1 * block_max) {
                return;
            }
            const double emp = report.empirical(theta.index(k, row), theta.index(k, col));
            const double err = std::abs(emp - th) / std::abs(th);
            report.checked.push_back({k, row, col, th, emp, err});
            report.max_rel_error = std::max(report.max_rel_error, err);
        };
        for (int ell = 0; ell <= L; ++ell) {
            check(ell, ell);
        }
        for (int ell = 1; ell <= L; ++ell) {
            check(0, ell);
        }
        for (int a = 1; a <= L; ++a) {
            for (int b = a + 1; b <= L; ++b) {
                const Eigen::Index i = theta.index(k, a);
                const Eigen::Index j = theta.index(k, b);
                report.max_in_block_zero_z = std::max(report.max_in_block_zero_z,
                                                      std::abs(report.empirical(i, j)) / product_stderr(i, j));
            }
        }
    }
    for (Eigen::Index i = 0; i < D; ++i) {
        for (Eigen::Index j = i + 1; j < D; ++j) {
            if (i / (L + 1) == j / (L + 1)) {
                continue;
            }
            report.max_cross_block_z =
                std::max(report.max_cross_block_z, std::abs(report.empirical(i, j)) / product_stderr(i, j));
        }
    }
    return report;
}

}  // namespace covtest
