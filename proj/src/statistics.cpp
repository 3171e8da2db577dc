#include "covtest/statistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "covtest/errors.hpp"
#include "covtest/rmt.hpp"
#include "covtest/rng.hpp"

namespace covtest {

namespace {

void check_gammas(std::span<const double> gammas, const ModelDims& dims) {
    dims.validate();
    if (static_cast<int>(gammas.size()) != dims.K) {
        throw ShapeError("expected K spike strengths");
    }
}

double max_ratio(const ModelDims& dims) {
    double c = dims.c_pooled();
    for (int g = 0; g < dims.L(); ++g) {
        c = std::max(c, dims.c_group(g));
    }
    return c;
}

void check_clt_preconditions(std::span<const double> gammas, double sigma2, const ModelDims& dims) {
    check_gammas(gammas, dims);
    if (!(sigma2 > 0.0)) {
        throw DomainError("noise variance must be positive");
    }
    const double floor = sigma2 * std::sqrt(max_ratio(dims));
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        if (!(gammas[k] > floor)) {
            throw DomainError("CLT needs every spike above sigma2 * max sqrt(c_l)");
        }
        if (k > 0 && !(gammas[k] < gammas[k - 1])) {
            throw DomainError("CLT needs strictly decreasing spikes");
        }
    }
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
}

// 1-based rank ceil((1 - alpha) n), computed as n - floor(alpha n) so that
// products like 0.05 * 200000 do not round up past an integer.
std::size_t upper_rank(std::size_t n, double alpha) {
    const auto below = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
    return std::clamp<std::size_t>(n - std::min(below, n), 1, n);
}

double select_rank(std::vector<double>& buffer, std::size_t rank) {
    auto nth = buffer.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(buffer.begin(), nth, buffer.end());
    return *nth;
}

constexpr std::size_t kQuadraticBlock = 4096;
constexpr int kMaxQuadraticDim = 64;

}  // namespace

double wishart_statistic(const SpikeEstimates& est) { return est.diff_vector.squaredNorm(); }

CltCovariance theta_matrix(std::span<const double> gammas, double sigma2, const ModelDims& dims) {
    check_clt_preconditions(gammas, sigma2, dims);
    CltCovariance out;
    out.K = dims.K;
    out.L = dims.L();
    const Eigen::Index size = static_cast<Eigen::Index>(out.K) * (out.L + 1);
    out.theta = RMatrix::Zero(size, size);
    const double s4 = sigma2 * sigma2;
    const double c0 = dims.c_pooled();
    for (int k = 0; k < out.K; ++k) {
        const double g = gammas[static_cast<std::size_t>(k)];
        const double lift = (g + sigma2) * (g + sigma2) / (g * g);
        for (int ell = 0; ell <= out.L; ++ell) {
            const double c = dims.c_at(ell);
            const double base = (g * g - s4 * c) * lift;
            out.theta(out.index(k, ell), out.index(k, ell)) = c * base;
            if (ell > 0) {
                out.theta(out.index(k, 0), out.index(k, ell)) = c0 * base;
                out.theta(out.index(k, ell), out.index(k, 0)) = c0 * base;
            }
        }
    }
    return out;
}

double theta_determinant_closed_form(std::span<const double> gammas, double sigma2,
                                     const ModelDims& dims) {
    check_clt_preconditions(gammas, sigma2, dims);
    const int L = dims.L();
    const double s4 = sigma2 * sigma2;
    const double c0 = dims.c_pooled();
    double det = 1.0;
    for (double g : gammas) {
        double block = s4 * c0 * c0 * (L - 1) * std::pow((g + sigma2) / g, 2.0 * (L + 1));
        for (int ell = 1; ell <= L; ++ell) {
            const double c = dims.c_at(ell);
            block *= c * (g * g - s4 * c);
        }
        det *= block;
    }
    return det;
}

RMatrix upsilon_matrix(std::span<const double> gammas, double sigma2, const ModelDims& dims) {
    check_gammas(gammas, dims);
    if (!(sigma2 > 0.0)) {
        throw DomainError("noise variance must be positive");
    }
    const int K = dims.K;
    const int L = dims.L();
    const Eigen::Index block = L + 1;
    RMatrix ups = RMatrix::Zero(K * block, K * block);
    const double s4 = sigma2 * sigma2;
    for (int k = 0; k < K; ++k) {
        const double g = gammas[static_cast<std::size_t>(k)];
        const double numer = g * g * (g + sigma2) * (g + sigma2);
        const Eigen::Index base = k * block;
        for (int ell = 0; ell <= L; ++ell) {
            const double c = dims.c_at(ell);
            const double gap = g * g - s4 * c;
            if (gap < 1e-6 * s4) {
                throw DegenerateSpike("spike estimate k=" + std::to_string(k + 1) + " too close to the "
                                      "detectability edge for ell=" + std::to_string(ell),
                                      k + 1, ell);
            }
            ups(base + ell, base + ell) = c * numer / gap;
        }
        const double xi = ups(base, base);
        for (int ell = 1; ell <= L; ++ell) {
            ups(base, base + ell) = xi;
            ups(base + ell, base) = xi;
        }
    }
    return ups;
}

RMatrix upsilon_hat(const SpikeEstimates& est, const ModelDims& dims) {
    return upsilon_matrix(std::span<const double>(est.gamma_pooled.data(),
                                                  static_cast<std::size_t>(est.gamma_pooled.size())),
                          est.sigma2_hat, dims);
}

RMatrix contrast_matrix(int K, int L) {
    if (K < 1 || L < 1) {
        throw DomainError("contrast matrix needs K >= 1 and L >= 1");
    }
    RMatrix h = RMatrix::Zero(static_cast<Eigen::Index>(K) * L, static_cast<Eigen::Index>(K) * (L + 1));
    for (int k = 0; k < K; ++k) {
        for (int ell = 0; ell < L; ++ell) {
            const Eigen::Index row = static_cast<Eigen::Index>(k) * L + ell;
            const Eigen::Index col = static_cast<Eigen::Index>(k) * (L + 1);
            h(row, col) = 1.0;
            h(row, col + ell + 1) = -1.0;
        }
    }
    return h;
}

RMatrix difference_covariance(const RMatrix& upsilon, int K, int L) {
    const RMatrix h = contrast_matrix(K, L);
    if (upsilon.rows() != h.cols() || upsilon.cols() != h.cols()) {
        throw ShapeError("Upsilon does not match K (L + 1)");
    }
    return h * upsilon * h.transpose();
}

std::vector<double> sample_quadratic_form(const RMatrix& xi, std::size_t n, std::uint64_t seed,
                                          Execution exec) {
    const Eigen::Index d = xi.rows();
    if (xi.cols() != d || d < 1) {
        throw ShapeError("quadratic form matrix must be square and nonempty");
    }
    if (d > kMaxQuadraticDim) {
        throw DomainError("quadratic form dimension too large for the sampler");
    }
    if (!xi.allFinite()) {
        throw NumericError("quadratic form matrix has non-finite entries");
    }
    std::vector<double> out(n);
    const std::size_t blocks = (n + kQuadraticBlock - 1) / kQuadraticBlock;
    for_indexed(
        blocks,
        [&](std::size_t b) {
            Engine engine = make_engine(seed, Stream::quadratic_form, b);
            NormalSource normal;
            std::array<double, kMaxQuadraticDim> x{};
            const std::size_t begin = b * kQuadraticBlock;
            const std::size_t end = std::min(n, begin + kQuadraticBlock);
            for (std::size_t s = begin; s < end; ++s) {
                for (Eigen::Index i = 0; i < d; ++i) {
                    x[static_cast<std::size_t>(i)] = normal(engine);
                }
                double q = 0.0;
                for (Eigen::Index i = 0; i < d; ++i) {
                    double row = 0.0;
                    for (Eigen::Index j = 0; j < d; ++j) {
                        row += xi(i, j) * x[static_cast<std::size_t>(j)];
                    }
                    q += x[static_cast<std::size_t>(i)] * row;
                }
                out[s] = q;
            }
        },
        exec);
    return out;
}

double upper_quantile(std::span<const double> samples, double alpha) {
    check_alpha(alpha);
    if (samples.empty()) {
        throw DomainError("quantile of an empty sample");
    }
    std::vector<double> buffer(samples.begin(), samples.end());
    return select_rank(buffer, upper_rank(buffer.size(), alpha));
}

std::vector<double> calibrate_thresholds(const RMatrix& xi, int M, std::span<const double> alphas,
                                         std::size_t n_samples, std::uint64_t seed,
                                         Execution exec) {
    for (double a : alphas) {
        check_alpha(a);
    }
    if (n_samples < 1000) {
        throw DomainError("threshold calibration needs at least 1000 quantile samples");
    }
    if (M < 1) {
        throw DomainError("dimension M must be positive");
    }
    std::vector<double> samples = sample_quadratic_form(xi, n_samples, seed, exec);
    std::vector<double> thresholds;
    thresholds.reserve(alphas.size());
    for (double a : alphas) {
        thresholds.push_back(select_rank(samples, upper_rank(samples.size(), a)) / M);
    }
    return thresholds;
}

double calibrate_threshold(const RMatrix& xi, int M, double alpha, std::size_t n_samples,
                           std::uint64_t seed, Execution exec) {
    const std::array<double, 1> alphas{alpha};
    return calibrate_thresholds(xi, M, alphas, n_samples, seed, exec).front();
}

Calibration calibrate(const SpikeEstimates& est, const ModelDims& dims, double alpha,
                      std::size_t n_samples, std::uint64_t seed, Execution exec) {
    Calibration cal;
    cal.upsilon_hat = upsilon_hat(est, dims);
    cal.h = contrast_matrix(dims.K, dims.L());
    cal.quantile_samples = n_samples;
    cal.alpha = alpha;
    cal.epsilon_hat =
        calibrate_threshold(cal.difference_covariance(), dims.M, alpha, n_samples, seed, exec);
    return cal;
}

double chi2_statistic(const SpikeEstimates& est, const Calibration& cal, const ModelDims& dims,
                      double condition_cap) {
    const RMatrix xi = cal.difference_covariance();
    if (xi.rows() != est.diff_vector.size()) {
        throw ShapeError("calibration does not match the difference vector");
    }
    const Eigen::SelfAdjointEigenSolver<RMatrix> solver(xi);
    if (solver.info() != Eigen::Success) {
        throw NumericError("eigensolver failed on the difference covariance");
    }
    const RVector& ev = solver.eigenvalues();
    const double smallest = ev(0);
    const double largest = ev(ev.size() - 1);
    const double cond = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
    if (!(cond <= condition_cap)) {
        throw IllConditioned("difference covariance is ill-conditioned (condition number " +
                                 std::to_string(cond) + ")",
                             cond);
    }
    const RVector proj = solver.eigenvectors().transpose() * est.diff_vector;
    return dims.M * (proj.array().square() / ev.array()).sum();
}

double chi2_upper_quantile(int dof, double alpha) {
    check_alpha(alpha);
    if (dof < 1) {
        throw DomainError("chi-square needs at least one degree of freedom");
    }
    const boost::math::chi_squared dist(dof);
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

double empirical_threshold(std::span<const double> null_values, double alpha) {
    return upper_quantile(null_values, alpha);
}

FisherEdges fisher_edges(double c_l, double c_lp) {
    if (!(c_l > 0.0 && c_l < 1.0 && c_lp > 0.0)) {
        throw DomainError("Fisher edges need 0 < c_l < 1 and c_l' > 0");
    }
    const double h = std::sqrt(c_l + c_lp - c_l * c_lp);
    const double scale = 1.0 - c_l;
    return {std::pow((1.0 - h) / scale, 2), std::pow((1.0 + h) / scale, 2)};
}

namespace {

void require_invertible_groups(const ModelDims& dims) {
    for (int n : dims.N) {
        if (n <= dims.M) {
            throw SingularCovariance("group SCM is singular: needs more samples than the dimension");
        }
    }
}

}  // namespace

double fisher_statistic(const SampleCovariances& covs, const ModelDims& dims) {
    dims.validate();
    require_invertible_groups(dims);
    const int L = dims.L();
    const int M = dims.M;
    double total = 0.0;
    for (int l = 0; l < L; ++l) {
        for (int lp = 0; lp < L; ++lp) {
            if (lp == l) {
                continue;
            }
            const RVector ev = generalized_eigenvalues_desc(covs.per_group[static_cast<std::size_t>(l)],
                                                            covs.per_group[static_cast<std::size_t>(lp)]);
            const auto [nu_minus, nu_plus] = fisher_edges(dims.c_group(l), dims.c_group(lp));
            for (int k = 0; k < dims.K; ++k) {
                total += std::max(ev(k) - nu_plus, 0.0);
                total += std::max(nu_minus - ev(M - 1 - k), 0.0);
            }
        }
    }
    return total;
}

FisherParams fisher_consistency_thresholds(double c, double delta) {
    if (!(c > 0.0 && c < 0.5)) {
        throw DomainError("Fisher consistency thresholds need 0 < c < 1/2");
    }
    if (!(delta >= 0.0)) {
        throw DomainError("relative eigenvalue change must be nonnegative");
    }
    FisherParams p;
    const auto edges = fisher_edges(2.0 * c, 2.0 * c);
    p.nu_minus = edges.nu_minus;
    p.nu_plus = edges.nu_plus;
    const double s = std::sqrt(c - c * c);
    p.beta_subspace = 2.0 * (c + s) / (1.0 - 2.0 * c);
    p.delta_min = p.beta_subspace;
    const double denom = (1.0 + delta) * (1.0 - 2.0 * c) - (1.0 + 2.0 * s);
    if (denom > 0.0) {
        p.beta_eigenvalue = 2.0 * (c + s) / denom;
    }
    return p;
}

double glr_statistic(const SampleCovariances& covs, const ModelDims& dims) {
    dims.validate();
    require_invertible_groups(dims);
    double total = 0.0;
    for (int g = 0; g < dims.L(); ++g) {
        const RVector ev = generalized_eigenvalues_desc(covs.per_group[static_cast<std::size_t>(g)], covs.pooled);
        if (!(ev.minCoeff() > 0.0)) {
            throw NumericError("nonpositive eigenvalue in the GLR statistic");
        }
        total += dims.weight(g) * ev.array().log().sum() / dims.M;
    }
    return total;
}

double glr_lr_statistic(const SampleCovariances& covs, const ModelDims& dims) {
    dims.validate();
    const int K = dims.K;
    const int tail = dims.M - K;
    const double n_total = static_cast<double>(dims.total_samples());
    const RVector& pooled = covs.eigvals_pooled;
    double spikes = 0.0;
    double group_noise = 0.0;
    for (int g = 0; g < dims.L(); ++g) {
        const RVector& ev = covs.eigvals_per_group[static_cast<std::size_t>(g)];
        const double n_g = dims.N[static_cast<std::size_t>(g)];
        for (int k = 0; k < K; ++k) {
            const double ratio = ev(k) / pooled(k);
            if (!(ratio > 0.0) || !std::isfinite(ratio)) {
                throw NumericError("nonpositive spike eigenvalue ratio in the low-rank GLR");
            }
            spikes += n_g * std::log(ratio);
        }
        group_noise += dims.weight(g) * ev.tail(tail).sum() / tail;
    }
    const double pooled_noise = pooled.tail(tail).sum() / tail;
    const double noise_ratio = group_noise / pooled_noise;
    if (!(noise_ratio > 0.0) || !std::isfinite(noise_ratio)) {
        throw NumericError("nonpositive noise-floor ratio in the low-rank GLR");
    }
    return -spikes - n_total * tail * std::log(noise_ratio);
}

double glr_lr_limit(std::span<const double> gamma_pooled, const RMatrix& gamma_per_group,
                    double sigma2, const ModelDims& dims) {
    check_gammas(gamma_pooled, dims);
    if (gamma_per_group.rows() != dims.K || gamma_per_group.cols() != dims.L()) {
        throw ShapeError("per-group spikes must be K x L");
    }
    auto psi = [](double x) { return x - std::log(x); };
    const double c = dims.c_pooled();
    double total = 0.0;
    for (int g = 0; g < dims.L(); ++g) {
        const double c_g = dims.c_group(g);
        for (int k = 0; k < dims.K; ++k) {
            const double pooled_loc =
                rmt::spike_forward(gamma_pooled[static_cast<std::size_t>(k)], {sigma2, c}).location;
            const double group_loc = rmt::spike_forward(gamma_per_group(k, g), {sigma2, c_g}).location;
            total += (c / c_g) * (psi(pooled_loc / sigma2) - psi(group_loc / sigma2));
        }
    }
    return total;
}

}  // namespace covtest
