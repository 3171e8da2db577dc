#include "covtest/estimators.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "covtest/errors.hpp"
#include "covtest/rmt.hpp"

namespace covtest {

long long ModelDims::total_samples() const noexcept {
    return std::accumulate(N.begin(), N.end(), 0LL);
}

double ModelDims::c_group(int group) const {
    if (group < 0 || group >= L()) {
        throw DomainError("group index out of range");
    }
    return static_cast<double>(M) / N[static_cast<std::size_t>(group)];
}

double ModelDims::c_pooled() const {
    return static_cast<double>(M) / static_cast<double>(total_samples());
}

double ModelDims::weight(int group) const {
    if (group < 0 || group >= L()) {
        throw DomainError("group index out of range");
    }
    return static_cast<double>(N[static_cast<std::size_t>(group)]) /
           static_cast<double>(total_samples());
}

void ModelDims::validate() const {
    if (M < 2) {
        throw DomainError("dimension M must be at least 2");
    }
    if (L() < 1) {
        throw DomainError("at least one group is required");
    }
    if (K < 1 || K >= M) {
        throw DomainError("rank K must satisfy 1 <= K < M, got K=" + std::to_string(K));
    }
    for (int n : N) {
        if (n < 1) {
            throw DomainError("every group needs at least one sample");
        }
    }
}

CMatrix compute_scm(const CMatrix& samples) {
    if (samples.rows() < 1 || samples.cols() < 1) {
        throw ShapeError("sample matrix must have at least one row and one column");
    }
    const Eigen::Index m = samples.rows();
    CMatrix scm = CMatrix::Zero(m, m);
    scm.selfadjointView<Eigen::Lower>().rankUpdate(samples, 1.0 / static_cast<double>(samples.cols()));
    for (Eigen::Index j = 0; j < m; ++j) {
        scm(j, j) = cdouble(scm(j, j).real(), 0.0);
        for (Eigen::Index i = j + 1; i < m; ++i) {
            scm(j, i) = std::conj(scm(i, j));
        }
    }
    return scm;
}

CMatrix pool_scms(std::span<const CMatrix> scms, const ModelDims& dims) {
    if (static_cast<int>(scms.size()) != dims.L() || scms.empty()) {
        throw ShapeError("number of SCMs does not match the number of groups");
    }
    const Eigen::Index m = scms.front().rows();
    CMatrix pooled = CMatrix::Zero(m, m);
    for (int g = 0; g < dims.L(); ++g) {
        const auto& s = scms[static_cast<std::size_t>(g)];
        if (s.rows() != m || s.cols() != m) {
            throw ShapeError("group SCMs have different shapes");
        }
        pooled += dims.weight(g) * s;
    }
    return pooled;
}

SampleCovariances make_sample_covariances(std::vector<CMatrix> scms, const ModelDims& dims) {
    dims.validate();
    SampleCovariances covs;
    covs.pooled = pool_scms(scms, dims);
    if (covs.pooled.rows() != dims.M) {
        throw ShapeError("SCM size does not match M");
    }
    covs.per_group = std::move(scms);
    covs.eigvals_per_group.reserve(covs.per_group.size());
    for (const auto& s : covs.per_group) {
        covs.eigvals_per_group.push_back(hermitian_eigenvalues_desc(s));
    }
    covs.eigvals_pooled = hermitian_eigenvalues_desc(covs.pooled);
    return covs;
}

SampleCovariances sample_covariances_from_data(std::span<const CMatrix> groups,
                                               const ModelDims& dims) {
    if (static_cast<int>(groups.size()) != dims.L()) {
        throw ShapeError("number of sample blocks does not match the number of groups");
    }
    std::vector<CMatrix> scms;
    scms.reserve(groups.size());
    for (int g = 0; g < dims.L(); ++g) {
        const auto& y = groups[static_cast<std::size_t>(g)];
        if (y.rows() != dims.M || y.cols() != dims.N[static_cast<std::size_t>(g)]) {
            throw ShapeError("sample block " + std::to_string(g) + " does not match (M, N_ell)");
        }
        scms.push_back(compute_scm(y));
    }
    return make_sample_covariances(std::move(scms), dims);
}

double noise_variance_hat(const SampleCovariances& covs, const ModelDims& dims) {
    dims.validate();
    if (static_cast<int>(covs.eigvals_per_group.size()) != dims.L()) {
        throw ShapeError("spectra do not match the number of groups");
    }
    const int tail = dims.M - dims.K;
    double estimate = 0.0;
    for (int g = 0; g < dims.L(); ++g) {
        const RVector& ev = covs.eigvals_per_group[static_cast<std::size_t>(g)];
        estimate += dims.weight(g) * ev.tail(tail).sum() / tail;
    }
    return estimate;
}

SpikeEstimates spike_estimates(const SampleCovariances& covs, const ModelDims& dims) {
    SpikeEstimates est;
    est.sigma2_hat = noise_variance_hat(covs, dims);
    const int K = dims.K;
    const int L = dims.L();
    const rmt::MpParams pooled{est.sigma2_hat, dims.c_pooled()};
    est.gamma_pooled.resize(K);
    est.gamma_per_group.resize(K, L);
    est.diff_vector.resize(static_cast<Eigen::Index>(K) * L);
    for (int k = 0; k < K; ++k) {
        est.gamma_pooled(k) = rmt::spike_inverse(covs.eigvals_pooled(k), pooled);
    }
    for (int g = 0; g < L; ++g) {
        const rmt::MpParams group{est.sigma2_hat, dims.c_group(g)};
        const RVector& ev = covs.eigvals_per_group[static_cast<std::size_t>(g)];
        for (int k = 0; k < K; ++k) {
            est.gamma_per_group(k, g) = rmt::spike_inverse(ev(k), group);
            est.diff_vector(k * L + g) = est.gamma_pooled(k) - est.gamma_per_group(k, g);
        }
    }
    return est;
}

std::vector<int> rank_estimate(const SampleCovariances& covs, double sigma2,
                               const ModelDims& dims, double margin) {
    if (!(margin > 0.0)) {
        throw DomainError("rank-estimation margin must be positive");
    }
    std::vector<int> ranks;
    ranks.reserve(covs.eigvals_per_group.size());
    for (int g = 0; g < dims.L(); ++g) {
        const double edge = rmt::mp_edges({sigma2, dims.c_group(g)}).upper + margin;
        const RVector& ev = covs.eigvals_per_group[static_cast<std::size_t>(g)];
        int count = 0;
        while (count < ev.size() && ev(count) > edge) {
            ++count;
        }
        ranks.push_back(count);
    }
    return ranks;
}

double energy_ratio(std::span<const RVector> spectra, int k) {
    if (spectra.empty()) {
        throw DomainError("energy ratio needs at least one spectrum");
    }
    double head = 0.0;
    double total = 0.0;
    for (const auto& ev : spectra) {
        if (k < 1 || k > ev.size()) {
            throw DomainError("energy ratio index k out of range");
        }
        head += ev.head(k).sum();
        total += ev.sum();
    }
    if (!(total > 0.0)) {
        throw NumericError("energy ratio undefined for a zero trace");
    }
    return head / total;
}

double energy_ratio(const SampleCovariances& covs, int k) {
    if (covs.eigvals_per_group.empty()) {
        throw DomainError("energy ratio needs the first group's spectrum");
    }
    return energy_ratio(std::span<const RVector>(covs.eigvals_per_group.data(), 1), k);
}

}  // namespace covtest
