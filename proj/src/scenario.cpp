#include "covtest/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "covtest/errors.hpp"

namespace covtest {

void ScenarioPreset::validate() const {
    dims.validate();
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw DomainError("noise variance must be positive and finite");
    }
    if (angles.rows() != dims.K || angles.cols() != dims.L() || strengths.rows() != dims.K ||
        strengths.cols() != dims.L()) {
        throw ShapeError("preset angles and strengths must be K x L");
    }
    if (!angles.allFinite() || !strengths.allFinite()) {
        throw DomainError("preset parameters must be finite");
    }
    for (int g = 0; g < dims.L(); ++g) {
        for (int k = 0; k < dims.K; ++k) {
            if (strengths(k, g) < 0.0) {
                throw DomainError("spike strengths must be nonnegative");
            }
            if (k > 0 && strengths(k, g) > strengths(k - 1, g)) {
                throw DomainError("spike strengths must be nonincreasing in k");
            }
        }
    }
}

SpikeLayout parse_layout(const std::string& name) {
    if (name == "orthogonal") {
        return SpikeLayout::orthogonal;
    }
    if (name == "offset") {
        return SpikeLayout::offset;
    }
    if (name == "collinear") {
        return SpikeLayout::collinear;
    }
    throw DomainError("unknown spike layout '" + name + "' (orthogonal, offset, collinear)");
}

std::string layout_name(SpikeLayout layout) {
    switch (layout) {
        case SpikeLayout::orthogonal:
            return "orthogonal";
        case SpikeLayout::offset:
            return "offset";
        case SpikeLayout::collinear:
            return "collinear";
    }
    return "orthogonal";
}

namespace {

constexpr double kPi = std::numbers::pi;

double second_angle(SpikeLayout layout, int M) {
    switch (layout) {
        case SpikeLayout::orthogonal:
            return 2.0 * kPi / M;
        case SpikeLayout::offset:
            return kPi / 8.0;
        case SpikeLayout::collinear:
            return 0.0;
    }
    return 0.0;
}

ScenarioPreset base_preset(std::string name, int M, int samples_per_group, double sigma2) {
    if (M < 3) {
        throw DomainError("built-in scenarios need M >= 3");
    }
    ScenarioPreset p;
    p.name = std::move(name);
    p.dims = ModelDims{M, {samples_per_group, samples_per_group}, 2};
    p.sigma2 = sigma2;
    p.angles = RMatrix::Zero(2, 2);
    p.strengths = RMatrix::Zero(2, 2);
    return p;
}

ScenarioPair finish(ScenarioPreset h0, ScenarioPreset h1) {
    h0.hypothesis = Hypothesis::h0;
    h1.hypothesis = Hypothesis::h1;
    h0.validate();
    h1.validate();
    return {std::move(h0), std::move(h1)};
}

}  // namespace

ScenarioPair type1_scenario(int M, double sigma2, SpikeLayout layout) {
    ScenarioPreset p = base_preset("type1", M, 2 * M, sigma2);
    p.strengths << 3.0, 3.0, 1.5, 1.5;
    p.angles.row(1).setConstant(second_angle(layout, M));
    return finish(p, p);
}

ScenarioPair subspace_scenario(int M, double sigma2) {
    ScenarioPreset h0 = base_preset("subspace", M, 2 * M, sigma2);
    h0.strengths << 2.0, 2.0, 1.0, 1.0;
    h0.angles << 0.0, 0.0, kPi / 8.0, kPi / 8.0;
    ScenarioPreset h1 = h0;
    h1.angles << 0.0, kPi / 2.0, kPi / 8.0, kPi / 2.0 + kPi / 8.0;
    return finish(h0, h1);
}

ScenarioPair eigenvalue_scenario(int M, double sigma2, SpikeLayout layout) {
    ScenarioPreset h0 = base_preset("eigenvalue", M, 4 * M, sigma2);
    h0.strengths << 2.0, 2.0, 1.5, 1.5;
    h0.angles.row(1).setConstant(second_angle(layout, M));
    ScenarioPreset h1 = h0;
    h1.strengths << 2.0, 5.0, 1.5, 4.0;
    return finish(h0, h1);
}

ScenarioPair scenario_by_name(const std::string& name, int M, double sigma2, SpikeLayout layout) {
    if (name == "type1") {
        return type1_scenario(M, sigma2, layout);
    }
    if (name == "subspace") {
        return subspace_scenario(M, sigma2);
    }
    if (name == "eigenvalue") {
        return eigenvalue_scenario(M, sigma2, layout);
    }
    throw DomainError("unknown scenario '" + name + "' (type1, subspace, eigenvalue)");
}

CVector steering_vector(double theta, int M) {
    if (M < 1) {
        throw DomainError("steering vector needs M >= 1");
    }
    CVector a(M);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    for (int i = 0; i < M; ++i) {
        a(i) = std::polar(scale, theta * i);
    }
    return a;
}

CMatrix build_gamma(const ScenarioPreset& preset, int group) {
    preset.validate();
    if (group < 0 || group >= preset.dims.L()) {
        throw DomainError("group index out of range");
    }
    const int M = preset.dims.M;
    CMatrix gamma = CMatrix::Zero(M, M);
    for (int k = 0; k < preset.dims.K; ++k) {
        const CVector a = steering_vector(preset.angles(k, group), M);
        gamma += preset.strengths(k, group) * (a * a.adjoint());
    }
    return gamma;
}

CMatrix build_covariance(const ScenarioPreset& preset, int group) {
    CMatrix r = build_gamma(preset, group);
    r.diagonal().array() += preset.sigma2;
    return r;
}

RVector population_spikes(const ScenarioPreset& preset, int group) {
    CMatrix gamma;
    if (group == -1) {
        gamma = CMatrix::Zero(preset.dims.M, preset.dims.M);
        for (int g = 0; g < preset.dims.L(); ++g) {
            gamma += preset.dims.weight(g) * build_gamma(preset, g);
        }
    } else {
        gamma = build_gamma(preset, group);
    }
    return hermitian_eigenvalues_desc(gamma).head(preset.dims.K);
}

GaussianSampler::GaussianSampler(const CMatrix& r) : dim_(r.rows()) {
    if (r.rows() != r.cols() || r.rows() < 1) {
        throw ShapeError("covariance must be square and nonempty");
    }
    if (!r.allFinite()) {
        throw NumericError("covariance has non-finite entries");
    }
    const double asym = (r - r.adjoint()).cwiseAbs().maxCoeff();
    const double size = std::max(r.cwiseAbs().maxCoeff(), 1e-300);
    if (asym > 1e-10 * size) {
        throw NumericError("covariance is not Hermitian");
    }
    const CMatrix herm = 0.5 * (r + r.adjoint());
    const Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
    if (solver.info() != Eigen::Success) {
        throw NumericError("eigendecomposition of the covariance failed");
    }
    RVector lambda = solver.eigenvalues();  // ascending
    const double top = std::max(lambda(dim_ - 1), 0.0);
    if (lambda(0) < -1e-10 * std::max(top, 1.0)) {
        throw NumericError("covariance is not positive semidefinite");
    }
    lambda = lambda.cwiseMax(0.0);

    // Eigenvalues within this band of the smallest are treated as one repeated value.
    const double band = 1e-10 * std::max(top, 1e-300);
    Eigen::Index above = 0;
    for (Eigen::Index i = dim_ - 1; i >= 0 && lambda(i) - lambda(0) > band; --i) {
        ++above;
    }
    if (above <= dim_ / 2) {
        low_rank_ = true;
        floor_sqrt_ = std::sqrt(lambda(0));
        basis_ = solver.eigenvectors().rightCols(above);
        excess_ = lambda.tail(above).cwiseSqrt().array() - floor_sqrt_;
    } else {
        full_root_ = solver.eigenvectors() * lambda.cwiseSqrt().asDiagonal() *
                     solver.eigenvectors().adjoint();
    }
}

CMatrix GaussianSampler::sample(int n, Engine& engine, NormalSource& normal) const {
    if (n < 1) {
        throw DomainError("sample count must be positive");
    }
    CMatrix w(dim_, n);
    for (int j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < dim_; ++i) {
            w(i, j) = normal.complex(engine);
        }
    }
    if (!low_rank_) {
        return full_root_ * w;
    }
    CMatrix y = floor_sqrt_ * w;
    if (basis_.cols() > 0) {
        const CMatrix coeff = excess_.asDiagonal() * (basis_.adjoint() * w);
        y.noalias() += basis_ * coeff;
    }
    return y;
}

CMatrix sample_complex_gaussian(const CMatrix& r, int n, std::uint64_t seed) {
    const GaussianSampler sampler(r);
    Engine engine = make_engine(seed, Stream::data, 0);
    NormalSource normal;
    return sampler.sample(n, engine, normal);
}

}  // namespace covtest
