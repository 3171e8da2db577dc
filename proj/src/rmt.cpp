#include "covtest/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "covtest/errors.hpp"

namespace covtest::rmt {

void MpParams::validate() const {
    if (!(std::isfinite(sigma2) && sigma2 > 0.0)) {
        throw DomainError("noise variance must be positive, got " + std::to_string(sigma2));
    }
    if (!(std::isfinite(c) && c > 0.0)) {
        throw DomainError("dimension ratio must be positive, got " + std::to_string(c));
    }
}

Interval mp_edges(const MpParams& params) {
    params.validate();
    const double root = std::sqrt(params.c);
    return {params.sigma2 * (1.0 - root) * (1.0 - root),
            params.sigma2 * (1.0 + root) * (1.0 + root)};
}

double mp_density(double x, const MpParams& params) {
    const auto [lo, hi] = mp_edges(params);
    if (!(x > lo && x < hi) || x <= 0.0) {
        return 0.0;
    }
    return std::sqrt((x - lo) * (hi - x)) /
           (2.0 * std::numbers::pi * params.sigma2 * params.c * x);
}

double mp_atom_mass(const MpParams& params) {
    params.validate();
    return params.c > 1.0 ? 1.0 - 1.0 / params.c : 0.0;
}

double detection_threshold(const MpParams& params) {
    params.validate();
    return params.sigma2 * std::sqrt(params.c);
}

SpikeLocation spike_forward(double gamma, const MpParams& params) {
    params.validate();
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw DomainError("spike strength must be nonnegative, got " + std::to_string(gamma));
    }
    const double s2 = params.sigma2;
    if (gamma <= s2 * std::sqrt(params.c)) {
        return {gamma, mp_edges(params).upper};
    }
    return {gamma, (gamma + s2) * (gamma + s2 * params.c) / gamma};
}

double spike_inverse(double lambda, const MpParams& params) {
    params.validate();
    const double s2 = params.sigma2;
    const double root_c = std::sqrt(params.c);
    const double upper = s2 * (1.0 + root_c) * (1.0 + root_c);
    if (!(lambda > upper)) {
        return s2 * root_c;
    }
    // Larger root of g^2 - b g + s2^2 c = 0 with b = lambda - s2 (1 + c).
    // The discriminant b^2 - 4 s2^2 c is factored as (lambda - x+) (b + 2 s2 sqrt c)
    // so that it stays accurate close to the edge.
    const double b = lambda - s2 * (1.0 + params.c);
    const double disc = (lambda - upper) * (b + 2.0 * s2 * root_c);
    return 0.5 * (b + std::sqrt(disc));
}

double w_outside_support(double x, const MpParams& params) {
    const auto [lo, hi] = mp_edges(params);
    if (x >= lo && x <= hi) {
        throw DomainError("w(x) is real only outside the Marcenko-Pastur support");
    }
    const double s2 = params.sigma2;
    // phi(w) = x  <=>  w^2 - (x + s2 (1 - c)) w + x s2 = 0
    const double b = x + s2 * (1.0 - params.c);
    const double disc = b * b - 4.0 * x * s2;
    const double root = std::sqrt(std::max(disc, 0.0));
    const double big = 0.5 * (b + (b >= 0.0 ? root : -root));
    const double small = big != 0.0 ? x * s2 / big : 0.0;
    // phi'(w) = 1 - s2^2 c / (s2 - w)^2 > 0 away from [w-, w+].
    auto increasing = [&](double w) {
        const double d = s2 - w;
        return d * d > s2 * s2 * params.c;
    };
    const double lo_root = std::min(big, small);
    const double hi_root = std::max(big, small);
    if (x > hi) {
        return hi_root;
    }
    return increasing(lo_root) ? lo_root : hi_root;
}

StieltjesValues stieltjes_at_spike(double gamma, const MpParams& params) {
    params.validate();
    const double s2 = params.sigma2;
    const double c = params.c;
    if (!(gamma > s2 * std::sqrt(c))) {
        throw DomainError("Stieltjes closed forms need a supercritical spike (gamma > sigma2 sqrt(c))");
    }
    const double gap = gamma * gamma - s2 * s2 * c;
    const double a = gamma + s2 * c;
    const double b = gamma + s2;
    StieltjesValues v{};
    v.m = -1.0 / a;
    v.m_tilde = -1.0 / b;
    v.m_prime = gamma * gamma / (a * a * gap);
    v.m_tilde_prime = gamma * gamma / (b * b * gap);
    v.tau = 1.0 / gamma;
    v.tau_prime = -1.0 / gap;
    return v;
}

namespace {

void validate_wachter(double c_ell, double c) {
    if (!(c > 0.0 && c < c_ell && c_ell < 1.0)) {
        throw DomainError("Wachter density needs 0 < c < c_ell < 1");
    }
}

}  // namespace

Interval wachter_edges(double c_ell, double c) {
    validate_wachter(c_ell, c);
    const double d = c_ell - c;
    const double scale = d / (c * (1.0 - c_ell) * (1.0 - c_ell));
    const double h = std::sqrt(c_ell + c * c_ell / d - c * c_ell * c_ell / d);
    return {scale * (1.0 - h) * (1.0 - h), scale * (1.0 + h) * (1.0 + h)};
}

double wachter_density(double x, double c_ell, double c) {
    const auto [lo, hi] = wachter_edges(c_ell, c);
    if (!(x > lo && x < hi)) {
        return 0.0;
    }
    return (1.0 / c_ell - 1.0) * std::sqrt((x - lo) * (hi - x)) /
           (2.0 * std::numbers::pi * x * (1.0 + x));
}

}  // namespace covtest::rmt
