#pragma once

// Closed-form Marcenko-Pastur quantities for the white-noise-plus-spikes
// model: bulk edges and density, the spike map and its inverse, Stieltjes
// transform values at spike locations and the Wachter density of Fisher
// matrices. Every function here is pure.

namespace covtest::rmt {

/// Marcenko-Pastur law parameters: noise power and dimension-to-sample ratio.
struct MpParams {
    double sigma2 = 1.0;
    double c = 1.0;

    /// Throws DomainError unless sigma2 > 0 and c > 0 (both finite).
    void validate() const;
};

struct Interval {
    double lower;
    double upper;
};

/// Spike strength together with its limiting sample-eigenvalue location.
struct SpikeLocation {
    double gamma;
    double location;
};

/// Stieltjes-type transforms at the location of a supercritical spike.
struct StieltjesValues {
    double m;
    double m_tilde;
    double m_prime;
    double m_tilde_prime;
    double tau;
    double tau_prime;
};

/// Support edges sigma2 (1 -/+ sqrt(c))^2.
Interval mp_edges(const MpParams& params);

/// Continuous part of the Marcenko-Pastur density; zero outside the support.
double mp_density(double x, const MpParams& params);

/// Mass of the atom at zero, (1 - 1/c)^+.
double mp_atom_mass(const MpParams& params);

/// Smallest spike strength whose sample eigenvalue separates from the bulk,
/// sigma2 sqrt(c).
double detection_threshold(const MpParams& params);

/// Limit location of the sample eigenvalue carried by a spike of strength
/// gamma. Subcritical spikes stick to the upper bulk edge.
SpikeLocation spike_forward(double gamma, const MpParams& params);

/// Inverse of spike_forward on the supercritical branch. Eigenvalues at or
/// below the bulk edge map to the clamp value sigma2 sqrt(c).
double spike_inverse(double lambda, const MpParams& params);

/// Real solution w(x) of phi(w) = x for x outside [x-, x+], selected as the
/// preimage where phi is increasing. phi(w) = w (1 - sigma2 c / (sigma2 - w)).
/// Throws DomainError for x inside the closed support.
double w_outside_support(double x, const MpParams& params);

/// Closed forms of m, m~, m', m~', tau, tau' at phi(gamma + sigma2).
/// Requires gamma > sigma2 sqrt(c).
StieltjesValues stieltjes_at_spike(double gamma, const MpParams& params);

/// Support of the Wachter density for group ratio c_ell and pooled ratio c.
Interval wachter_edges(double c_ell, double c);

/// Limiting spectral density governing R_ell^{-1} R (shifted and scaled),
/// zero outside its support. Requires 0 < c < c_ell < 1.
double wachter_density(double x, double c_ell, double c);

}  // namespace covtest::rmt
