#pragma once
// Per-realization and disorder-averaged observables: probe-state overlaps,
// local spectral density (LSD) histograms, participation ratios and
// nearest-neighbor level spacings.

#include <cstddef>
#include <span>
#include <vector>

#include "brmdd/errors.hpp"
#include "brmdd/spectral.hpp"

namespace brmdd {

/// (E_n, W_n0) pairs of one realization: the probability W_n0 = |<α_n|0>|² to
/// find the probing state in eigenstate n, against the eigenenergy E_n.
struct OverlapSpectrum {
    std::vector<double> energies;  // ascending, aligned with weights
    std::vector<double> weights;

    double weight_sum() const;
    double sum_squared_weights() const;
    /// Completeness Σ W = 1 and W ∈ [0,1]; throws Error when violated.
    void validate(double tol = 1e-10) const;
};

/// Squared probe components of a decomposition. Probe = basis midpoint.
OverlapSpectrum overlaps(const SpectralDecomposition& d);

/// Inverse participation ratio: reciprocal of the disorder mean of Σ W².
/// (Mean first, reciprocal second.) Throws Error on empty input.
double ipr(std::span<const OverlapSpectrum> samples);

/// Mean eigenvector participation over all eigenstates of one realization:
/// <(Σ_k c_k⁴)⁻¹>_n. Diagnostic only.
double eigenvector_ipr(const SpectralDecomposition& d);

/// Disorder-averaged LSD on a symmetric window around E = 0.
///
/// Two separate running sums are kept per bin: the summed eigenstate weights
/// and the raw eigenvalue counts. The density is the ratio of the two
/// averages scaled by rho_e, evaluated per bin; bins that never saw an
/// eigenvalue are flagged missing, never zero.
struct LsdEstimate {
    double window_half_width = 0.0;
    double rho_e = 1.0;
    int n_realizations_used = 0;
    std::vector<double> bin_edges;        // n_bins + 1, symmetric about 0
    std::vector<double> weighted_sums;    // Σ over realizations of in-bin weights
    std::vector<double> raw_counts;       // Σ over realizations of in-bin eigenvalue counts

    int n_bins() const { return static_cast<int>(raw_counts.size()); }
    double bin_width() const { return 2.0 * window_half_width / n_bins(); }
    double bin_center(int b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
    bool populated(int b) const { return raw_counts[b] > 0.0; }
    int populated_count() const;
    /// Density in bin b; only meaningful when populated(b).
    double rho(int b) const { return rho_e * weighted_sums[b] / raw_counts[b]; }
    /// Σ rho · bin_width over populated bins.
    double integral() const;

    /// Merges another estimate accumulated on identical bins (associative).
    void merge(const LsdEstimate& other);
    /// Structural checks: rho >= 0, symmetric edges, integral <= 1 + tol.
    void validate(double integral_tol = 1e-6) const;
};

/// Accumulates the LSD histogram over the given realizations.
/// Throws Error when fewer than 8 bins end up populated (window too small).
LsdEstimate lsd_histogram(std::span<const OverlapSpectrum> samples, double window_half_width,
                          int n_bins, double rho_e);

/// Mean-normalized nearest-neighbor spacings from the central part of the
/// spectrum (window_fraction of the eigenvalue indices around the median).
struct SpacingSample {
    std::vector<double> spacings;
    double window_fraction = 0.0;

    double mean() const;
    void append(const SpacingSample& other);
};

SpacingSample level_spacings(const SpectralDecomposition& d, double window_fraction);

enum class SpacingReference { poisson, wigner_dyson };

/// Kolmogorov-Smirnov distance between the empirical spacing CDF and the
/// Poisson (1 - e^-S) or Wigner-Dyson (1 - e^(-πS²/4)) reference.
double spacing_distance(const SpacingSample& s, SpacingReference reference);

/// KS distance of an arbitrary sample against a callable CDF.
double ks_distance(std::vector<double> sample, double (*cdf)(double));

}  // namespace brmdd
