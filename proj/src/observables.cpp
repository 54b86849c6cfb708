#include "brmdd/observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brmdd/theory.hpp"

namespace brmdd {

double OverlapSpectrum::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double OverlapSpectrum::sum_squared_weights() const {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return s;
}

void OverlapSpectrum::validate(double tol) const {
    if (energies.size() != weights.size()) throw Error("overlap spectrum size mismatch");
    for (double w : weights)
        if (!(w >= 0.0) || w > 1.0 + tol) throw Error("overlap weight outside [0, 1]");
    if (std::abs(weight_sum() - 1.0) > tol)
        throw Error("overlap completeness violated: sum = " + std::to_string(weight_sum()));
}

OverlapSpectrum overlaps(const SpectralDecomposition& d) {
    const int probe = (d.n - 1) / 2;  // basis index 0 sits at the midpoint
    OverlapSpectrum s;
    s.energies = d.eigenvalues;
    s.weights.resize(d.n);
    for (int j = 0; j < d.n; ++j) {
        const double c = d.component(probe, j);
        s.weights[j] = c * c;
    }
    s.validate();
    return s;
}

double ipr(std::span<const OverlapSpectrum> samples) {
    if (samples.empty()) throw Error("ipr: no realizations");
    double acc = 0.0;
    for (const auto& s : samples) acc += s.sum_squared_weights();
    return static_cast<double>(samples.size()) / acc;
}

double eigenvector_ipr(const SpectralDecomposition& d) {
    double acc = 0.0;
    for (int j = 0; j < d.n; ++j) {
        double s4 = 0.0;
        const double* col = d.eigenvectors.data() + static_cast<std::size_t>(j) * d.n;
        for (int k = 0; k < d.n; ++k) {
            const double c2 = col[k] * col[k];
            s4 += c2 * c2;
        }
        acc += 1.0 / s4;
    }
    return acc / d.n;
}

int LsdEstimate::populated_count() const {
    int c = 0;
    for (int b = 0; b < n_bins(); ++b)
        if (populated(b)) ++c;
    return c;
}

double LsdEstimate::integral() const {
    double s = 0.0;
    for (int b = 0; b < n_bins(); ++b)
        if (populated(b)) s += rho(b) * bin_width();
    return s;
}

void LsdEstimate::merge(const LsdEstimate& other) {
    if (other.n_bins() != n_bins() || other.window_half_width != window_half_width ||
        other.rho_e != rho_e)
        throw Error("cannot merge LSD estimates with different binning");
    for (int b = 0; b < n_bins(); ++b) {
        weighted_sums[b] += other.weighted_sums[b];
        raw_counts[b] += other.raw_counts[b];
    }
    n_realizations_used += other.n_realizations_used;
}

void LsdEstimate::validate(double integral_tol) const {
    if (bin_edges.size() != weighted_sums.size() + 1 || weighted_sums.size() != raw_counts.size())
        throw Error("LSD estimate: inconsistent bin arrays");
    const int nb = n_bins();
    for (int b = 0; b <= nb; ++b) {
        const double mirrored = -bin_edges[nb - b];
        if (std::abs(bin_edges[b] - mirrored) > 1e-12 * window_half_width)
            throw Error("LSD bins not symmetric about E = 0");
    }
    for (int b = 0; b < nb; ++b) {
        if (weighted_sums[b] < 0.0 || raw_counts[b] < 0.0) throw Error("negative LSD sums");
        if (populated(b) && rho(b) < 0.0) throw Error("negative LSD density");
    }
    if (integral() > 1.0 + integral_tol)
        throw Error("LSD integral exceeds 1: " + std::to_string(integral()));
}

LsdEstimate lsd_histogram(std::span<const OverlapSpectrum> samples, double window_half_width,
                          int n_bins, double rho_e) {
    if (!(window_half_width > 0.0) || !std::isfinite(window_half_width))
        throw Error("lsd_histogram: window_half_width must be positive");
    if (n_bins < 8) throw Error("lsd_histogram: need at least 8 bins");
    if (!(rho_e > 0.0)) throw Error("lsd_histogram: rho_e must be positive");
    if (samples.empty()) throw Error("lsd_histogram: no realizations");

    LsdEstimate h;
    h.window_half_width = window_half_width;
    h.rho_e = rho_e;
    h.n_realizations_used = static_cast<int>(samples.size());
    h.bin_edges.resize(n_bins + 1);
    const double width = 2.0 * window_half_width / n_bins;
    for (int b = 0; b <= n_bins; ++b) h.bin_edges[b] = -window_half_width + b * width;
    h.weighted_sums.assign(n_bins, 0.0);
    h.raw_counts.assign(n_bins, 0.0);

    for (const auto& s : samples) {
        for (std::size_t i = 0; i < s.energies.size(); ++i) {
            const double e = s.energies[i];
            if (e < -window_half_width || e > window_half_width) continue;
            int b = static_cast<int>((e + window_half_width) / width);
            if (b == n_bins) b = n_bins - 1;  // eigenvalue exactly on the top edge
            h.weighted_sums[b] += s.weights[i];
            h.raw_counts[b] += 1.0;
        }
    }

    if (h.populated_count() < 8)
        throw Error("lsd_histogram: only " + std::to_string(h.populated_count()) +
                    " populated bins; window too small for these statistics");
    return h;
}

double SpacingSample::mean() const {
    if (spacings.empty()) return 0.0;
    double s = 0.0;
    for (double x : spacings) s += x;
    return s / static_cast<double>(spacings.size());
}

void SpacingSample::append(const SpacingSample& other) {
    spacings.insert(spacings.end(), other.spacings.begin(), other.spacings.end());
}

SpacingSample level_spacings(const SpectralDecomposition& d, double window_fraction) {
    if (!(window_fraction > 0.0) || window_fraction > 1.0)
        throw Error("level_spacings: window_fraction must be in (0, 1]");
    const int n = d.n;
    const int m = std::min(n, static_cast<int>(std::lround(n * window_fraction)));
    if (m < 16) throw Error("level_spacings: window holds fewer than 16 levels");

    const int start = (n - m) / 2;
    SpacingSample s;
    s.window_fraction = window_fraction;
    s.spacings.resize(m - 1);
    double mean = 0.0;
    for (int i = 0; i < m - 1; ++i) {
        s.spacings[i] = d.eigenvalues[start + i + 1] - d.eigenvalues[start + i];
        mean += s.spacings[i];
    }
    mean /= (m - 1);
    if (!(mean > 0.0)) throw Error("level_spacings: degenerate spectrum");
    for (double& x : s.spacings) x /= mean;
    return s;
}

double ks_distance(std::vector<double> sample, double (*cdf)(double)) {
    if (sample.empty()) throw Error("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double spacing_distance(const SpacingSample& s, SpacingReference reference) {
    if (s.spacings.size() < 16) throw Error("spacing_distance: need at least 16 spacings");
    return ks_distance(s.spacings, reference == SpacingReference::poisson
                                       ? +[](double x) { return reference_spacing_cdf(x, SpacingReference::poisson); }
                                       : +[](double x) { return reference_spacing_cdf(x, SpacingReference::wigner_dyson); });
}

}  // namespace brmdd
