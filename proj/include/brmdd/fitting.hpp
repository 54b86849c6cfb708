#pragma once
// Nonlinear least squares: Lorentzian width from LSD histograms and the
// empirical scaling-law coefficients from sweep tables. All fits minimize
// log-space residuals because the data spans decades.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "brmdd/ensemble.hpp"
#include "brmdd/errors.hpp"
#include "brmdd/observables.hpp"
#include "brmdd/theory.hpp"

namespace brmdd {

struct LorentzianFit {
    double gamma = 0.0;         ///< fitted full width
    double amplitude = 1.0;     ///< free scale (absorbs window truncation)
    double residual_rms = 0.0;  ///< RMS of log residuals over the bins used
    int n_bins_used = 0;
    double xi_e = 0.0;          ///< gamma * rho_e
    int iterations = 1;         ///< window-refinement rounds actually run
    bool window_converged = true;
};

/// Two-parameter (Γ, amplitude) log-space fit of a Breit-Wigner profile to
/// the populated bins of one histogram. Requires >= 8 populated bins.
LorentzianFit fit_lorentzian(const LsdEstimate& h, double rho_e);

struct LsdFitOptions {
    // 0 = counts-aware automatic choice: as many odd bins as keep the
    // expected background occupancy above auto_counts_per_bin, clamped to
    // [9, auto_max_bins]. Histograms with starved bins bias a log-space fit
    // low (the log of a 1-2 sample mean), so bins follow the statistics.
    int n_bins = 0;
    int auto_max_bins = 41;
    double auto_counts_per_bin = 5.0;
    double window_gammas = 5.0;  // half-window in units of the current width
    int max_window_iterations = 5;
    double window_rel_tol = 0.05;
};

struct LsdWidthEstimate {
    LorentzianFit fit;
    LsdEstimate histogram;  // histogram behind the final fit
};

/// Full width-estimation protocol: start from the theory width
/// max(golden-rule, two-state), histogram the samples on a ±(window_gammas·Γ̂)
/// window, fit, rebuild the window at the new width and repeat until the
/// width moves by less than window_rel_tol or the iteration cap is reached.
LsdWidthEstimate fit_lsd_width(std::span<const OverlapSpectrum> samples, double coupling_rms,
                               double level_spacing, double beta, const LsdFitOptions& opt = {});

/// Log-space RMS residual of a fit restricted to |E| <= energy_cut.
double log_residual_rms(const LsdEstimate& h, const LorentzianFit& f, double energy_cut);

struct LawPoint {
    double q;
    double value;  // xi_e or xi_ipr depending on the law
};

struct LawFit {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> std_errors;
    int n_points = 0;
    double rss = 0.0;             ///< residual sum of squares in log space
    std::string restriction;      ///< human-readable filter that was applied
};

/// Fits (L1, L2) of xi_e = L1 q sqrt(1 + (L2 q)²). Points must span at least
/// two decades of q.
LawFit fit_xi_e_law(std::span<const LawPoint> points);

/// Fits (D1, D2) of xi_ipr = 1 + D1 q sqrt(1 + (D2 q)²).
LawFit fit_ergodic_ipr_law(std::span<const LawPoint> points);

struct ExpPoint {
    double x;       ///< q √β
    double xi_ipr;
    double xi_e;    ///< used by the default restriction
};

/// Default non-ergodic restriction: xi_ipr < xi_e / 2.7.
bool nonergodic_restriction(const ExpPoint& p);

/// Fits the rate C of xi_ipr = exp(C x) as a through-origin slope of
/// ln xi_ipr against x, over the points accepted by `restriction`.
/// Requires >= 5 accepted points. Callers passing a custom predicate should
/// also pass a descriptive name; it is recorded in the fit metadata.
LawFit fit_exponential_rate(std::span<const ExpPoint> points,
                            const std::function<bool(const ExpPoint&)>& restriction =
                                nonergodic_restriction,
                            const std::string& restriction_name = "xi_ipr < xi_e/2.7");

/// Derivative-free 1-D minimizer (Brent). Exposed for reuse in tests.
double brent_minimize(const std::function<double(double)>& f, double a, double b,
                      double rel_tol = 1e-10, int max_iter = 200);

}  // namespace brmdd
