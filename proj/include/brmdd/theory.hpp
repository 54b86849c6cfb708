#pragma once
// Closed-form reference curves and regime classification. Pure functions.

#include <cmath>
#include <numbers>
#include <string>

#include "brmdd/errors.hpp"
#include "brmdd/observables.hpp"

namespace brmdd {

/// Empirical law coefficients; defaults are the fitted values this kind of
/// ensemble is known to produce.
struct LawConstants {
    double L1 = 2.01;  ///< ergodic-length law, linear coefficient
    double L2 = 3.16;  ///< ergodic-length law, quadratic crossover
    double D1 = 3.16;  ///< ergodic IPR law
    double D2 = 1.94;  ///< ergodic IPR law
    double C = 3.15;   ///< non-ergodic exponential IPR rate
    double C0 = std::numbers::pi;  ///< localization border constant
};

/// Breit-Wigner (Lorentzian) density of full width Γ, normalized over the
/// real line. Throws Error for gamma <= 0.
double breit_wigner(double energy, double gamma);

/// Ergodic localization length law ξ_e(q) = L1 q sqrt(1 + (L2 q)²).
double xi_e_law(double q, const LawConstants& c = {});

/// Fermi-golden-rule width 2π v² / Δ_c.
double golden_rule_gamma(double coupling_rms, double delta_c);

/// Small-coupling two-state width 2 β v (fit initializer only).
double small_q_gamma(double coupling_rms, double beta);

/// Two-state overlap envelope V² / (V² + E²) for a probe level at 0.
double two_state_overlap(double coupling, double energy);

/// Ergodic IPR law 1 + D1 q sqrt(1 + (D2 q)²).
double ipr_ergodic_law(double q, const LawConstants& c = {});

/// Non-ergodic IPR law exp(C q √β).
double ipr_nonergodic_law(double q, double beta, const LawConstants& c = {});

enum class Regime { perturbative, localized_nonergodic, localized_ergodic };

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct RegimeDecision {
    Regime label;
    double x;                    ///< q √β = v/Δ_c
    double localization_border;  ///< 1/C0
    double ergodicity_border;    ///< ln(2π q²)/C; NaN when 2π q² <= 1
};

/// Classifies a (q, β) point. Ties on a border take the less chaotic label;
/// when 2π q² <= 1 the ergodicity test reduces to the localization border.
RegimeDecision classify_regime(double q, double beta, const LawConstants& c = {});

/// Reference spacing density: e^-S or (πS/2) e^(-πS²/4).
double reference_spacing_pdf(double s, SpacingReference which);
double reference_spacing_cdf(double s, SpacingReference which);

}  // namespace brmdd
