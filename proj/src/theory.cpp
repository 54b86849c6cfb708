#include "brmdd/theory.hpp"

#include <cmath>
#include <limits>

namespace brmdd {

using std::numbers::pi;

double breit_wigner(double energy, double gamma) {
    if (!(gamma > 0.0)) throw Error("breit_wigner: gamma must be positive");
    return (gamma / (2.0 * pi)) / (energy * energy + 0.25 * gamma * gamma);
}

double xi_e_law(double q, const LawConstants& c) {
    return c.L1 * q * std::sqrt(1.0 + (c.L2 * q) * (c.L2 * q));
}

double golden_rule_gamma(double coupling_rms, double delta_c) {
    if (!(delta_c > 0.0)) throw Error("golden_rule_gamma: delta_c must be positive");
    return 2.0 * pi * coupling_rms * coupling_rms / delta_c;
}

double small_q_gamma(double coupling_rms, double beta) {
    if (!(beta > 0.0)) throw Error("small_q_gamma: beta must be positive");
    return 2.0 * beta * coupling_rms;
}

double two_state_overlap(double coupling, double energy) {
    const double v2 = coupling * coupling;
    if (v2 == 0.0) return energy == 0.0 ? 1.0 : 0.0;
    return v2 / (v2 + energy * energy);
}

double ipr_ergodic_law(double q, const LawConstants& c) {
    return 1.0 + c.D1 * q * std::sqrt(1.0 + (c.D2 * q) * (c.D2 * q));
}

double ipr_nonergodic_law(double q, double beta, const LawConstants& c) {
    if (!(beta > 0.0)) throw Error("ipr_nonergodic_law: beta must be positive");
    return std::exp(c.C * q * std::sqrt(beta));
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::perturbative: return "perturbative";
        case Regime::localized_nonergodic: return "localized_nonergodic";
        case Regime::localized_ergodic: return "localized_ergodic";
    }
    return "?";
}

Regime regime_from_string(const std::string& s) {
    if (s == "perturbative") return Regime::perturbative;
    if (s == "localized_nonergodic") return Regime::localized_nonergodic;
    if (s == "localized_ergodic") return Regime::localized_ergodic;
    throw Error("unknown regime label: " + s);
}

RegimeDecision classify_regime(double q, double beta, const LawConstants& c) {
    if (!(q >= 0.0)) throw Error("classify_regime: q must be >= 0");
    if (!(beta > 0.0) || beta > 2.0) throw Error("classify_regime: beta must be in (0, 2]");

    RegimeDecision r;
    r.x = q * std::sqrt(beta);
    r.localization_border = 1.0 / c.C0;
    const double two_pi_q2 = 2.0 * pi * q * q;
    r.ergodicity_border =
        two_pi_q2 > 1.0 ? std::log(two_pi_q2) / c.C : std::numeric_limits<double>::quiet_NaN();

    if (r.x <= r.localization_border) {
        r.label = Regime::perturbative;
    } else if (two_pi_q2 <= 1.0) {
        // The ergodicity test degenerates to the localization border here:
        // with xi_e below one level there is no room for a non-ergodic gap.
        r.label = Regime::localized_ergodic;
    } else if (r.x > r.ergodicity_border) {
        r.label = Regime::localized_ergodic;
    } else {
        r.label = Regime::localized_nonergodic;
    }
    return r;
}

double reference_spacing_pdf(double s, SpacingReference which) {
    if (s < 0.0) return 0.0;
    if (which == SpacingReference::poisson) return std::exp(-s);
    return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
}

double reference_spacing_cdf(double s, SpacingReference which) {
    if (s <= 0.0) return 0.0;
    if (which == SpacingReference::poisson) return 1.0 - std::exp(-s);
    return 1.0 - std::exp(-0.25 * pi * s * s);
}

}  // namespace brmdd
