#include "brmdd/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace brmdd {

namespace {

constexpr double kParamRelTol = 1e-8;
constexpr int kMaxFitIterations = 200;

/// Coarse log-spaced scan followed by Brent refinement on the bracketing
/// interval. Guards against shallow secondary minima in the 1-D profiles.
double scan_then_brent(const std::function<double(double)>& f, double lo, double hi, int n_scan) {
    double best_x = lo, best_f = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < n_scan; ++i) {
        const double x = lo + (hi - lo) * i / (n_scan - 1);
        const double fx = f(x);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
            best_i = i;
        }
    }
    const double a = lo + (hi - lo) * std::max(0, best_i - 1) / (n_scan - 1);
    const double b = lo + (hi - lo) * std::min(n_scan - 1, best_i + 1) / (n_scan - 1);
    if (a == b) return best_x;
    return brent_minimize(f, a, b, kParamRelTol, kMaxFitIterations);
}

struct Sym2x2 {
    double a, b, c;  // [[a, b], [b, c]]
    std::array<double, 3> inverse() const {
        const double det = a * c - b * b;
        if (det <= 0.0) return {0.0, 0.0, 0.0};
        return {c / det, -b / det, a / det};
    }
};

}  // namespace

double brent_minimize(const std::function<double(double)>& f, double a, double b, double rel_tol,
                      int max_iter) {
    constexpr double golden = 0.3819660112501051;
    const double tiny = 1e-300;
    double x = a + golden * (b - a), w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = rel_tol * std::abs(x) + tiny;
        const double t2 = 2.0 * tol;
        if (std::abs(x - m) <= t2 - 0.5 * (b - a)) break;

        double p = 0.0, q = 0.0, r = 0.0;
        if (std::abs(e) > tol) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0)
                p = -p;
            else
                q = -q;
            r = e;
            e = d;
        }
        if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
            d = p / q;
            const double u = x + d;
            if (u - a < t2 || b - u < t2) d = std::copysign(tol, m - x);
        } else {
            e = (x < m ? b : a) - x;
            d = golden * e;
        }
        const double u = x + (std::abs(d) >= tol ? d : std::copysign(tol, d));
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x)
                b = x;
            else
                a = x;
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return x;
}

LorentzianFit fit_lorentzian(const LsdEstimate& h, double rho_e) {
    std::vector<double> centers, log_rho;
    for (int b = 0; b < h.n_bins(); ++b) {
        if (!h.populated(b)) continue;
        const double r = h.rho(b);
        if (!(r > 0.0)) continue;  // zero-weight bins cannot enter a log fit
        centers.push_back(h.bin_center(b));
        log_rho.push_back(std::log(r));
    }
    const int n = static_cast<int>(centers.size());
    if (n < 8) throw FitError("fit_lorentzian: fewer than 8 usable bins");

    // Amplitude separates out in log space, leaving a 1-D profile in ln Γ:
    // the residual variance around the per-Γ optimal log-amplitude.
    auto profile = [&](double log_gamma) {
        const double gamma = std::exp(log_gamma);
        double mean = 0.0;
        std::vector<double> r(n);
        for (int i = 0; i < n; ++i) {
            r[i] = log_rho[i] - std::log(breit_wigner(centers[i], gamma));
            mean += r[i];
        }
        mean /= n;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += (r[i] - mean) * (r[i] - mean);
        return s;
    };

    const double w = h.window_half_width;
    const double lg = scan_then_brent(profile, std::log(w / 500.0), std::log(8.0 * w), 80);

    LorentzianFit fit;
    fit.gamma = std::exp(lg);
    double mean = 0.0;
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
        r[i] = log_rho[i] - std::log(breit_wigner(centers[i], fit.gamma));
        mean += r[i];
    }
    mean /= n;
    fit.amplitude = std::exp(mean);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (r[i] - mean) * (r[i] - mean);
    fit.residual_rms = std::sqrt(s / n);
    fit.n_bins_used = n;
    fit.xi_e = fit.gamma * rho_e;
    if (!std::isfinite(fit.gamma) || !(fit.gamma > 0.0))
        throw FitError("fit_lorentzian: width fit did not converge");
    return fit;
}

LsdWidthEstimate fit_lsd_width(std::span<const OverlapSpectrum> samples, double coupling_rms,
                               double level_spacing, double beta, const LsdFitOptions& opt) {
    const double rho_e = 1.0 / level_spacing;
    const double delta_c = level_spacing / beta;
    double gamma_hat =
        std::max(golden_rule_gamma(coupling_rms, delta_c), small_q_gamma(coupling_rms, beta));
    if (!(gamma_hat > 0.0))
        throw FitError("fit_lsd_width: zero coupling leaves the width undefined");

    LsdWidthEstimate out;
    for (int it = 1; it <= opt.max_window_iterations; ++it) {
        const double window = opt.window_gammas * gamma_hat;
        int bins = opt.n_bins;
        if (bins == 0) {
            const double expected_levels = samples.size() * 2.0 * window * rho_e;
            bins = std::min(opt.auto_max_bins,
                            static_cast<int>(expected_levels / opt.auto_counts_per_bin));
            if (bins % 2 == 0) --bins;
            bins = std::max(bins, 9);
        }
        out.histogram = lsd_histogram(samples, window, bins, rho_e);
        out.fit = fit_lorentzian(out.histogram, rho_e);
        out.fit.iterations = it;
        if (std::abs(out.fit.gamma - gamma_hat) <= opt.window_rel_tol * gamma_hat) {
            out.fit.window_converged = true;
            return out;
        }
        gamma_hat = out.fit.gamma;
    }
    out.fit.window_converged = false;
    return out;
}

double log_residual_rms(const LsdEstimate& h, const LorentzianFit& f, double energy_cut) {
    double s = 0.0;
    int n = 0;
    for (int b = 0; b < h.n_bins(); ++b) {
        if (!h.populated(b)) continue;
        const double e = h.bin_center(b);
        if (std::abs(e) > energy_cut) continue;
        const double r = h.rho(b);
        if (!(r > 0.0)) continue;
        const double d = std::log(r) - std::log(f.amplitude * breit_wigner(e, f.gamma));
        s += d * d;
        ++n;
    }
    if (n == 0) throw FitError("log_residual_rms: no populated bins in range");
    return std::sqrt(s / n);
}

namespace {

void validate_law_points(std::span<const LawPoint> points, int min_points, bool need_two_decades) {
    if (static_cast<int>(points.size()) < min_points)
        throw FitError("law fit: need at least " + std::to_string(min_points) + " points");
    double qmin = std::numeric_limits<double>::infinity(), qmax = 0.0;
    for (const auto& p : points) {
        if (!(p.q > 0.0) || !(p.value > 0.0))
            throw FitError("law fit: points must have positive q and value");
        qmin = std::min(qmin, p.q);
        qmax = std::max(qmax, p.q);
    }
    if (qmin == qmax) throw FitError("law fit: q values are all identical (unidentifiable)");
    if (need_two_decades && qmax / qmin < 100.0)
        throw FitError("law fit: points must span at least two decades of q");
}

}  // namespace

LawFit fit_xi_e_law(std::span<const LawPoint> points) {
    validate_law_points(points, 4, true);
    const int n = static_cast<int>(points.size());

    // ln xi = ln L1 + ln q + 0.5 ln(1 + (L2 q)^2); ln L1 separates out.
    auto profile = [&](double log_l2) {
        const double l2 = std::exp(log_l2);
        double mean = 0.0;
        std::vector<double> r(n);
        for (int i = 0; i < n; ++i) {
            const double t = l2 * points[i].q;
            r[i] = std::log(points[i].value) - std::log(points[i].q) - 0.5 * std::log1p(t * t);
            mean += r[i];
        }
        mean /= n;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += (r[i] - mean) * (r[i] - mean);
        return s;
    };
    const double log_l2 = scan_then_brent(profile, std::log(1e-4), std::log(1e4), 160);
    const double l2 = std::exp(log_l2);

    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = l2 * points[i].q;
        mean += std::log(points[i].value) - std::log(points[i].q) - 0.5 * std::log1p(t * t);
    }
    mean /= n;
    const double l1 = std::exp(mean);

    LawFit fit;
    fit.names = {"L1", "L2"};
    fit.values = {l1, l2};
    fit.n_points = n;
    Sym2x2 jtj{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const double t = l2 * points[i].q;
        const double t2 = t * t;
        const double m = std::log(l1) + std::log(points[i].q) + 0.5 * std::log1p(t2);
        const double res = std::log(points[i].value) - m;
        fit.rss += res * res;
        const double j2 = t2 / (1.0 + t2);  // d m / d ln L2
        jtj.a += 1.0;
        jtj.b += j2;
        jtj.c += j2 * j2;
    }
    const double sigma2 = fit.rss / std::max(1, n - 2);
    const auto inv = jtj.inverse();
    fit.std_errors = {l1 * std::sqrt(sigma2 * inv[0]), l2 * std::sqrt(sigma2 * inv[2])};
    return fit;
}

LawFit fit_ergodic_ipr_law(std::span<const LawPoint> points) {
    validate_law_points(points, 4, false);
    const int n = static_cast<int>(points.size());

    auto model = [](double d1, double d2, double q) {
        const double t = d2 * q;
        return 1.0 + d1 * q * std::sqrt(1.0 + t * t);
    };
    auto rss_for = [&](double d1, double d2) {
        double s = 0.0;
        for (const auto& p : points) {
            const double r = std::log(p.value) - std::log(model(d1, d2, p.q));
            s += r * r;
        }
        return s;
    };
    // Nested 1-D profiles: optimal ln D1 for each candidate ln D2.
    auto best_d1 = [&](double d2) {
        return std::exp(scan_then_brent([&](double ld1) { return rss_for(std::exp(ld1), d2); },
                                        std::log(1e-4), std::log(1e4), 120));
    };
    const double log_d2 = scan_then_brent(
        [&](double ld2) { return rss_for(best_d1(std::exp(ld2)), std::exp(ld2)); }, std::log(1e-4),
        std::log(1e4), 120);
    const double d2 = std::exp(log_d2);
    const double d1 = best_d1(d2);

    LawFit fit;
    fit.names = {"D1", "D2"};
    fit.values = {d1, d2};
    fit.n_points = n;
    fit.rss = rss_for(d1, d2);
    Sym2x2 jtj{0.0, 0.0, 0.0};
    for (const auto& p : points) {
        const double t = d2 * p.q;
        const double root = std::sqrt(1.0 + t * t);
        const double g = d1 * p.q * root;
        const double j1 = g / (1.0 + g);                       // d m / d ln D1
        const double j2 = d1 * p.q * (t * t / root) / (1.0 + g);  // d m / d ln D2
        jtj.a += j1 * j1;
        jtj.b += j1 * j2;
        jtj.c += j2 * j2;
    }
    const double sigma2 = fit.rss / std::max(1, n - 2);
    const auto inv = jtj.inverse();
    fit.std_errors = {d1 * std::sqrt(sigma2 * inv[0]), d2 * std::sqrt(sigma2 * inv[2])};
    return fit;
}

bool nonergodic_restriction(const ExpPoint& p) { return p.xi_ipr < p.xi_e / 2.7; }

LawFit fit_exponential_rate(std::span<const ExpPoint> points,
                            const std::function<bool(const ExpPoint&)>& restriction,
                            const std::string& restriction_name) {
    std::vector<ExpPoint> kept;
    for (const auto& p : points)
        if (restriction(p)) kept.push_back(p);
    if (kept.size() < 5)
        throw FitError("fit_exponential_rate: only " + std::to_string(kept.size()) +
                       " points pass the restriction, need 5");

    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : kept) {
        if (!(p.x >= 0.0) || !(p.xi_ipr > 0.0))
            throw FitError("fit_exponential_rate: invalid point");
        sxx += p.x * p.x;
        sxy += p.x * std::log(p.xi_ipr);
    }
    if (!(sxx > 0.0)) throw FitError("fit_exponential_rate: all x are zero (unidentifiable)");

    LawFit fit;
    const double c = sxy / sxx;
    fit.names = {"C"};
    fit.values = {c};
    fit.n_points = static_cast<int>(kept.size());
    for (const auto& p : kept) {
        const double r = std::log(p.xi_ipr) - c * p.x;
        fit.rss += r * r;
    }
    const double sigma2 = fit.rss / std::max<std::size_t>(1, kept.size() - 1);
    fit.std_errors = {std::sqrt(sigma2 / sxx)};
    fit.restriction = restriction_name;
    return fit;
}

}  // namespace brmdd
