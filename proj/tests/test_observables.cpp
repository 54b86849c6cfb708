#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "brmdd/ensemble.hpp"
#include "brmdd/observables.hpp"
#include "brmdd/rng.hpp"
#include "brmdd/spectral.hpp"
#include "brmdd/theory.hpp"

using namespace brmdd;

namespace {

EnsembleParams make(int K, int b, double v, std::uint64_t seed = 1, int realizations = 4) {
    EnsembleParams p;
    p.half_size = K;
    p.band = b;
    p.coupling_rms = v;
    p.master_seed = seed;
    p.n_realizations = realizations;
    return p;
}

// Synthetic disorder realizations whose in-bin mean weight follows an exact
// Breit-Wigner profile over a uniform spectrum: eigenvalues i.i.d. uniform on
// [-span, span], each carrying weight bw(E) * (2 span / n_levels). With
// rho_e = n_levels / (2 span) the LSD estimate converges to bw(E) pointwise.
std::vector<OverlapSpectrum> synthetic_lorentzian(double gamma, double span, int n_levels,
                                                  int n_realizations, std::uint64_t seed,
                                                  double* rho_e_out) {
    std::vector<OverlapSpectrum> samples(n_realizations);
    Xoshiro256 rng(seed);
    const double per_level = 2.0 * span / n_levels;
    for (auto& s : samples) {
        s.energies.resize(n_levels);
        for (auto& e : s.energies) e = rng.uniform_symmetric(span);
        std::sort(s.energies.begin(), s.energies.end());
        s.weights.resize(n_levels);
        for (int i = 0; i < n_levels; ++i)
            s.weights[i] = breit_wigner(s.energies[i], gamma) * per_level;
    }
    *rho_e_out = n_levels / (2.0 * span);
    return samples;
}

}  // namespace

TEST_CASE("overlaps of a zero-coupling realization concentrate at E = 0") {
    const auto d = diagonalize(build_matrix(make(20, 5, 0.0), 0));
    const auto s = overlaps(d);
    int at_zero = -1;
    for (int j = 0; j < d.n; ++j)
        if (std::abs(s.energies[j]) < 1e-14) at_zero = j;
    REQUIRE(at_zero >= 0);
    CHECK(s.weights[at_zero] == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 0; j < d.n; ++j)
        if (j != at_zero) CHECK(s.weights[j] < 1e-12);
}

TEST_CASE("two-state overlaps") {
    // symmetric resonance: half-half
    auto s = overlaps(diagonalize_dense(2, {0.0, 1.0, 1.0, 0.0}));
    CHECK(s.weights[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(s.weights[1] == doctest::Approx(0.5).epsilon(1e-13));

    // detuned pair: exact weights equal the two-state envelope evaluated at
    // the perturbed eigenenergies
    const double w = 0.4, eps = 0.8;  // eps = 2w
    s = overlaps(diagonalize_dense(2, {0.0, w, w, eps}));
    CHECK(s.weight_sum() == doctest::Approx(1.0).epsilon(1e-13));
    for (int j = 0; j < 2; ++j)
        CHECK(s.weights[j] ==
              doctest::Approx(two_state_overlap(w, s.energies[j])).epsilon(1e-12));
}

TEST_CASE("overlap completeness on ensemble realizations") {
    const auto p = make(30, 8, 0.6, 21, 3);
    for (int r = 0; r < p.n_realizations; ++r) {
        const auto s = overlaps(diagonalize(build_matrix(p, r)));
        CHECK(std::abs(s.weight_sum() - 1.0) <= 1e-10);
        CHECK_NOTHROW(s.validate());
    }
}

TEST_CASE("ipr trivial cases") {
    // zero coupling: exactly one eigenstate carries the probe
    std::vector<OverlapSpectrum> zero = {overlaps(diagonalize(build_matrix(make(12, 3, 0.0), 0)))};
    CHECK(ipr(zero) == doctest::Approx(1.0).epsilon(1e-12));

    // uniform spreading over M = 8 states
    OverlapSpectrum uniform;
    for (int i = 0; i < 8; ++i) {
        uniform.energies.push_back(i);
        uniform.weights.push_back(1.0 / 8.0);
    }
    std::vector<OverlapSpectrum> u = {uniform};
    CHECK(ipr(u) == 8.0);

    // hand-computed disorder mean: sum W^2 of 0.5 and 1.0 -> 1/0.75
    OverlapSpectrum half;
    half.energies = {0.0, 1.0};
    half.weights = {0.5, 0.5};
    OverlapSpectrum full;
    full.energies = {0.0};
    full.weights = {1.0};
    std::vector<OverlapSpectrum> two = {half, full};
    CHECK(ipr(two) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

    std::vector<OverlapSpectrum> none;
    CHECK_THROWS_AS(ipr(none), Error);
}

TEST_CASE("ipr uses mean-then-reciprocal, not mean of reciprocals") {
    OverlapSpectrum a, b;
    a.energies = {0.0, 1.0};
    a.weights = {0.99, 0.01};  // sum W^2 = 0.9802
    b.energies = {0.0, 1.0};
    b.weights = {0.5, 0.5};  // sum W^2 = 0.5
    std::vector<OverlapSpectrum> both = {a, b};
    const double mean_then_rec = 2.0 / (0.9802 + 0.5);
    const double rec_then_mean = 0.5 * (1 / 0.9802 + 1 / 0.5);
    CHECK(ipr(both) == doctest::Approx(mean_then_rec).epsilon(1e-14));
    CHECK(std::abs(ipr(both) - rec_then_mean) > 0.1);
}

TEST_CASE("eigenvector ipr") {
    CHECK(eigenvector_ipr(diagonalize(build_matrix(make(10, 2, 0.0), 0))) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // 4x4 Hadamard columns: every eigenvector uniform over 4 components
    SpectralDecomposition d;
    d.n = 4;
    d.eigenvalues = {0, 1, 2, 3};
    const double h = 0.5;
    d.eigenvectors = {h, h, h, h, h, -h, h, -h, h, h, -h, -h, h, -h, -h, h};
    CHECK(eigenvector_ipr(d) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("eigenvector spreading grows with coupling") {
    double last = 0.0;
    for (double v : {0.2, 1.0, 5.0}) {
        const auto p = make(40, 40, v, 33, 6);
        double acc = 0.0;
        for (int r = 0; r < p.n_realizations; ++r)
            acc += eigenvector_ipr(diagonalize(build_matrix(p, r)));
        acc /= p.n_realizations;
        CHECK(acc > last);
        last = acc;
    }
}

TEST_CASE("lsd histogram recovers an exact Lorentzian profile") {
    const double gamma = 0.7;
    double rho_e = 0.0;
    const auto samples = synthetic_lorentzian(gamma, 10.0, 400, 250, 99, &rho_e);
    const auto h = lsd_histogram(samples, 5 * gamma, 41, rho_e);
    CHECK_NOTHROW(h.validate());
    CHECK(h.n_realizations_used == 250);
    int checked = 0;
    for (int b = 0; b < h.n_bins(); ++b) {
        if (!h.populated(b)) continue;
        // in-bin averaging flattens the profile slightly; compare against the
        // bin-averaged reference with a small sampling allowance
        const double expected = breit_wigner(h.bin_center(b), gamma);
        CHECK(h.rho(b) == doctest::Approx(expected).epsilon(0.08));
        ++checked;
    }
    CHECK(checked >= 35);
}

TEST_CASE("lsd histogram of a zero-coupling ensemble is a delta spike") {
    const auto p = make(30, 5, 0.0, 3, 10);
    std::vector<OverlapSpectrum> samples;
    for (int r = 0; r < p.n_realizations; ++r)
        samples.push_back(overlaps(diagonalize(build_matrix(p, r))));
    const auto h = lsd_histogram(samples, 2.0, 9, 1.0);
    const int center = h.n_bins() / 2;
    for (int b = 0; b < h.n_bins(); ++b) {
        if (b == center)
            CHECK(h.weighted_sums[b] == doctest::Approx(10.0).epsilon(1e-12));
        else
            CHECK(h.weighted_sums[b] <= 1e-12);
    }
}

TEST_CASE("lsd estimate uses the ratio of averages, not the average of ratios") {
    // Construct two realizations where the two orders disagree in the center
    // bin: (1 + 0.2) / (1 + 2) = 0.4 versus mean(1/1, 0.2/2) = 0.55.
    OverlapSpectrum r1, r2;
    r1.energies = {0.0};
    r1.weights = {1.0};
    r2.energies = {-0.01, 0.01};
    r2.weights = {0.1, 0.1};
    // pad both with far levels so 8+ bins are populated
    for (int i = 1; i <= 4; ++i) {
        for (double sgn : {-1.0, 1.0}) {
            r1.energies.push_back(sgn * i * 0.2);
            r1.weights.push_back(0.0);
            r2.energies.push_back(sgn * (i * 0.2 + 0.02));
            r2.weights.push_back(0.0);
        }
    }
    std::vector<OverlapSpectrum> samples = {r1, r2};
    const auto h = lsd_histogram(samples, 1.0, 9, 1.0);
    const int center = h.n_bins() / 2;
    CHECK(h.rho(center) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(std::abs(h.rho(center) - 0.55) > 0.1);
}

TEST_CASE("lsd accumulation is order-insensitive and batch-mergeable") {
    double rho_e = 0.0;
    auto samples = synthetic_lorentzian(0.5, 5.0, 100, 60, 7, &rho_e);
    const auto whole = lsd_histogram(samples, 2.0, 11, rho_e);

    // permutation of the realization list
    std::vector<OverlapSpectrum> shuffled = samples;
    std::mt19937 urbg(4);
    std::shuffle(shuffled.begin(), shuffled.end(), urbg);
    const auto permuted = lsd_histogram(shuffled, 2.0, 11, rho_e);
    for (int b = 0; b < whole.n_bins(); ++b) {
        CHECK(permuted.raw_counts[b] == whole.raw_counts[b]);
        CHECK(permuted.weighted_sums[b] ==
              doctest::Approx(whole.weighted_sums[b]).epsilon(1e-12));
    }

    // split into two batches and merge the running sums
    std::vector<OverlapSpectrum> first(samples.begin(), samples.begin() + 23);
    std::vector<OverlapSpectrum> second(samples.begin() + 23, samples.end());
    auto merged = lsd_histogram(first, 2.0, 11, rho_e);
    merged.merge(lsd_histogram(second, 2.0, 11, rho_e));
    CHECK(merged.n_realizations_used == whole.n_realizations_used);
    for (int b = 0; b < whole.n_bins(); ++b) {
        CHECK(merged.raw_counts[b] == whole.raw_counts[b]);
        CHECK(merged.weighted_sums[b] ==
              doctest::Approx(whole.weighted_sums[b]).epsilon(1e-12));
    }

    LsdEstimate incompatible = whole;
    incompatible.rho_e *= 2;
    CHECK_THROWS_AS(merged.merge(incompatible), Error);
}

TEST_CASE("lsd histogram rejects starved windows") {
    OverlapSpectrum sparse;
    sparse.energies = {-0.5, 0.0, 0.5};
    sparse.weights = {0.1, 0.8, 0.1};
    std::vector<OverlapSpectrum> samples = {sparse};
    CHECK_THROWS_AS(lsd_histogram(samples, 1.0, 41, 1.0), Error);
    CHECK_THROWS_AS(lsd_histogram(samples, 0.0, 41, 1.0), Error);
    CHECK_THROWS_AS(lsd_histogram(samples, 1.0, 4, 1.0), Error);
}

TEST_CASE("half of the Lorentzian mass sits inside one half-width") {
    const double gamma = 0.9;
    double rho_e = 0.0;
    const auto samples = synthetic_lorentzian(gamma, 12.0, 600, 300, 17, &rho_e);
    const auto h = lsd_histogram(samples, 5 * gamma, 45, rho_e);
    double inside = 0.0;
    for (int b = 0; b < h.n_bins(); ++b)
        if (h.populated(b) && std::abs(h.bin_center(b)) <= gamma / 2)
            inside += h.rho(b) * h.bin_width();
    CHECK(inside == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("level spacings") {
    SpectralDecomposition d;
    d.n = 64;
    for (int i = 0; i < 64; ++i) d.eigenvalues.push_back(0.25 * i);
    const auto s = level_spacings(d, 0.5);
    CHECK(static_cast<int>(s.spacings.size()) == 31);
    for (double x : s.spacings) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.mean() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(level_spacings(d, 0.0), Error);
    CHECK_THROWS_AS(level_spacings(d, 1.5), Error);
    CHECK_THROWS_AS(level_spacings(d, 0.1), Error);  // 6 levels < 16

    SpectralDecomposition flat;
    flat.n = 32;
    flat.eigenvalues.assign(32, 1.0);
    CHECK_THROWS_AS(level_spacings(flat, 1.0), Error);
}

TEST_CASE("uncoupled spectra have Poisson spacings") {
    const auto p = make(100, 1, 0.0, 5, 110);
    SpacingSample pooled;
    pooled.window_fraction = 0.5;
    for (int r = 0; r < p.n_realizations; ++r)
        pooled.append(level_spacings(diagonalize(build_matrix(p, r)), 0.5));
    REQUIRE(pooled.spacings.size() >= 10000);
    CHECK(std::abs(pooled.mean() - 1.0) < 0.02);
    CHECK(spacing_distance(pooled, SpacingReference::poisson) < 0.03);
    CHECK(spacing_distance(pooled, SpacingReference::poisson) <
          spacing_distance(pooled, SpacingReference::wigner_dyson));
}

TEST_CASE("ks distance against quantile-constructed references") {
    SpacingSample exp_sample, wd_sample;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        exp_sample.spacings.push_back(-std::log(1.0 - u));
        wd_sample.spacings.push_back(std::sqrt(-4.0 / std::numbers::pi * std::log(1.0 - u)));
    }
    CHECK(spacing_distance(exp_sample, SpacingReference::poisson) < 1e-3);
    CHECK(spacing_distance(wd_sample, SpacingReference::wigner_dyson) < 1e-3);
    CHECK(spacing_distance(exp_sample, SpacingReference::poisson) <
          spacing_distance(exp_sample, SpacingReference::wigner_dyson));
    CHECK(spacing_distance(wd_sample, SpacingReference::wigner_dyson) <
          spacing_distance(wd_sample, SpacingReference::poisson));

    SpacingSample tiny;
    tiny.spacings.assign(10, 1.0);
    CHECK_THROWS_AS(spacing_distance(tiny, SpacingReference::poisson), Error);
}
