#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "brmdd/ensemble.hpp"
#include "brmdd/observables.hpp"
#include "brmdd/theory.hpp"

using namespace brmdd;

namespace {

EnsembleParams make(int K, int b, double v, double delta = 1.0, std::uint64_t seed = 1,
                    int realizations = 4) {
    EnsembleParams p;
    p.half_size = K;
    p.band = b;
    p.coupling_rms = v;
    p.level_spacing = delta;
    p.master_seed = seed;
    p.n_realizations = realizations;
    return p;
}

}  // namespace

TEST_CASE("derived parameters") {
    auto d = derived_params(make(100, 100, 0.45));
    CHECK(d.beta == doctest::Approx(1.0));
    CHECK(d.delta_c == doctest::Approx(1.0));
    CHECK(d.q == doctest::Approx(0.45));

    d = derived_params(make(100, 4, 0.3));
    CHECK(d.beta == doctest::Approx(0.04));
    CHECK(d.delta_c == doctest::Approx(25.0));

    // K=64, b=1, v=0.5: beta = 1/64, delta_c = 64, q = 0.5/(64*0.125)
    d = derived_params(make(64, 1, 0.5));
    CHECK(d.beta == doctest::Approx(1.0 / 64.0));
    CHECK(d.delta_c == doctest::Approx(64.0));
    CHECK(d.q == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(make(0, 1, 0.1).validate(), Error);
    CHECK_THROWS_AS(make(10, 0, 0.1).validate(), Error);
    CHECK_THROWS_AS(make(10, 21, 0.1).validate(), Error);   // b > 2K
    CHECK_THROWS_AS(make(10, 5, -0.1).validate(), Error);
    CHECK_THROWS_AS(make(10, 5, 0.1, 0.0).validate(), Error);
    CHECK_THROWS_AS(make(10, 5, 0.1, 1.0, 1, 0).validate(), Error);
    CHECK_FALSE(make(10, 10, 0.1).validate());
    CHECK(make(10, 15, 0.1).validate());  // beta > 1: legal but flagged
}

TEST_CASE("matrix structure invariants") {
    const auto p = make(20, 5, 0.7, 1.5, 42);
    for (int r = 0; r < p.n_realizations; ++r) {
        const auto m = build_matrix(p, r);
        CHECK(m.dim() == 41);
        CHECK_NOTHROW(check_matrix_invariants(m, p));
        CHECK(m.element(0, 0) == 0.0);
        // spot checks on top of the full invariant scan
        CHECK(m.element(-3, 1) == m.element(1, -3));
        CHECK(m.element(-20, -10) == 0.0);  // |m-k| = 10 > b
        for (int k = -20; k <= 20; ++k) CHECK(std::abs(m.element(k, k)) <= 20 * 1.5);
    }
}

TEST_CASE("zero coupling gives a purely diagonal matrix") {
    const auto m = build_matrix(make(15, 4, 0.0), 0);
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            if (i != j) CHECK(m.at(i, j) == 0.0);
}

TEST_CASE("realizations are deterministic and streams do not collide") {
    const auto p = make(12, 3, 0.5, 1.0, 123, 8);
    const auto a = build_matrix(p, 3);
    const auto b = build_matrix(p, 3);
    CHECK(a.entries == b.entries);  // bit-identical

    const auto c = build_matrix(p, 4);
    CHECK(a.entries != c.entries);

    auto p2 = p;
    p2.master_seed = 124;
    CHECK(build_matrix(p2, 3).entries != a.entries);
}

TEST_CASE("in-band coupling moments match the uniform law") {
    const auto p = make(40, 10, 0.3, 1.0, 7, 200);
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    for (int r = 0; r < p.n_realizations; ++r) {
        const auto m = build_matrix(p, r);
        for (int i = 0; i < m.dim(); ++i) {
            for (int j = i + 1; j <= std::min(m.dim() - 1, i + p.band); ++j) {
                sum += m.at(i, j);
                sum2 += m.at(i, j) * m.at(i, j);
                ++n;
            }
        }
    }
    REQUIRE(n > 100000);
    CHECK(std::abs(sum / n) < 0.005);
    CHECK(sum2 / n == doctest::Approx(0.09).epsilon(0.02));
}

TEST_CASE("sorted diagonal spacings are Poisson") {
    const auto p = make(200, 1, 0.0, 1.0, 11, 251);
    std::vector<double> pooled;
    pooled.reserve(251 * 400);
    for (int r = 0; r < p.n_realizations; ++r) {
        const auto m = build_matrix(p, r);
        std::vector<double> diag(m.dim());
        for (int i = 0; i < m.dim(); ++i) diag[i] = m.at(i, i);
        std::sort(diag.begin(), diag.end());
        for (int i = 0; i + 1 < m.dim(); ++i) pooled.push_back(diag[i + 1] - diag[i]);
    }
    REQUIRE(pooled.size() >= 100000);
    double mean = 0.0;
    for (double s : pooled) mean += s;
    mean /= pooled.size();
    for (double& s : pooled) s /= mean;
    const double ks = ks_distance(pooled, +[](double x) {
        return reference_spacing_cdf(x, SpacingReference::poisson);
    });
    CHECK(ks < 0.02);
}

TEST_CASE("realization index range is enforced") {
    CHECK_THROWS_AS(build_matrix(make(5, 2, 0.1, 1.0, 1, 2), 2), Error);
    CHECK_THROWS_AS(build_matrix(make(5, 2, 0.1, 1.0, 1, 2), -1), Error);
}
