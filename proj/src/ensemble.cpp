#include "brmdd/ensemble.hpp"

#include <cmath>
#include <string>

#include "brmdd/rng.hpp"

namespace brmdd {

bool EnsembleParams::validate() const {
    if (half_size < 1) throw Error("half_size must be >= 1 (N = 2K+1 >= 3)");
    if (band < 1 || band > 2 * half_size)
        throw Error("band must satisfy 1 <= b <= 2K, got b=" + std::to_string(band));
    if (!(coupling_rms >= 0.0)) throw Error("coupling_rms must be >= 0");
    if (!(level_spacing > 0.0)) throw Error("level_spacing must be > 0");
    if (n_realizations < 1) throw Error("n_realizations must be >= 1");
    return static_cast<double>(band) / half_size > 1.0;
}

DerivedParams derived_params(const EnsembleParams& p) {
    p.validate();
    DerivedParams d;
    d.beta = static_cast<double>(p.band) / p.half_size;
    d.delta_c = p.level_spacing / d.beta;
    d.q = p.coupling_rms / (d.delta_c * std::sqrt(d.beta));
    return d;
}

double BrmddMatrix::max_abs() const {
    double m = 0.0;
    for (double x : entries) m = std::max(m, std::abs(x));
    return m;
}

double BrmddMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim(); ++i) t += at(i, i);
    return t;
}

BrmddMatrix build_matrix(const EnsembleParams& p, int realization_index) {
    p.validate();
    if (realization_index < 0 || realization_index >= p.n_realizations)
        throw Error("realization_index " + std::to_string(realization_index) +
                    " outside [0, " + std::to_string(p.n_realizations) + ")");

    const int n = p.dim();
    const int k0 = p.half_size;  // row of basis index 0
    BrmddMatrix m;
    m.half_size = p.half_size;
    m.band = p.band;
    m.entries.assign(static_cast<std::size_t>(n) * n, 0.0);

    Xoshiro256 rng(stream_seed(p.master_seed, static_cast<std::uint64_t>(realization_index)));

    // Diagonal levels in matrix order; the probe level stays exactly 0.
    const double level_bound = p.half_size * p.level_spacing;
    for (int i = 0; i < n; ++i)
        m.at(i, i) = (i == k0) ? 0.0 : rng.uniform_symmetric(level_bound);

    // In-band couplings, upper triangle row by row. V = v√3 gives <V²> = v².
    const double coupling_bound = p.coupling_rms * std::sqrt(3.0);
    for (int i = 0; i < n; ++i) {
        const int jmax = std::min(n - 1, i + p.band);
        for (int j = i + 1; j <= jmax; ++j) {
            const double v = rng.uniform_symmetric(coupling_bound);
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    }
    return m;
}

void check_matrix_invariants(const BrmddMatrix& m, const EnsembleParams& p) {
    const int n = m.dim();
    if (n != p.dim()) throw Error("matrix dimension mismatch");
    const double level_bound = p.half_size * p.level_spacing;
    if (m.at(p.half_size, p.half_size) != 0.0) throw Error("probe level not pinned to 0");
    for (int i = 0; i < n; ++i) {
        const double e = m.at(i, i);
        if (std::abs(e) > level_bound) throw Error("diagonal level outside [-KΔ, KΔ]");
        for (int j = i + 1; j < n; ++j) {
            if (m.at(i, j) != m.at(j, i)) throw Error("matrix not exactly symmetric");
            if (j - i > p.band && m.at(i, j) != 0.0) throw Error("coupling outside the band");
        }
    }
}

}  // namespace brmdd
