#pragma once
// Band random matrices with a disordered leading diagonal (BRMDD).
//
// H_mk = E_k δ_mk + V_mk on a basis indexed k = -K..K (N = 2K+1 states).
// The diagonal levels E_k are i.i.d. uniform on [-K Δ, K Δ], kept in matrix
// (not energy) order; the probe level E_0 is pinned to exactly 0. Couplings
// V_mk = V_km are i.i.d. uniform on [-V, V] inside the band |m-k| <= b and
// zero outside, with V = v√3 so that <V_mk²> = v².

#include <cstdint>
#include <vector>

#include "brmdd/errors.hpp"

namespace brmdd {

struct EnsembleParams {
    int half_size = 1;               ///< K; matrix dimension N = 2K+1
    int band = 1;                    ///< b; couplings vanish for |m-k| > b
    double coupling_rms = 0.0;       ///< v, root-mean-square coupling
    double level_spacing = 1.0;      ///< Δ, mean diagonal spacing
    std::uint64_t master_seed = 0;
    int n_realizations = 100;

    int dim() const { return 2 * half_size + 1; }

    /// Throws Error on invariant violation. Returns true when β = b/K > 1
    /// (allowed, but outside the usual operating range; callers may warn).
    bool validate() const;
};

/// Dimensionless model parameters.
struct DerivedParams {
    double beta;     ///< b/K, relative band width
    double delta_c;  ///< Δ/β, spacing between directly coupled states
    double q;        ///< v/(Δ_c √β), the single control parameter
};

DerivedParams derived_params(const EnsembleParams& p);

/// One disorder realization, stored dense and exactly symmetric.
struct BrmddMatrix {
    int half_size = 0;
    int band = 0;
    std::vector<double> entries;  // row-major, dim() x dim()

    int dim() const { return 2 * half_size + 1; }
    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * dim() + j]; }
    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * dim() + j]; }
    /// Element addressed by basis indices m, k in -K..K.
    double element(int m, int k) const { return at(m + half_size, k + half_size); }

    double max_abs() const;
    double trace() const;
};

/// Builds realization `realization_index` of the ensemble. Pure function of
/// (params, master_seed, realization_index); draw order is fixed (diagonal in
/// matrix order, then in-band upper triangle row by row) so output is stable.
BrmddMatrix build_matrix(const EnsembleParams& p, int realization_index);

/// Checks symmetry, band sparsity, diagonal range and the pinned probe level.
/// Throws Error naming the first violated condition.
void check_matrix_invariants(const BrmddMatrix& m, const EnsembleParams& p);

}  // namespace brmdd
