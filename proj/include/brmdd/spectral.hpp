#pragma once
// Full symmetric eigendecomposition with verified numerical contracts.

#include <vector>

#include "brmdd/ensemble.hpp"
#include "brmdd/errors.hpp"

namespace brmdd {

struct SpectralDecomposition {
    int n = 0;
    std::vector<double> eigenvalues;   // ascending
    std::vector<double> eigenvectors;  // column-major; column j = eigenvector j

    /// <basis k | eigenstate j> with k the row index 0..n-1.
    double component(int basis_index, int eig_index) const {
        return eigenvectors[static_cast<std::size_t>(eig_index) * n + basis_index];
    }
    double eigenvalue_sum() const;
};

/// Dense symmetric eigensolve (all eigenvalues + eigenvectors). Eigenvalues
/// ascending; each eigenvector's first nonzero component is made positive so
/// output is deterministic. Throws EigensolverError on non-convergence.
SpectralDecomposition diagonalize(const BrmddMatrix& m);

/// Same, for a plain symmetric matrix given row-major.
SpectralDecomposition diagonalize_dense(int n, const std::vector<double>& a);

/// Portable Householder tridiagonalization + implicit QL solver. Used as the
/// build fallback when LAPACK is unavailable; always compiled so tests can
/// cross-check backends.
SpectralDecomposition diagonalize_builtin(int n, const std::vector<double>& a);

/// Name of the active backend ("lapack-dsyevd" or "builtin-tql2").
const char* eigensolver_backend();

// Contract checks. The *_full variants are O(n^3) and meant for tests; the
// sampled variants probe a deterministic subset and are cheap enough to run
// inside production sweeps.
double orthonormality_error_full(const SpectralDecomposition& d);
double reconstruction_error_full(int n, const std::vector<double>& a, const SpectralDecomposition& d);
double orthonormality_error_sampled(const SpectralDecomposition& d, int max_vectors = 48);
double reconstruction_error_sampled(const BrmddMatrix& m, const SpectralDecomposition& d,
                                    int max_entries = 4096);

}  // namespace brmdd
