#include "brmdd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#if BRMDD_USE_LAPACK
extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork, int* info);
}
#endif

namespace brmdd {

namespace {

#if BRMDD_USE_LAPACK
// The harness spawns its own workers; a threaded BLAS underneath them would
// oversubscribe the machine and make timings erratic. Pin it to one thread
// before the library makes its first call.
struct BlasSingleThreadInit {
    BlasSingleThreadInit() {
        ::setenv("OPENBLAS_NUM_THREADS", "1", 0);
        ::setenv("OMP_NUM_THREADS", "1", 0);
    }
};
const BlasSingleThreadInit blas_init{};
#endif

/// First nonzero component of each eigenvector made positive.
void fix_signs(SpectralDecomposition& d) {
    for (int j = 0; j < d.n; ++j) {
        double* col = d.eigenvectors.data() + static_cast<std::size_t>(j) * d.n;
        for (int i = 0; i < d.n; ++i) {
            if (col[i] != 0.0) {
                if (col[i] < 0.0)
                    for (int k = 0; k < d.n; ++k) col[k] = -col[k];
                break;
            }
        }
    }
}

}  // namespace

double SpectralDecomposition::eigenvalue_sum() const {
    double s = 0.0;
    for (double e : eigenvalues) s += e;
    return s;
}

SpectralDecomposition diagonalize_dense(int n, const std::vector<double>& a) {
    if (n < 1 || a.size() != static_cast<std::size_t>(n) * n)
        throw Error("diagonalize_dense: bad dimensions");
    for (double x : a)
        if (!std::isfinite(x)) throw Error("diagonalize_dense: non-finite entry");

#if BRMDD_USE_LAPACK
    SpectralDecomposition d;
    d.n = n;
    d.eigenvalues.assign(n, 0.0);
    d.eigenvectors = a;  // column-major == row-major for a symmetric input

    int info = 0;
    int lwork = -1, liwork = -1;
    double work_query = 0.0;
    int iwork_query = 0;
    dsyevd_("V", "L", &n, d.eigenvectors.data(), &n, d.eigenvalues.data(), &work_query, &lwork,
            &iwork_query, &liwork, &info);
    if (info != 0) throw EigensolverError("dsyevd workspace query failed, info=" + std::to_string(info));
    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(static_cast<std::size_t>(lwork));
    std::vector<int> iwork(static_cast<std::size_t>(liwork));
    dsyevd_("V", "L", &n, d.eigenvectors.data(), &n, d.eigenvalues.data(), work.data(), &lwork,
            iwork.data(), &liwork, &info);
    if (info != 0)
        throw EigensolverError("dsyevd did not converge, info=" + std::to_string(info));

    fix_signs(d);
    return d;
#else
    return diagonalize_builtin(n, a);
#endif
}

SpectralDecomposition diagonalize(const BrmddMatrix& m) {
    try {
        return diagonalize_dense(m.dim(), m.entries);
    } catch (const EigensolverError& e) {
        throw EigensolverError(std::string(e.what()) + " (K=" + std::to_string(m.half_size) +
                               ", b=" + std::to_string(m.band) + ")");
    }
}

const char* eigensolver_backend() {
#if BRMDD_USE_LAPACK
    return "lapack-dsyevd";
#else
    return "builtin-tql2";
#endif
}

double orthonormality_error_full(const SpectralDecomposition& d) {
    const int n = d.n;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* vi = d.eigenvectors.data() + static_cast<std::size_t>(i) * n;
        for (int j = i; j < n; ++j) {
            const double* vj = d.eigenvectors.data() + static_cast<std::size_t>(j) * n;
            double dot = 0.0;
            for (int k = 0; k < n; ++k) dot += vi[k] * vj[k];
            worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

double orthonormality_error_sampled(const SpectralDecomposition& d, int max_vectors) {
    const int n = d.n;
    const int stride = std::max(1, n / std::max(1, max_vectors));
    double worst = 0.0;
    for (int i = 0; i < n; i += stride) {
        const double* vi = d.eigenvectors.data() + static_cast<std::size_t>(i) * n;
        for (int j = i; j < n; j += stride) {
            const double* vj = d.eigenvectors.data() + static_cast<std::size_t>(j) * n;
            double dot = 0.0;
            for (int k = 0; k < n; ++k) dot += vi[k] * vj[k];
            worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

namespace {
double reconstruct_entry(const SpectralDecomposition& d, int i, int j) {
    double h = 0.0;
    for (int m = 0; m < d.n; ++m) h += d.eigenvalues[m] * d.component(i, m) * d.component(j, m);
    return h;
}
}  // namespace

double reconstruction_error_full(int n, const std::vector<double>& a,
                                 const SpectralDecomposition& d) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            worst = std::max(worst,
                             std::abs(a[static_cast<std::size_t>(i) * n + j] - reconstruct_entry(d, i, j)));
    return worst;
}

double reconstruction_error_sampled(const BrmddMatrix& m, const SpectralDecomposition& d,
                                    int max_entries) {
    const int n = d.n;
    const long total = static_cast<long>(n) * (n + 1) / 2;
    const long stride = std::max(1L, total / std::max(1, max_entries));
    double worst = 0.0;
    long idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j, ++idx) {
            if (idx % stride != 0) continue;
            worst = std::max(worst, std::abs(m.at(i, j) - reconstruct_entry(d, i, j)));
        }
    }
    return worst;
}

}  // namespace brmdd
