// Portable dense symmetric eigensolver: Householder reduction to tridiagonal
// form followed by implicit-shift QL with eigenvector accumulation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "brmdd/spectral.hpp"

namespace brmdd {

namespace {

constexpr int kMaxQlIterations = 50;

// z is column-major; z(i, j) = component i of accumulated column j.
inline double& zref(std::vector<double>& z, int n, int i, int j) {
    return z[static_cast<std::size_t>(j) * n + i];
}

void tridiagonalize(int n, std::vector<double>& z, std::vector<double>& d, std::vector<double>& e) {
    auto Z = [&](int i, int j) -> double& { return zref(z, n, i, j); };

    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(Z(i, k));
            if (scale == 0.0) {
                e[i] = Z(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    Z(i, k) /= scale;
                    h += Z(i, k) * Z(i, k);
                }
                double f = Z(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                Z(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    Z(j, i) = Z(i, j) / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += Z(j, k) * Z(i, k);
                    for (int k = j + 1; k <= l; ++k) g += Z(k, j) * Z(i, k);
                    e[j] = g / h;
                    f += e[j] * Z(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = Z(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) Z(j, k) -= f * e[k] + g * Z(i, k);
                }
            }
        } else {
            e[i] = Z(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += Z(i, k) * Z(k, j);
                for (int k = 0; k <= l; ++k) Z(k, j) -= g * Z(k, i);
            }
        }
        d[i] = Z(i, i);
        Z(i, i) = 1.0;
        for (int j = 0; j <= l; ++j) Z(j, i) = Z(i, j) = 0.0;
    }
}

void ql_implicit(int n, std::vector<double>& z, std::vector<double>& d, std::vector<double>& e) {
    auto Z = [&](int i, int j) -> double& { return zref(z, n, i, j); };
    const double eps = std::numeric_limits<double>::epsilon();

    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == kMaxQlIterations)
                    throw EigensolverError("implicit QL exceeded iteration cap");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = Z(k, i + 1);
                        Z(k, i + 1) = s * Z(k, i) + c * f;
                        Z(k, i) = c * Z(k, i) - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace

SpectralDecomposition diagonalize_builtin(int n, const std::vector<double>& a) {
    if (n < 1 || a.size() != static_cast<std::size_t>(n) * n)
        throw Error("diagonalize_builtin: bad dimensions");
    for (double x : a)
        if (!std::isfinite(x)) throw Error("diagonalize_builtin: non-finite entry");

    std::vector<double> z = a;  // symmetric, so layout does not matter
    std::vector<double> d(n, 0.0), e(n, 0.0);
    if (n == 1) {
        SpectralDecomposition out;
        out.n = 1;
        out.eigenvalues = {a[0]};
        out.eigenvectors = {1.0};
        return out;
    }
    tridiagonalize(n, z, d, e);
    ql_implicit(n, z, d, e);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });

    SpectralDecomposition out;
    out.n = n;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        out.eigenvalues[j] = d[order[j]];
        const double* src = z.data() + static_cast<std::size_t>(order[j]) * n;
        double* dst = out.eigenvectors.data() + static_cast<std::size_t>(j) * n;
        std::copy(src, src + n, dst);
        for (int i = 0; i < n; ++i) {
            if (dst[i] != 0.0) {
                if (dst[i] < 0.0)
                    for (int k = 0; k < n; ++k) dst[k] = -dst[k];
                break;
            }
        }
    }
    return out;
}

}  // namespace brmdd
