#pragma once

#include <cmath>
#include <complex>
#include <queue>
#include <vector>

#include "lemni/polynomial.hpp"
#include "lemni/roots.hpp"

namespace testsup {

using lemni::cplx;
using lemni::Polynomial;

inline Polynomial monomial(int n) {
    std::vector<cplx> c(static_cast<std::size_t>(n) + 1, cplx(0.0));
    c.back() = 1.0;
    return Polynomial(std::move(c));
}

inline Polynomial from_roots(const std::vector<cplx>& roots) {
    return lemni::polynomial_from_roots(roots);
}

/// Independent oracle for the Bernoulli lemniscate length of |z^2 - 1| = 1:
/// 4a * Integral_0^{pi/4} dtheta / sqrt(cos 2 theta), a = sqrt(2), evaluated
/// after the substitution cos 2 theta = sin^2 psi which makes the integrand
/// smooth: 4a * Integral_0^{pi/2} dpsi / sqrt(1 + sin^2 psi) ... (same value).
inline double bernoulli_length_oracle() {
    // 64-point Gauss-Legendre on [0, pi/2] of 1/sqrt(1 + sin^2 psi)
    // nodes/weights generated by Newton on Legendre P_64
    const int n = 64;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-16) break;
        }
        x[static_cast<std::size_t>(i)] = t;
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    const double a = 0.0, b = M_PI / 2.0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double psi = 0.5 * (b - a) * x[static_cast<std::size_t>(i)] + 0.5 * (a + b);
        const double s = std::sin(psi);
        sum += w[static_cast<std::size_t>(i)] / std::sqrt(1.0 + s * s);
    }
    sum *= 0.5 * (b - a);
    return 4.0 * std::sqrt(2.0) * sum;
}

/// Number of connected components of E = {|p| < 1} by flood fill on a fine
/// membership grid (small-n oracle for the traced component count).
inline int flood_fill_components(const Polynomial& p, double box_halfwidth, int n_cells = 600) {
    std::vector<char> inside(static_cast<std::size_t>(n_cells) * n_cells, 0);
    auto at = [&](int i, int j) -> char& {
        return inside[static_cast<std::size_t>(i) * n_cells + j];
    };
    const double h = 2.0 * box_halfwidth / n_cells;
    for (int i = 0; i < n_cells; ++i)
        for (int j = 0; j < n_cells; ++j) {
            const cplx z(-box_halfwidth + (i + 0.5) * h, -box_halfwidth + (j + 0.5) * h);
            at(i, j) = std::abs(p(z)) < 1.0 ? 1 : 0;
        }
    int comps = 0;
    for (int i = 0; i < n_cells; ++i)
        for (int j = 0; j < n_cells; ++j) {
            if (at(i, j) != 1) continue;
            ++comps;
            std::queue<std::pair<int, int>> q;
            q.push({i, j});
            at(i, j) = 2;
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop();
                const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    const int nx = x + dx[d], ny = y + dy[d];
                    if (nx < 0 || ny < 0 || nx >= n_cells || ny >= n_cells) continue;
                    if (at(nx, ny) == 1) {
                        at(nx, ny) = 2;
                        q.push({nx, ny});
                    }
                }
            }
        }
    return comps;
}

} // namespace testsup
