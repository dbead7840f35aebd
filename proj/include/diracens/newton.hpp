#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracens/rational.hpp"
#include "diracens/series.hpp"

namespace diracens {

struct NewtonOptions {
    double tol = 1e-10;       // infinity-norm residual target
    int max_iter = 60;
    double fd_step = 1e-7;    // finite-difference Jacobian step (when no analytic J)
    bool line_search = true;
};

struct NewtonResult {
    std::vector<double> x;
    double residual_norm = 0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

using VecFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Damped Newton with finite-difference Jacobian.  Throws std::runtime_error
// on singular Jacobian or iteration exhaustion unless `nothrow` is set; the
// result always carries the last iterate.
NewtonResult newton_system(const VecFn& F, std::vector<double> x0,
                           const NewtonOptions& opt = {}, bool nothrow = false);

// Pivot weight for partial pivoting in the field-generic linear solve.
inline double pivot_weight(double v) { return std::fabs(v); }
inline double pivot_weight(const Rational& v) { return std::fabs(to_double(v)); }
template <class T>
double pivot_weight(const Series<T>& s) { return pivot_weight(s[0]); }

// Dense linear solve by Gaussian elimination with partial pivoting, usable
// over double, Rational and Series<Rational> (pivoting on the constant term,
// which is what regularity at the expansion point means for series systems).
template <class T>
std::vector<T> solve_linear(std::vector<std::vector<T>> A, std::vector<T> b) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        double best = pivot_weight(A[col][col]);
        for (size_t r = col + 1; r < n; ++r) {
            double w = pivot_weight(A[r][col]);
            if (w > best) { best = w; piv = r; }
        }
        if (best == 0.0) throw std::runtime_error("solve_linear: singular system");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            if (A[r][col] == T(0)) continue;
            T f = A[r][col] / A[col][col];
            for (size_t c = col; c < n; ++c) A[r][c] = A[r][c] - f * A[col][c];
            b[r] = b[r] - f * b[col];
        }
    }
    std::vector<T> x(n, T(0));
    for (size_t i = n; i-- > 0;) {
        T acc = b[i];
        for (size_t c = i + 1; c < n; ++c) acc = acc - A[i][c] * x[c];
        x[i] = acc / A[i][i];
    }
    return x;
}

}  // namespace diracens
