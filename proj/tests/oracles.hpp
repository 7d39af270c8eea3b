// Test-only reference integrators and finite-difference helpers, independent
// of the library's quadrature path.
#ifndef PLATEBEM_TESTS_ORACLES_HPP
#define PLATEBEM_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

// 15-point Gauss-Legendre panel on [a,b]
inline double gauss15(const std::function<double(double)>& f, double a, double b) {
    static const double X[] = {0.0, 0.2011940939974345, 0.3941513470775634, 0.5709721726085388,
                               0.7244177313601700, 0.8482065834104272, 0.9372733924007059,
                               0.9879925180204854};
    static const double W[] = {0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
                               0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
                               0.0703660474881081, 0.0307532419961173};
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = W[0] * f(c);
    for (int i = 1; i < 8; ++i) s += W[i] * (f(c - h * X[i]) + f(c + h * X[i]));
    return s * h;
}

/// Adaptive bisection with Richardson-style error control; handles endpoint
/// log singularities by refinement.
inline double adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                       int depth = 0) {
    double whole = gauss15(f, a, b);
    double mid = 0.5 * (a + b);
    double left = gauss15(f, a, mid), right = gauss15(f, mid, b);
    double err = std::abs(left + right - whole);
    if (err < tol || depth > 48) return left + right;
    return adaptive(f, a, mid, 0.5 * tol, depth + 1) + adaptive(f, mid, b, 0.5 * tol, depth + 1);
}

/// Iterated 2D adaptive integration over [0,1]^2. split_inner: parameter
/// value in the inner variable at which the integrand may be singular for
/// given outer value (negative: none).
inline double adaptive2d(const std::function<double(double, double)>& f, double tol,
                         const std::function<double(double)>& split_inner = nullptr) {
    auto outer = [&](double s) {
        auto g = [&](double t) { return f(s, t); };
        double split = split_inner ? split_inner(s) : -1.0;
        if (split > 0.0 && split < 1.0)
            return adaptive(g, 0.0, split, 0.25 * tol) + adaptive(g, split, 1.0, 0.25 * tol);
        return adaptive(g, 0.0, 1.0, 0.5 * tol);
    };
    return adaptive(outer, 0.0, 1.0, tol);
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

/// 4th-order accurate second derivative
inline double second_diff4(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
           (12 * h * h);
}

} // namespace oracles

#endif
