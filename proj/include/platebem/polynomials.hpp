#ifndef PLATEBEM_POLYNOMIALS_HPP
#define PLATEBEM_POLYNOMIALS_HPP

#include "platebem/common.hpp"

namespace platebem {

inline constexpr int kMaxLegendreDegree = 31;

/// Shifted Legendre polynomials on [0,1] (P~_0 = 1, P~_1 = 2t-1, ...),
/// the element-local basis used for all piecewise-polynomial densities.
/// Writes the (k_max+1) values of the requested t-derivative into out.
inline void shifted_legendre(int k_max, double t, double* out, int deriv = 0) {
    if (k_max > kMaxLegendreDegree) throw std::invalid_argument("shifted_legendre: degree cap");
    double u = 2 * t - 1;
    double P[kMaxLegendreDegree + 1], dP[kMaxLegendreDegree + 1], d2P[kMaxLegendreDegree + 1];
    P[0] = 1.0;
    if (k_max >= 1) P[1] = u;
    for (int k = 1; k < k_max; ++k) P[k + 1] = ((2 * k + 1) * u * P[k] - k * P[k - 1]) / (k + 1);
    if (deriv == 0) {
        for (int k = 0; k <= k_max; ++k) out[k] = P[k];
        return;
    }
    dP[0] = 0.0;
    if (k_max >= 1) dP[1] = 2.0;
    for (int k = 1; k < k_max; ++k)
        dP[k + 1] = ((2 * k + 1) * (2 * P[k] + u * dP[k]) - k * dP[k - 1]) / (k + 1);
    if (deriv == 1) {
        for (int k = 0; k <= k_max; ++k) out[k] = dP[k];
        return;
    }
    d2P[0] = 0.0;
    if (k_max >= 1) d2P[1] = 0.0;
    for (int k = 1; k < k_max; ++k)
        d2P[k + 1] = ((2 * k + 1) * (4 * dP[k] + u * d2P[k]) - k * d2P[k - 1]) / (k + 1);
    for (int k = 0; k <= k_max; ++k) out[k] = d2P[k];
}

inline Vector shifted_legendre_vec(int k_max, double t, int deriv = 0) {
    Vector v(k_max + 1);
    shifted_legendre(k_max, t, v.data(), deriv);
    return v;
}

} // namespace platebem

#endif
