#ifndef PLATEBEM_KERNELS_HPP
#define PLATEBEM_KERNELS_HPP

#include "platebem/common.hpp"

namespace platebem {

/// Kirchhoff--Love material data. The moment operator is
/// C Q = D [nu tr(Q) I + (1-nu) Q] with the bending rigidity normalized to
/// D = 1; only the Poisson ratio remains free.
struct PlateModel {
    double nu = 0.0;
    static constexpr double D = 1.0;

    PlateModel() = default;
    explicit PlateModel(double poisson) : nu(poisson) {
        if (!(nu > -1.0 && nu < 1.0)) throw std::invalid_argument("PlateModel: need -1 < nu < 1");
    }

    Eigen::Matrix2d apply_C(const Eigen::Matrix2d& Q) const {
        return D * (nu * Q.trace() * Eigen::Matrix2d::Identity() + (1 - nu) * Q);
    }
};

inline constexpr double kInvPi8 = 1.0 / (8 * kPi);
inline constexpr double kInvPi4 = 1.0 / (4 * kPi);
inline constexpr double kInvPi2 = 1.0 / (2 * kPi);

// squared-distance threshold below which kernels take their coincidence limit
// (0^2 log 0 := 0 convention)
inline constexpr double kCoincident2 = 1e-30;

/// Fundamental solution G(x) = |x|^2 log|x| / (8 pi) of the bi-Laplacian and
/// its derivatives. At x = 0 the value and gradient extend by continuity;
/// Laplacian and Hessian are flagged singular.
struct Fundamental {
    double G = 0;
    Vec2 gradG{0, 0};
    double laplG = 0;
    Eigen::Matrix2d hessG = Eigen::Matrix2d::Zero();
    bool singular = false;  // laplG/hessG invalid (x = 0)
};

inline Fundamental fundamental(const Vec2& x) {
    Fundamental f;
    double r2 = x.squaredNorm();
    if (r2 < kCoincident2) {
        f.singular = true;
        return f;
    }
    double lg = 0.5 * std::log(r2);  // log|x|
    f.G = kInvPi8 * r2 * lg;
    f.gradG = kInvPi8 * (2 * lg + 1) * x;
    f.laplG = kInvPi2 * (lg + 1);
    f.hessG = kInvPi8 * (2 * lg + 1) * Eigen::Matrix2d::Identity() + kInvPi4 * (x * x.transpose()) / r2;
    return f;
}

/// HG = C grad grad G, the moment tensor of the fundamental solution.
inline Eigen::Matrix2d hg_matrix(const PlateModel& model, const Vec2& x) {
    Fundamental f = fundamental(x);
    if (f.singular) throw std::invalid_argument("hg_matrix: x = 0");
    return model.apply_C(f.hessG);
}

/// Third-derivative tensor of HG: T[k](i,j) = d_k (HG)_{ij}(x).
inline std::array<Eigen::Matrix2d, 2> grad_hg(const PlateModel& model, const Vec2& x) {
    double r2 = x.squaredNorm();
    if (r2 < kCoincident2) throw std::invalid_argument("grad_hg: x = 0");
    std::array<Eigen::Matrix2d, 2> T;
    Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    for (int k = 0; k < 2; ++k) {
        Eigen::Matrix2d m;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double t = model.nu * I(i, j) * kInvPi2 * x[k] / r2;
                t += (1 - model.nu) * kInvPi4 *
                     ((I(i, j) * x[k] + I(i, k) * x[j] + I(j, k) * x[i]) / r2 -
                      2 * x[i] * x[j] * x[k] / (r2 * r2));
                m(i, j) = t;
            }
        T[k] = m;
    }
    return T;
}

struct HgComponents {
    double nHGn = 0;   // n . HG n
    double tHGn = 0;   // t . HG n
    double nDivHG = 0; // n . div HG = d_n(lap G)
};

inline HgComponents hg_components(const PlateModel& model, const Vec2& x, const Vec2& n,
                                  const Vec2& t) {
    double r2 = x.squaredNorm();
    if (r2 < kCoincident2) throw std::invalid_argument("hg_components: x = 0");
    double lg = 0.5 * std::log(r2);
    double nu = model.nu;
    HgComponents h;
    double nx = n.dot(x);
    h.nHGn = (1 + 3 * nu) * kInvPi8 + (1 + nu) * kInvPi4 * lg + (1 - nu) * kInvPi4 * nx * nx / r2;
    h.tHGn = (1 - nu) * kInvPi4 * t.dot(x) * nx / r2;
    h.nDivHG = kInvPi2 * nx / r2;
    return h;
}

/// Integrand factors of the single-layer representation, tagged per
/// trial/test component pair. x is the test point, y the trial point.
enum class VKernelId { sf_sf, nn_sf, sf_nn, nn_nn, J_sf, J_nn };

struct KernelArgs {
    Vec2 x{0, 0}, y{0, 0};
    Vec2 n_x{0, 0}, n_y{0, 0}, t_y{0, 0};
};

inline double v_kernel(VKernelId id, const KernelArgs& a) {
    Vec2 d = a.x - a.y;
    double r2 = d.squaredNorm();
    bool touch = r2 < kCoincident2;
    double lg = touch ? 0.0 : 0.5 * std::log(r2);
    switch (id) {
    case VKernelId::sf_sf:
    case VKernelId::J_sf:
        return touch ? 0.0 : kInvPi8 * r2 * lg;
    case VKernelId::nn_sf:
    case VKernelId::J_nn:
        return touch ? 0.0 : kInvPi8 * (2 * lg + 1) * a.n_y.dot(d);
    case VKernelId::sf_nn:
        return touch ? 0.0 : kInvPi8 * (2 * lg + 1) * a.n_x.dot(d);
    case VKernelId::nn_nn:
        if (touch) throw std::invalid_argument("v_kernel(nn_nn): no finite limit at x = y");
        return kInvPi8 * ((2 * lg + 1) * a.n_x.dot(a.n_y) + 2 * a.n_x.dot(d) * a.n_y.dot(d) / r2);
    }
    throw std::invalid_argument("v_kernel: unknown id");
}

/// Kernel functions of the double-layer representation and its
/// integration-by-parts forms.
enum class KKernelId {
    dlp_laplace,
    t_part,
    n_const,
    n_log,
    n_rational,
    knnn_log_deriv,
    knnn_rational_deriv
};

inline double k_kernel(KKernelId id, const KernelArgs& a, const PlateModel& model) {
    double nu = model.nu;
    if (id == KKernelId::n_const) return (1 + 3 * nu) * kInvPi8;
    Vec2 d = a.x - a.y;
    double r2 = d.squaredNorm();
    if (r2 < kCoincident2) {
        // kernels bounded via n.(x-y) = O(|x-y|^2) take their limit 0
        if (id == KKernelId::dlp_laplace || id == KKernelId::t_part || id == KKernelId::n_rational)
            return 0.0;
        throw std::invalid_argument("k_kernel: x = y for non-regularized kernel");
    }
    switch (id) {
    case KKernelId::dlp_laplace:
        return kInvPi2 * a.n_y.dot(d) / r2;  // -d_{n_y} log|x-y| / (2 pi)
    case KKernelId::t_part:
        return (1 - nu) * kInvPi4 * a.t_y.dot(d) * a.n_y.dot(d) / r2;
    case KKernelId::n_log:
        return (1 + nu) * kInvPi4 * 0.5 * std::log(r2);
    case KKernelId::n_rational: {
        double nyd = a.n_y.dot(d);
        return (1 - nu) * kInvPi4 * nyd * nyd / r2;
    }
    case KKernelId::knnn_log_deriv:
        return (1 + nu) * kInvPi4 * a.n_x.dot(d) / r2;  // (1+nu)/(4 pi) d_{n_x} log|x-y|
    case KKernelId::knnn_rational_deriv: {
        double nyd = a.n_y.dot(d);
        return (1 - nu) * kInvPi2 *
               (nyd * a.n_x.dot(a.n_y) / r2 - nyd * nyd * a.n_x.dot(d) / (r2 * r2));
    }
    default:
        throw std::invalid_argument("k_kernel: unknown id");
    }
}

/// Vector kernel d_{n_x} grad_y G(x-y) = -(grad grad G)(x-y) n_x,
/// the integration-by-parts kernel of the tangential double-layer block.
inline Vec2 ktnn_c_kernel(const Vec2& x, const Vec2& y, const Vec2& n_x) {
    Vec2 d = x - y;
    double r2 = d.squaredNorm();
    if (r2 < kCoincident2) throw std::invalid_argument("ktnn_c_kernel: x = y");
    double lg = 0.5 * std::log(r2);
    return -kInvPi8 * (2 * lg + 1) * n_x - kInvPi4 * (n_x.dot(d) / r2) * d;
}

/// log|x-y| (the kernel of the integrated-by-parts hypersingular block)
inline double log_distance(const Vec2& x, const Vec2& y) {
    double r2 = (x - y).squaredNorm();
    if (r2 < kCoincident2) throw std::invalid_argument("log_distance: x = y");
    return 0.5 * std::log(r2);
}

} // namespace platebem

#endif
