#ifndef PLATEBEM_MANUFACTURED_HPP
#define PLATEBEM_MANUFACTURED_HPP

#include "platebem/common.hpp"
#include "platebem/geometry.hpp"

#include <string>

namespace platebem {

/// Closed-form biharmonic solution with derivatives through third order,
/// used to generate boundary data and reference traces.
struct ManufacturedCase {
    std::string name;
    DomainSpec::Kind domain = DomainSpec::Kind::circle;
    std::function<double(const Vec2&)> u;
    std::function<Vec2(const Vec2&)> grad;
    std::function<Eigen::Matrix2d(const Vec2&)> hess;
    // u_{,ijk}; symmetric in all indices
    std::function<double(const Vec2&, int, int, int)> third;
};

inline ManufacturedCase manufactured_case(DomainSpec::Kind kind) {
    ManufacturedCase c;
    c.domain = kind;
    switch (kind) {
    case DomainSpec::Kind::circle: {
        // (x^2+y^2)(x^2+2xy-y^2) = x^4 + 2x^3 y + 2x y^3 - y^4
        c.name = "quartic";
        c.u = [](const Vec2& p) {
            double x = p.x(), y = p.y();
            return x * x * x * x + 2 * x * x * x * y + 2 * x * y * y * y - y * y * y * y;
        };
        c.grad = [](const Vec2& p) {
            double x = p.x(), y = p.y();
            return Vec2(4 * x * x * x + 6 * x * x * y + 2 * y * y * y,
                        2 * x * x * x + 6 * x * y * y - 4 * y * y * y);
        };
        c.hess = [](const Vec2& p) {
            double x = p.x(), y = p.y();
            Eigen::Matrix2d H;
            H << 12 * x * x + 12 * x * y, 6 * x * x + 6 * y * y, 6 * x * x + 6 * y * y,
                12 * x * y - 12 * y * y;
            return H;
        };
        c.third = [](const Vec2& p, int i, int j, int k) {
            double x = p.x(), y = p.y();
            int ny = (i == 1) + (j == 1) + (k == 1);
            switch (ny) {
            case 0: return 24 * x + 12 * y;  // u_xxx
            case 1: return 12 * x;           // u_xxy
            case 2: return 12 * y;           // u_xyy
            default: return 12 * x - 24 * y; // u_yyy
            }
        };
        break;
    }
    case DomainSpec::Kind::square: {
        // (x^2+y^2) sinh(2 pi x) cos(2 pi y)
        c.name = "sinhcos";
        const double a = 2 * kPi;
        c.u = [a](const Vec2& p) {
            return p.squaredNorm() * std::sinh(a * p.x()) * std::cos(a * p.y());
        };
        c.grad = [a](const Vec2& p) {
            double x = p.x(), y = p.y(), r2 = p.squaredNorm();
            double S = std::sinh(a * x), C = std::cosh(a * x);
            double cc = std::cos(a * y), ss = std::sin(a * y);
            return Vec2(2 * x * S * cc + r2 * a * C * cc, 2 * y * S * cc - r2 * a * S * ss);
        };
        c.hess = [a](const Vec2& p) {
            double x = p.x(), y = p.y(), r2 = p.squaredNorm();
            double S = std::sinh(a * x), C = std::cosh(a * x);
            double cc = std::cos(a * y), ss = std::sin(a * y);
            Eigen::Matrix2d H;
            H(0, 0) = 2 * S * cc + 4 * a * x * C * cc + a * a * r2 * S * cc;
            H(0, 1) = -2 * a * x * S * ss + 2 * a * y * C * cc - a * a * r2 * C * ss;
            H(1, 0) = H(0, 1);
            H(1, 1) = 2 * S * cc - 4 * a * y * S * ss - a * a * r2 * S * cc;
            return H;
        };
        c.third = [a](const Vec2& p, int i, int j, int k) {
            double x = p.x(), y = p.y(), r2 = p.squaredNorm();
            double S = std::sinh(a * x), C = std::cosh(a * x);
            double cc = std::cos(a * y), ss = std::sin(a * y);
            int ny = (i == 1) + (j == 1) + (k == 1);
            switch (ny) {
            case 0: return 6 * a * C * cc + 6 * a * a * x * S * cc + a * a * a * r2 * C * cc;
            case 1:
                return -2 * a * S * ss - 4 * a * a * x * C * ss + 2 * a * a * y * S * cc -
                       a * a * a * r2 * S * ss;
            case 2:
                return 2 * a * C * cc - 4 * a * a * y * C * ss - 2 * a * a * x * S * cc -
                       a * a * a * r2 * C * cc;
            default:
                return -6 * a * S * ss - 6 * a * a * y * S * cc + a * a * a * r2 * S * ss;
            }
        };
        break;
    }
    case DomainSpec::Kind::pacman: {
        // r^4 cos(2 theta) = x^4 - y^4
        c.name = "singular";
        c.u = [](const Vec2& p) {
            double x = p.x(), y = p.y();
            return x * x * x * x - y * y * y * y;
        };
        c.grad = [](const Vec2& p) {
            return Vec2(4 * p.x() * p.x() * p.x(), -4 * p.y() * p.y() * p.y());
        };
        c.hess = [](const Vec2& p) {
            Eigen::Matrix2d H;
            H << 12 * p.x() * p.x(), 0, 0, -12 * p.y() * p.y();
            return H;
        };
        c.third = [](const Vec2& p, int i, int j, int k) {
            int ny = (i == 1) + (j == 1) + (k == 1);
            if (ny == 0) return 24 * p.x();
            if (ny == 3) return -24 * p.y();
            return 0.0;
        };
        break;
    }
    default:
        throw std::invalid_argument("manufactured_case: unknown domain kind");
    }
    return c;
}

} // namespace platebem

#endif
