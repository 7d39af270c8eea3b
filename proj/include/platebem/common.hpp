#ifndef PLATEBEM_COMMON_HPP
#define PLATEBEM_COMMON_HPP

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace platebem {

using Vec2 = Eigen::Vector2d;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// rotate by -90 degrees: maps the tangent of a positively oriented curve
/// to the exterior normal
inline Vec2 rotate_minus90(const Vec2& v) { return Vec2(v.y(), -v.x()); }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Static-partition parallel loop. Each task owns a contiguous index range,
/// so writes to per-index data are race free and results deterministic.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    int nthreads = static_cast<int>(hw == 0 ? 1 : hw);
    if (nthreads <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    nthreads = std::min(nthreads, n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([=]() {
            for (int i = t; i < n; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace platebem

#endif
