#ifndef PLATEBEM_QUADRATURE_HPP
#define PLATEBEM_QUADRATURE_HPP

#include "platebem/common.hpp"
#include "platebem/geometry.hpp"
#include "platebem/polynomials.hpp"

#include <map>
#include <mutex>

namespace platebem {

/// Quadrature rule on [0,1].
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Rule on [0,1] exact for s -> f1(s) + f2(s) log(s), f1, f2 in P_d.
struct LogRule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    int degree = 0;
};

/// Gauss--Legendre on [0,1], exact for P_{2n-1}. Newton iteration on the
/// Legendre polynomial roots.
inline Rule1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // initial guess on [-1,1]
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 1; k < n; ++k) {
                double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[n - 1 - i] = 0.5 * (x + 1);
        r.weights[n - 1 - i] = 1.0 / ((1 - x * x) * dp * dp);
    }
    return r;
}

/// Quadrature exact for the polynomial-plus-log family. Weights solve the
/// moment system in the shifted-Legendre basis at preset nodes (Chebyshev
/// points mapped by squaring, clustering toward the singularity at 0).
inline LogRule1D log_rule(int d) {
    if (d < 0) throw std::invalid_argument("log_rule: degree must be >= 0");
    int n = 2 * (d + 1);
    LogRule1D r;
    r.degree = d;
    r.nodes.resize(n);
    for (int j = 1; j <= n; ++j) {
        double c = 0.5 - 0.5 * std::cos((2 * j - 1) * kPi / (2 * n));
        r.nodes[j - 1] = c * c;
    }
    Matrix A(n, n);
    Vector m = Vector::Zero(n);
    std::vector<double> P(d + 1);
    for (int i = 0; i < n; ++i) {
        shifted_legendre(d, r.nodes[i], P.data());
        double lg = std::log(r.nodes[i]);
        for (int k = 0; k <= d; ++k) {
            A(k, i) = P[k];
            A(d + 1 + k, i) = P[k] * lg;
        }
    }
    // moments: int P~_k = delta_k0; int P~_k log s = -1 (k=0), (-1)^{k+1}/(k(k+1)) else
    m(0) = 1.0;
    m(d + 1) = -1.0;
    for (int k = 1; k <= d; ++k) m(d + 1 + k) = ((k % 2 == 0) ? -1.0 : 1.0) / (double(k) * (k + 1));
    Eigen::PartialPivLU<Matrix> lu(A);
    Vector w = lu.solve(m);
    // the conditioning of the moment system varies with d; accept the rule
    // only if the moments are actually reproduced
    double res = (A * w - m).lpNorm<Eigen::Infinity>();
    if (!w.allFinite() || res > 1e-11)
        throw std::runtime_error("log_rule: moment system too ill-conditioned (increase precision)");
    r.weights.assign(w.data(), w.data() + n);
    return r;
}

/// Relation between two elements of the same mesh.
struct PairClass {
    enum class Kind { disjoint, adjacent_shared_node, coincident };
    Kind kind = Kind::disjoint;
    // endpoints (s_end, t_end) in {0,1} that coincide, for adjacent pairs;
    // two entries occur on 2-element closed meshes
    std::vector<std::pair<int, int>> shared;
};

inline PairClass classify_pair(const BoundaryMesh& mesh, int e_row, int e_col) {
    PairClass c;
    if (e_row == e_col) {
        c.kind = PairClass::Kind::coincident;
        return c;
    }
    const Element& a = mesh.element(e_row);
    const Element& b = mesh.element(e_col);
    int ea[2] = {a.start_node, a.end_node};
    int eb[2] = {b.start_node, b.end_node};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (ea[i] == eb[j]) c.shared.emplace_back(i, j);
    c.kind = c.shared.empty() ? PairClass::Kind::disjoint : PairClass::Kind::adjacent_shared_node;
    return c;
}

enum class KernelKind { smooth, log_singular };

/// Tensor rule on the parameter square [0,1]^2 for an element pair.
struct PairRule2D {
    enum class Provenance { tensor_gauss, duffy_coincident, duffy_adjacent };
    std::vector<double> s, t, w;
    Provenance provenance = Provenance::tensor_gauss;

    void push(double si, double ti, double wi) {
        s.push_back(si);
        t.push_back(ti);
        w.push_back(wi);
    }
    size_t size() const { return s.size(); }
};

/// Duffy dispatch: disjoint pairs get tensor Gauss; touching pairs are split
/// so the singularity lies along one axis, which carries the log rule for
/// log-singular kernels and Gauss otherwise.
inline PairRule2D pair_rule(const PairClass& cls, KernelKind kind, int n, int log_degree) {
    if (n < 1) throw std::invalid_argument("pair_rule: n must be >= 1");
    Rule1D g = gauss_legendre(n);
    PairRule2D out;
    if (cls.kind == PairClass::Kind::disjoint) {
        out.provenance = PairRule2D::Provenance::tensor_gauss;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.push(g.nodes[i], g.nodes[j], g.weights[i] * g.weights[j]);
        return out;
    }
    std::vector<double> rx, rw;  // rule along the singular direction
    if (kind == KernelKind::log_singular) {
        LogRule1D lr = log_rule(log_degree);
        rx = lr.nodes;
        rw = lr.weights;
    } else {
        rx = g.nodes;
        rw = g.weights;
    }
    if (cls.kind == PairClass::Kind::coincident) {
        out.provenance = PairRule2D::Provenance::duffy_coincident;
        // split along the diagonal; on each triangle u = |s-t| is the
        // singular variable: s = u + (1-u)v, t = (1-u)v, jacobian (1-u)
        for (size_t i = 0; i < rx.size(); ++i) {
            double u = rx[i];
            for (int j = 0; j < n; ++j) {
                double v = g.nodes[j];
                double w = rw[i] * g.weights[j] * (1 - u);
                out.push(u + (1 - u) * v, (1 - u) * v, w);
                out.push((1 - u) * v, u + (1 - u) * v, w);
            }
        }
        return out;
    }
    out.provenance = PairRule2D::Provenance::duffy_adjacent;
    // map each shared endpoint to the origin of (sigma, tau) coordinates and
    // split along sigma = tau; sub-squares keep the second shared corner (if
    // any, on 2-element meshes) away from the integrated region
    double cell = cls.shared.size() > 1 ? 0.5 : 1.0;
    for (auto [se, te] : cls.shared) {
        auto to_param = [&](double sig, double tau, double& s, double& t) {
            s = se == 0 ? cell * sig : 1 - cell * sig;
            t = te == 0 ? cell * tau : 1 - cell * tau;
        };
        for (size_t i = 0; i < rx.size(); ++i) {
            double u = rx[i];
            for (int j = 0; j < n; ++j) {
                double v = g.nodes[j];
                double w = rw[i] * g.weights[j] * u * cell * cell;
                double s, t;
                to_param(u, u * v, s, t);
                out.push(s, t, w);
                to_param(u * v, u, s, t);
                out.push(s, t, w);
            }
        }
    }
    if (cls.shared.size() > 1) {
        // the two smooth quadrants of the 2x2 split
        auto [s0, t0] = cls.shared[0];
        auto [s1, t1] = cls.shared[1];
        auto quad = [&](int se, int te) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double sig = 0.5 * g.nodes[i], tau = 0.5 * g.nodes[j];
                    double s = se == 0 ? sig : 1 - sig;
                    double t = te == 0 ? tau : 1 - tau;
                    out.push(s, t, 0.25 * g.weights[i] * g.weights[j]);
                }
        };
        quad(s0, t1);
        quad(s1, t0);
    }
    return out;
}

/// Integral over one element in the arc-length measure.
template <class F, class R>
inline double integrate_element(const F& f, const Element& e, const R& rule) {
    double acc = 0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        double t = rule.nodes[i];
        acc += rule.weights[i] * f(t) * e.geo.dgamma(t).norm();
    }
    return acc;
}

/// Process-wide caches; rules are immutable value objects.
class RuleCache {
public:
    static const Rule1D& gauss(int n) {
        static RuleCache c;
        std::lock_guard<std::mutex> lock(c.mtx_);
        auto it = c.gauss_.find(n);
        if (it == c.gauss_.end()) it = c.gauss_.emplace(n, gauss_legendre(n)).first;
        return it->second;
    }
    static const LogRule1D& log(int d) {
        static RuleCache c;
        std::lock_guard<std::mutex> lock(c.mtx_);
        auto it = c.log_.find(d);
        if (it == c.log_.end()) it = c.log_.emplace(d, log_rule(d)).first;
        return it->second;
    }

private:
    std::mutex mtx_;
    std::map<int, Rule1D> gauss_;
    std::map<int, LogRule1D> log_;
};

} // namespace platebem

#endif
