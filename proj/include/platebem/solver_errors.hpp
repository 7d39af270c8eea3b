#ifndef PLATEBEM_SOLVER_ERRORS_HPP
#define PLATEBEM_SOLVER_ERRORS_HPP

#include "platebem/assembly.hpp"
#include "platebem/common.hpp"
#include "platebem/manufactured.hpp"
#include "platebem/trace_spaces.hpp"

namespace platebem {

/// Dense saddle-point system [[A, B], [B^T, 0]] [m; lambda] = [rhs; 0].
struct SaddleSystem {
    Matrix A;    // dim X_h square, symmetric
    Matrix B;    // dim X_h x 3
    Vector rhs;  // dim X_h
    const NeumannSpace* space = nullptr;
};

struct Solution {
    NeumannCoeffs m_h;
    Eigen::Vector3d lambda_h;  // coefficients of {1, x1, x2}
    double residual_inf = 0;
};

/// three non-colinear mesh nodes exist (solvability hypothesis for p <= 1)
inline bool has_noncolinear_nodes(const BoundaryMesh& mesh) {
    if (mesh.num_nodes() < 3) return false;
    Vec2 a = mesh.node(0).position;
    double scale = 0;
    for (int z = 1; z < mesh.num_nodes(); ++z)
        scale = std::max(scale, (mesh.node(z).position - a).norm());
    for (int i = 1; i < mesh.num_nodes(); ++i) {
        Vec2 u = mesh.node(i).position - a;
        if (u.norm() < 1e-14 * scale) continue;
        for (int j = i + 1; j < mesh.num_nodes(); ++j) {
            Vec2 v = mesh.node(j).position - a;
            if (std::abs(cross2(u, v)) > 1e-12 * scale * scale) return true;
        }
    }
    return false;
}

inline SaddleSystem build_saddle_system(const NeumannSpace& X, Matrix A, Matrix B, Vector rhs) {
    SaddleSystem s;
    s.A = std::move(A);
    s.B = std::move(B);
    s.rhs = std::move(rhs);
    s.space = &X;
    if (s.A.rows() != X.dim() || s.A.cols() != X.dim() || s.B.rows() != X.dim() ||
        s.B.cols() != 3 || s.rhs.size() != X.dim())
        throw std::invalid_argument("build_saddle_system: block dimensions do not match the space");
    return s;
}

/// Direct dense solve of the full indefinite system with partial pivoting.
inline Solution solve(const SaddleSystem& sys) {
    if (sys.space && sys.space->p() <= 1 && !has_noncolinear_nodes(sys.space->mesh()))
        throw std::runtime_error(
            "solve: mesh nodes are colinear; the multiplier constraint is singular for p <= 1");
    int N = static_cast<int>(sys.A.rows());
    Matrix S = Matrix::Zero(N + 3, N + 3);
    S.topLeftCorner(N, N) = sys.A;
    S.topRightCorner(N, 3) = sys.B;
    S.bottomLeftCorner(3, N) = sys.B.transpose();
    Vector r = Vector::Zero(N + 3);
    r.head(N) = sys.rhs;
    Eigen::PartialPivLU<Matrix> lu(S);
    Vector x = lu.solve(r);
    // one refinement step keeps the residual at the noise floor
    x += lu.solve(r - S * x);
    double res = (S * x - r).lpNorm<Eigen::Infinity>();
    double anorm = sys.A.cwiseAbs().maxCoeff();
    double xnorm = x.lpNorm<Eigen::Infinity>();
    if (!(res <= 1e-10 * std::max(anorm * xnorm, 1e-300)) || !x.allFinite())
        throw std::runtime_error(
            "solve: singular or badly scaled factorization (degenerate mesh or scaling?)");
    Solution sol;
    sol.m_h = NeumannCoeffs(sys.space->layout(), x.head(N));
    sol.lambda_h = x.tail(3);
    sol.residual_inf = res;
    return sol;
}

/// Union layout holding both the discrete solution and the higher-order
/// projected reference, so the energy form is one assembled matrix.
inline NeumannLayout union_layout(const BoundaryMesh& mesh, int p) {
    return NeumannLayout(mesh, p + 1, NeumannLayout::SfKind::poly, p,
                         p == 0 ? all_nodes(mesh) : corner_nodes(mesh));
}

inline NeumannLayout reference_layout(const BoundaryMesh& mesh, int p) {
    return NeumannLayout(mesh, p + 1, NeumannLayout::SfKind::poly, p, corner_nodes(mesh));
}

/// Energy-norm error |||m_ref - m_h||| = sqrt(<V e, e>) on the union layout;
/// tiny negative quadratic forms clamp to zero.
inline double energy_error(const NeumannCoeffs& m_h, const NeumannCoeffs& reference,
                           const PlateModel& model, const BoundaryMesh& mesh,
                           const AssemblyOptions& opts = {}) {
    // for X_h layouts the nn degree equals p
    int p = m_h.layout->nn_degree();
    NeumannLayout uL = union_layout(mesh, p);
    Vector e = embed_coeffs(*reference.layout, uL, reference.values) -
               embed_coeffs(*m_h.layout, uL, m_h.values);
    Matrix VU = assemble_V(uL, uL, model, opts);
    double q = e.dot(VU * e);
    return std::sqrt(std::max(q, 0.0));
}

/// Interior solution by the representation formula
/// u_h(x) = Vtil m_h(x) - Ktil_nu g_h(x).
struct InteriorValue {
    double value = 0;
    bool near_boundary = false;  // dist(x, Gamma) < h/2: quadrature degraded
};

inline InteriorValue evaluate_interior(const Vec2& x, const NeumannCoeffs& m_h,
                                       const DirichletCoeffs& g_h, const PlateModel& model,
                                       const BoundaryMesh& mesh, int gauss_order = 16) {
    const NeumannLayout& l = *m_h.layout;
    const Rule1D& gq = RuleCache::gauss(gauss_order);
    const double nu = model.nu;
    double val_V = 0, val_K = 0;
    double min_dist = std::numeric_limits<double>::max();
    double max_h = 0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        max_h = std::max(max_h, mesh.element(e).h);
        for (size_t q = 0; q < gq.nodes.size(); ++q) {
            double t = gq.nodes[q];
            Frame f = frame_at(mesh.element(e), t);
            double w = gq.weights[q] * f.speed;
            Vec2 dd = x - f.point;
            double r2 = dd.squaredNorm();
            min_dist = std::min(min_dist, std::sqrt(r2));
            if (r2 < kCoincident2)
                throw std::invalid_argument("evaluate_interior: point lies on the boundary");
            // single-layer potential: duality of m_h with tr G(x - .)
            Fundamental F = fundamental(dd);
            double v0G = F.G;
            double vnG = -f.normal.dot(F.gradG);  // n_y . grad_y G(x-y)
            NeumannPointValues m = eval_neumann(m_h, e, t);
            val_V += w * (m.q_sf * v0G - m.q_nn * vnG);
            // double-layer potential: duality of tr^dDiv HG(x - .) with g_h
            Eigen::Matrix2d HG = model.apply_C(F.hessG);
            double nHGn = f.normal.dot(HG * f.normal);
            double tHGt = f.tangent.dot(HG * f.tangent);
            double ndiv = -kInvPi2 * f.normal.dot(dd) / r2;  // n_y . div_y HG(x-y)
            auto T = grad_hg(model, dd);
            Eigen::Matrix2d dHG_t = -(f.tangent.x() * T[0] + f.tangent.y() * T[1]);
            double tdHGn = f.tangent.dot(dHG_t * f.normal);
            double m_sf_k = ndiv - f.curvature * nHGn + f.curvature * tHGt + tdHGn;
            TracePointValues g = eval_dirichlet(g_h, e, t);
            val_K += -w * (m_sf_k * g.v0 - nHGn * g.vn);
        }
    }
    for (int z : l.j_nodes()) {
        Fundamental F = fundamental(x - mesh.node(z).position);
        val_V += m_h.values[l.j_dof(z)] * F.G;
    }
    for (int z = 0; z < mesh.num_nodes(); ++z) {
        if (!mesh.node(z).is_corner) continue;
        Frame fa = frame_at(mesh.element(mesh.element_after(z)), 0.0);
        Frame fb = frame_at(mesh.element(mesh.element_before(z)), 1.0);
        Eigen::Matrix2d HG = hg_matrix(model, x - mesh.node(z).position);
        double jump = fa.tangent.dot(HG * fa.normal) - fb.tangent.dot(HG * fb.normal);
        val_K += -jump * g_h.values[g_h.space->dof_v0(z)];
    }
    InteriorValue out;
    out.value = val_V - val_K;
    out.near_boundary = min_dist < 0.5 * max_h;
    return out;
}

} // namespace platebem

#endif
