#ifndef PLATEBEM_TRACE_SPACES_HPP
#define PLATEBEM_TRACE_SPACES_HPP

#include "platebem/common.hpp"
#include "platebem/geometry.hpp"
#include "platebem/kernels.hpp"
#include "platebem/manufactured.hpp"
#include "platebem/polynomials.hpp"
#include "platebem/quadrature.hpp"

#include <memory>
#include <optional>

namespace platebem {

// ---------------------------------------------------------------------------
// Neumann side: piecewise-polynomial densities (q_nn, q_sf) plus point values
// q_J. One generic layout serves the discrete space X_h, the higher-order
// reference used for error measurement, and their union.
// ---------------------------------------------------------------------------

class NeumannLayout {
public:
    enum class SfKind { none, p1prime, poly };

    NeumannLayout(const BoundaryMesh& mesh, int nn_degree, SfKind sf_kind, int sf_degree,
                  std::vector<int> j_nodes)
        : mesh_(&mesh), nn_degree_(nn_degree), sf_kind_(sf_kind), sf_degree_(sf_degree),
          j_nodes_(std::move(j_nodes)) {
        int ne = mesh.num_elements();
        nn_per_ = nn_degree_ + 1;
        sf_per_ = sf_kind_ == SfKind::none ? 0 : (sf_kind_ == SfKind::p1prime ? 1 : sf_degree_ + 1);
        sf_off_ = ne * nn_per_;
        j_off_ = sf_off_ + ne * sf_per_;
        dim_ = j_off_ + static_cast<int>(j_nodes_.size());
        j_index_.assign(mesh.num_nodes(), -1);
        for (size_t k = 0; k < j_nodes_.size(); ++k) j_index_[j_nodes_[k]] = static_cast<int>(k);
    }

    const BoundaryMesh& mesh() const { return *mesh_; }
    int dim() const { return dim_; }
    int nn_degree() const { return nn_degree_; }
    SfKind sf_kind() const { return sf_kind_; }
    int sf_degree() const { return sf_degree_; }
    int nn_count() const { return nn_per_; }
    int sf_count() const { return sf_per_; }
    int nn_dof(int e, int k) const { return e * nn_per_ + k; }
    int sf_dof(int e, int k) const { return sf_off_ + e * sf_per_ + k; }
    const std::vector<int>& j_nodes() const { return j_nodes_; }
    bool has_j(int z) const { return j_index_[z] >= 0; }
    int j_dof(int z) const { return j_off_ + j_index_[z]; }

    /// nn basis values (deriv = 0) or arc-length derivatives (deriv = 1) at t
    void nn_basis(int e, double t, double* out, int deriv = 0) const {
        shifted_legendre(nn_degree_, t, out, deriv);
        if (deriv == 1) {
            double sp = mesh_->element(e).geo.dgamma(t).norm();
            for (int k = 0; k < nn_per_; ++k) out[k] /= sp;
        }
    }
    void sf_basis(int e, double t, double* out) const {
        if (sf_per_ == 0) return;
        if (sf_kind_ == SfKind::p1prime) {
            out[0] = 1.0 / mesh_->element(e).geo.dgamma(t).norm();
            return;
        }
        shifted_legendre(sf_degree_, t, out);
    }

private:
    const BoundaryMesh* mesh_;
    int nn_degree_;
    SfKind sf_kind_;
    int sf_degree_;
    std::vector<int> j_nodes_;
    std::vector<int> j_index_;
    int nn_per_ = 0, sf_per_ = 0, sf_off_ = 0, j_off_ = 0, dim_ = 0;
};

inline std::vector<int> corner_nodes(const BoundaryMesh& mesh) {
    std::vector<int> c;
    for (int z = 0; z < mesh.num_nodes(); ++z)
        if (mesh.node(z).is_corner) c.push_back(z);
    return c;
}

inline std::vector<int> all_nodes(const BoundaryMesh& mesh) {
    std::vector<int> c(mesh.num_nodes());
    for (int z = 0; z < mesh.num_nodes(); ++z) c[z] = z;
    return c;
}

/// The discrete space X_h for H^{-3/2,-1/2}(Gamma):
///   p = 0: P_0 x {0} x R^{#nodes}
///   p = 1: P_1 x P_1' x R^{#corners}
///   p > 1: P_p x P_{p-1} x R^{#corners}
class NeumannSpace {
public:
    NeumannSpace(const BoundaryMesh& mesh, int p)
        : p_(p), layout_(make_layout(mesh, p)) {
        if (p < 0) throw std::invalid_argument("NeumannSpace: p must be >= 0");
    }
    int p() const { return p_; }
    int dim() const { return layout_.dim(); }
    const NeumannLayout& layout() const { return layout_; }
    const BoundaryMesh& mesh() const { return layout_.mesh(); }

private:
    static NeumannLayout make_layout(const BoundaryMesh& mesh, int p) {
        if (p == 0) return NeumannLayout(mesh, 0, NeumannLayout::SfKind::none, 0, all_nodes(mesh));
        if (p == 1)
            return NeumannLayout(mesh, 1, NeumannLayout::SfKind::p1prime, 0, corner_nodes(mesh));
        return NeumannLayout(mesh, p, NeumannLayout::SfKind::poly, p - 1, corner_nodes(mesh));
    }
    int p_;
    NeumannLayout layout_;
};

struct NeumannCoeffs {
    const NeumannLayout* layout = nullptr;
    Vector values;

    NeumannCoeffs() = default;
    NeumannCoeffs(const NeumannLayout& l, Vector v) : layout(&l), values(std::move(v)) {
        if (values.size() != l.dim()) throw std::invalid_argument("NeumannCoeffs: length mismatch");
    }
};

struct NeumannPointValues {
    double q_nn = 0;
    double q_sf = 0;
};

inline NeumannPointValues eval_neumann(const NeumannCoeffs& c, int e, double t) {
    const NeumannLayout& l = *c.layout;
    NeumannPointValues out;
    std::vector<double> b(std::max(l.nn_count(), l.sf_count()));
    l.nn_basis(e, t, b.data());
    for (int k = 0; k < l.nn_count(); ++k) out.q_nn += b[k] * c.values[l.nn_dof(e, k)];
    if (l.sf_count() > 0) {
        l.sf_basis(e, t, b.data());
        for (int k = 0; k < l.sf_count(); ++k) out.q_sf += b[k] * c.values[l.sf_dof(e, k)];
    }
    return out;
}

inline double neumann_j_value(const NeumannCoeffs& c, int z) {
    return c.layout->has_j(z) ? c.values[c.layout->j_dof(z)] : 0.0;
}

/// Oriented jump [q_nn](z) = (value after z) - (value before z).
inline double neumann_nn_jump(const NeumannCoeffs& c, int z) {
    const BoundaryMesh& mesh = c.layout->mesh();
    int ea = mesh.element_after(z), eb = mesh.element_before(z);
    return eval_neumann(c, ea, 0.0).q_nn - eval_neumann(c, eb, 1.0).q_nn;
}

/// Exact coefficient embedding between layouts sharing the mesh, for the
/// union-layout energy form. Requires dst to dominate src blockwise.
inline Vector embed_coeffs(const NeumannLayout& src, const NeumannLayout& dst, const Vector& c) {
    Vector out = Vector::Zero(dst.dim());
    const BoundaryMesh& mesh = src.mesh();
    if (dst.nn_degree() < src.nn_degree())
        throw std::invalid_argument("embed_coeffs: nn degree not dominated");
    for (int e = 0; e < mesh.num_elements(); ++e) {
        for (int k = 0; k < src.nn_count(); ++k) out[dst.nn_dof(e, k)] = c[src.nn_dof(e, k)];
        if (src.sf_kind() == NeumannLayout::SfKind::p1prime) {
            // constant-speed arcs: the P_1' basis function is the constant 1/h
            out[dst.sf_dof(e, 0)] += c[src.sf_dof(e, 0)] / mesh.element(e).h;
        } else {
            for (int k = 0; k < src.sf_count(); ++k) out[dst.sf_dof(e, k)] = c[src.sf_dof(e, k)];
        }
    }
    for (int z : src.j_nodes()) {
        if (!dst.has_j(z)) throw std::invalid_argument("embed_coeffs: missing J node in target");
        out[dst.j_dof(z)] = c[src.j_dof(z)];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dirichlet side: Y_h with nodal triples {v0(z), w(z)} and element moments.
// w(z) is the ambient vector (d_t v0) t + v_n n, so corner continuity is the
// plain equality of w from both sides.
// ---------------------------------------------------------------------------

struct TracePointValues {
    double v0 = 0, dv0_ds = 0, d2v0_ds2 = 0, vn = 0, dvn_ds = 0;
};

class DirichletSpace {
public:
    DirichletSpace(const BoundaryMesh& mesh, int p) : mesh_(&mesh), p_(p) {
        if (p < 0) throw std::invalid_argument("DirichletSpace: p must be >= 0");
        deg0_ = p + 2 + (p == 0 ? 1 : 0);
        degn_ = p + 1;
        int ne = mesh.num_elements();
        mom_n_off_ = 3 * mesh.num_nodes();
        mom_0_off_ = mom_n_off_ + ne * p;
        dim_ = mom_0_off_ + ne * std::max(p - 1, 0);
        build_local();
    }

    const BoundaryMesh& mesh() const { return *mesh_; }
    int p() const { return p_; }
    int dim() const { return dim_; }
    int v0_degree() const { return deg0_; }
    int vn_degree() const { return degn_; }
    int dof_v0(int z) const { return 3 * z; }
    int dof_w(int z, int comp) const { return 3 * z + 1 + comp; }
    int dof_mom_n(int e, int j) const { return mom_n_off_ + e * p_ + j; }
    int dof_mom_0(int e, int j) const { return mom_0_off_ + e * (p_ - 1) + j; }
    int n_mom_n() const { return p_; }
    int n_mom_0() const { return std::max(p_ - 1, 0); }

    /// global dofs whose basis functions are supported on element e
    const std::vector<int>& element_dofs(int e) const { return gdofs_[e]; }
    /// Legendre-coefficient matrices of the local shape functions,
    /// columns aligned with element_dofs(e)
    const Matrix& basis0(int e) const { return B0_[e]; }
    const Matrix& basisn(int e) const { return Bn_[e]; }
    /// orthonormalized moment test polynomials (Legendre coefficients)
    const Matrix& moment_polys_n(int e) const { return monb_n_[e]; }
    const Matrix& moment_polys_0(int e) const { return monb_0_[e]; }

    void eval_local(int e, double t, double* v0, double* dv0, double* d2v0, double* vn) const {
        int nc = static_cast<int>(gdofs_[e].size());
        double sp = mesh_->element(e).geo.dgamma(t).norm();
        Vector P = shifted_legendre_vec(deg0_, t);
        Vector P1 = shifted_legendre_vec(deg0_, t, 1);
        Vector P2 = shifted_legendre_vec(deg0_, t, 2);
        Vector Pn = shifted_legendre_vec(degn_, t);
        for (int c = 0; c < nc; ++c) {
            v0[c] = P.dot(B0_[e].col(c));
            dv0[c] = P1.dot(B0_[e].col(c)) / sp;
            d2v0[c] = P2.dot(B0_[e].col(c)) / (sp * sp);  // constant-speed arcs
            vn[c] = Pn.dot(Bn_[e].col(c));
        }
    }
    void eval_local_dvn(int e, double t, double* dvn) const {
        int nc = static_cast<int>(gdofs_[e].size());
        double sp = mesh_->element(e).geo.dgamma(t).norm();
        Vector Pn1 = shifted_legendre_vec(degn_, t, 1);
        for (int c = 0; c < nc; ++c) dvn[c] = Pn1.dot(Bn_[e].col(c)) / sp;
    }

private:
    void build_local() {
        const BoundaryMesh& mesh = *mesh_;
        int ne = mesh.num_elements();
        gdofs_.resize(ne);
        B0_.resize(ne);
        Bn_.resize(ne);
        monb_n_.resize(ne);
        monb_0_.resize(ne);
        const Rule1D& gq = RuleCache::gauss(2 * (p_ + 4));
        int n0 = deg0_ + 1, nn = degn_ + 1;
        for (int e = 0; e < ne; ++e) {
            const Element& el = mesh.element(e);
            Frame f0 = frame_at(el, 0.0), f1 = frame_at(el, 1.0);
            // element Gram of shifted Legendre in the arc-length measure
            int dmax = std::max(deg0_, degn_);
            Matrix G = Matrix::Zero(dmax + 1, dmax + 1);
            std::vector<double> P(dmax + 1);
            for (size_t q = 0; q < gq.nodes.size(); ++q) {
                shifted_legendre(dmax, gq.nodes[q], P.data());
                double w = gq.weights[q] * el.geo.dgamma(gq.nodes[q]).norm();
                for (int i = 0; i <= dmax; ++i)
                    for (int j = 0; j <= dmax; ++j) G(i, j) += w * P[i] * P[j];
            }
            // orthonormal moment test polynomials via Cholesky
            auto onb = [&](int deg) {
                Matrix Gd = G.topLeftCorner(deg + 1, deg + 1);
                Eigen::LLT<Matrix> llt(Gd);
                if (llt.info() != Eigen::Success)
                    throw std::runtime_error("DirichletSpace: singular element Gram");
                Matrix L = llt.matrixL();
                return Matrix(L.transpose().inverse());  // columns = onb coefficients
            };
            if (p_ >= 1) monb_n_[e] = onb(p_ - 1);
            if (p_ >= 2) monb_0_[e] = onb(p_ - 2);

            // local dof matrix for v0 in P_{deg0}
            Matrix A0 = Matrix::Zero(n0, n0);
            Vector Pv0 = shifted_legendre_vec(deg0_, 0.0), Pv1 = shifted_legendre_vec(deg0_, 1.0);
            Vector Pd0 = shifted_legendre_vec(deg0_, 0.0, 1), Pd1 = shifted_legendre_vec(deg0_, 1.0, 1);
            A0.row(0) = Pv0.transpose();
            A0.row(1) = Pv1.transpose();
            A0.row(2) = Pd0.transpose() / f0.speed;
            A0.row(3) = Pd1.transpose() / f1.speed;
            for (int j = 0; j < n_mom_0(); ++j)
                A0.row(4 + j) = (G.topLeftCorner(deg0_ + 1, p_ - 1) * monb_0_[e].col(j)).transpose();
            Matrix C0 = A0.inverse();

            Matrix An = Matrix::Zero(nn, nn);
            Vector Qv0 = shifted_legendre_vec(degn_, 0.0), Qv1 = shifted_legendre_vec(degn_, 1.0);
            An.row(0) = Qv0.transpose();
            An.row(1) = Qv1.transpose();
            for (int j = 0; j < n_mom_n(); ++j)
                An.row(2 + j) = (G.topLeftCorner(degn_ + 1, p_) * monb_n_[e].col(j)).transpose();
            Matrix Cn = An.inverse();

            // scatter local dofs to global columns
            std::vector<int>& gd = gdofs_[e];
            int z0 = el.start_node, z1 = el.end_node;
            gd = {dof_v0(z0), dof_w(z0, 0), dof_w(z0, 1), dof_v0(z1), dof_w(z1, 0), dof_w(z1, 1)};
            for (int j = 0; j < n_mom_n(); ++j) gd.push_back(dof_mom_n(e, j));
            for (int j = 0; j < n_mom_0(); ++j) gd.push_back(dof_mom_0(e, j));
            int nc = static_cast<int>(gd.size());
            Matrix L0 = Matrix::Zero(n0, nc), Ln = Matrix::Zero(nn, nc);
            L0(0, 0) = 1;
            L0(1, 3) = 1;
            L0(2, 1) = f0.tangent.x();
            L0(2, 2) = f0.tangent.y();
            L0(3, 4) = f1.tangent.x();
            L0(3, 5) = f1.tangent.y();
            Ln(0, 1) = f0.normal.x();
            Ln(0, 2) = f0.normal.y();
            Ln(1, 4) = f1.normal.x();
            Ln(1, 5) = f1.normal.y();
            for (int j = 0; j < n_mom_n(); ++j) Ln(2 + j, 6 + j) = 1;
            for (int j = 0; j < n_mom_0(); ++j) L0(4 + j, 6 + n_mom_n() + j) = 1;
            B0_[e] = C0 * L0;
            Bn_[e] = Cn * Ln;
        }
    }

    const BoundaryMesh* mesh_;
    int p_, deg0_, degn_, mom_n_off_, mom_0_off_, dim_;
    std::vector<std::vector<int>> gdofs_;
    std::vector<Matrix> B0_, Bn_, monb_n_, monb_0_;
};

struct DirichletCoeffs {
    const DirichletSpace* space = nullptr;
    Vector values;

    DirichletCoeffs() = default;
    DirichletCoeffs(const DirichletSpace& s, Vector v) : space(&s), values(std::move(v)) {
        if (values.size() != s.dim()) throw std::invalid_argument("DirichletCoeffs: length mismatch");
    }
};

inline TracePointValues eval_dirichlet(const DirichletCoeffs& c, int e, double t) {
    const DirichletSpace& Y = *c.space;
    int nc = static_cast<int>(Y.element_dofs(e).size());
    std::vector<double> v0(nc), dv0(nc), d2v0(nc), vn(nc), dvn(nc);
    Y.eval_local(e, t, v0.data(), dv0.data(), d2v0.data(), vn.data());
    Y.eval_local_dvn(e, t, dvn.data());
    TracePointValues out;
    for (int k = 0; k < nc; ++k) {
        double ck = c.values[Y.element_dofs(e)[k]];
        out.v0 += ck * v0[k];
        out.dv0_ds += ck * dv0[k];
        out.d2v0_ds2 += ck * d2v0[k];
        out.vn += ck * vn[k];
        out.dvn_ds += ck * dvn[k];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form trace data and the generic trial-side interface shared by the
// Galerkin assembly and the duality pairing.
// ---------------------------------------------------------------------------

/// One-sided closed-form boundary data, indexed by (element, parameter).
struct TraceFunctions {
    std::function<double(int, double)> v0, dv0_ds, d2v0_ds2, vn;
    std::function<double(int, double)> m_nn, m_sf;  // Neumann components
    std::function<double(int)> m_J;                 // corner force at node id
};

/// Trial-side data provider: columns are either the Y_h basis restricted to
/// an element or a single closed-form trace.
class DirichletField {
public:
    virtual ~DirichletField() = default;
    virtual const BoundaryMesh& mesh() const = 0;
    virtual int cols() const = 0;
    virtual const std::vector<int>& element_cols(int e) const = 0;
    /// per-column values at (e, t); buffers sized element_cols(e).size()
    virtual void eval(int e, double t, double* v0, double* dv0, double* d2v0,
                      double* vn) const = 0;
    /// v0(z) as a sparse functional of the columns
    virtual std::vector<std::pair<int, double>> node_value(int z) const = 0;
    /// oriented jump [ (d_t v0) n ](z), after minus before
    virtual std::vector<std::pair<int, Vec2>> node_jump(int z) const = 0;
};

class YhField final : public DirichletField {
public:
    explicit YhField(const DirichletSpace& Y) : Y_(&Y) {}
    const BoundaryMesh& mesh() const override { return Y_->mesh(); }
    int cols() const override { return Y_->dim(); }
    const std::vector<int>& element_cols(int e) const override { return Y_->element_dofs(e); }
    void eval(int e, double t, double* v0, double* dv0, double* d2v0, double* vn) const override {
        Y_->eval_local(e, t, v0, dv0, d2v0, vn);
    }
    std::vector<std::pair<int, double>> node_value(int z) const override {
        return {{Y_->dof_v0(z), 1.0}};
    }
    std::vector<std::pair<int, Vec2>> node_jump(int z) const override {
        const BoundaryMesh& m = Y_->mesh();
        Frame fa = frame_at(m.element(m.element_after(z)), 0.0);
        Frame fb = frame_at(m.element(m.element_before(z)), 1.0);
        // d_t v0 one-sided = w . t_side, so the jump couples only w dofs
        return {{Y_->dof_w(z, 0), fa.tangent.x() * fa.normal - fb.tangent.x() * fb.normal},
                {Y_->dof_w(z, 1), fa.tangent.y() * fa.normal - fb.tangent.y() * fb.normal}};
    }

private:
    const DirichletSpace* Y_;
};

class ExactField final : public DirichletField {
public:
    ExactField(const BoundaryMesh& mesh, TraceFunctions g) : mesh_(&mesh), g_(std::move(g)) {
        one_ = {0};
    }
    const BoundaryMesh& mesh() const override { return *mesh_; }
    int cols() const override { return 1; }
    const std::vector<int>& element_cols(int) const override { return one_; }
    void eval(int e, double t, double* v0, double* dv0, double* d2v0, double* vn) const override {
        v0[0] = g_.v0(e, t);
        dv0[0] = g_.dv0_ds(e, t);
        d2v0[0] = g_.d2v0_ds2(e, t);
        vn[0] = g_.vn(e, t);
    }
    std::vector<std::pair<int, double>> node_value(int z) const override {
        return {{0, g_.v0(mesh_->element_after(z), 0.0)}};
    }
    std::vector<std::pair<int, Vec2>> node_jump(int z) const override {
        int ea = mesh_->element_after(z), eb = mesh_->element_before(z);
        Frame fa = frame_at(mesh_->element(ea), 0.0);
        Frame fb = frame_at(mesh_->element(eb), 1.0);
        Vec2 j = g_.dv0_ds(ea, 0.0) * fa.normal - g_.dv0_ds(eb, 1.0) * fb.normal;
        return {{0, j}};
    }

private:
    const BoundaryMesh* mesh_;
    TraceFunctions g_;
    std::vector<int> one_;
};

// ---------------------------------------------------------------------------
// Trace extraction from manufactured solutions
// ---------------------------------------------------------------------------

/// All trace components of a manufactured solution: the Dirichlet pair
/// (v0, vn) with tangential derivatives, and with M = -C grad grad u the
/// Neumann triple m_nn = n.Mn, m_sf = n.div M + d/ds(t.Mn), and corner
/// forces m_J = jump of t.Mn.
inline TraceFunctions exact_neumann_trace(const ManufacturedCase& cs, const PlateModel& model,
                                          const BoundaryMesh& mesh) {
    const double nu = model.nu;
    auto moment = [nu, &cs](const Vec2& x) {
        Eigen::Matrix2d H = cs.hess(x);
        return Eigen::Matrix2d(-(nu * H.trace() * Eigen::Matrix2d::Identity() + (1 - nu) * H));
    };
    auto tMn_side = [moment](const Element& el, double t) {
        Frame f = frame_at(el, t);
        Eigen::Matrix2d M = moment(f.point);
        return f.tangent.dot(M * f.normal);
    };
    TraceFunctions g;
    g.v0 = [&cs, &mesh](int e, double t) { return cs.u(mesh.element(e).geo.gamma(t)); };
    g.vn = [&cs, &mesh](int e, double t) {
        Frame f = frame_at(mesh.element(e), t);
        return f.normal.dot(cs.grad(f.point));
    };
    g.dv0_ds = [&cs, &mesh](int e, double t) {
        Frame f = frame_at(mesh.element(e), t);
        return f.tangent.dot(cs.grad(f.point));
    };
    g.d2v0_ds2 = [&cs, &mesh](int e, double t) {
        // d/ds (t . grad u) = -kappa n.grad u + t.(hess u) t
        Frame f = frame_at(mesh.element(e), t);
        Eigen::Matrix2d H = cs.hess(f.point);
        return -f.curvature * f.normal.dot(cs.grad(f.point)) + f.tangent.dot(H * f.tangent);
    };
    g.m_nn = [moment, &mesh](int e, double t) {
        Frame f = frame_at(mesh.element(e), t);
        return f.normal.dot(moment(f.point) * f.normal);
    };
    g.m_sf = [moment, nu, &cs, &mesh](int e, double t) {
        Frame f = frame_at(mesh.element(e), t);
        const Vec2& x = f.point;
        Eigen::Matrix2d M = moment(x);
        // div M = -grad(lap u)
        Vec2 grad_lap(cs.third(x, 0, 0, 0) + cs.third(x, 0, 1, 1),
                      cs.third(x, 0, 0, 1) + cs.third(x, 1, 1, 1));
        double n_div = -f.normal.dot(grad_lap);
        // d/ds(t.Mn) = -kappa n.Mn + kappa t.Mt + t.((t.grad)M)n
        double nMn = f.normal.dot(M * f.normal);
        double tMt = f.tangent.dot(M * f.tangent);
        double tdMn = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double dM = 0;
                for (int k = 0; k < 2; ++k) {
                    double dk = -(nu * (i == j ? 1.0 : 0.0) * (k == 0 ? grad_lap.x() : grad_lap.y()) +
                                  (1 - nu) * cs.third(x, i, j, k));
                    dM += f.tangent[k] * dk;
                }
                tdMn += f.tangent[i] * dM * f.normal[j];
            }
        return n_div - f.curvature * nMn + f.curvature * tMt + tdMn;
    };
    g.m_J = [tMn_side, &mesh](int z) {
        double after = tMn_side(mesh.element(mesh.element_after(z)), 0.0);
        double before = tMn_side(mesh.element(mesh.element_before(z)), 1.0);
        return after - before;
    };
    return g;
}

// ---------------------------------------------------------------------------
// Duality pairing, interpolation, projections
// ---------------------------------------------------------------------------

/// ell(v) of the X_h embedding: element integrals <q_sf, v0> - <q_nn, v_n>
/// (sf block absent for p = 0) plus the point sum over the J nodes.
/// PointEval: (e, t) -> TracePointValues; NodeEval: z -> v0(z).
template <class PointEval, class NodeEval>
inline double duality_pair_eval(const NeumannCoeffs& q, const PointEval& at, const NodeEval& v0_at,
                                int gauss_order) {
    const NeumannLayout& l = *q.layout;
    const BoundaryMesh& mesh = l.mesh();
    const Rule1D& gq = RuleCache::gauss(gauss_order);
    double acc = 0;
    std::vector<double> bn(l.nn_count()), bs(std::max(l.sf_count(), 1));
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.element(e);
        for (size_t i = 0; i < gq.nodes.size(); ++i) {
            double t = gq.nodes[i];
            double w = gq.weights[i] * el.geo.dgamma(t).norm();
            TracePointValues v = at(e, t);
            l.nn_basis(e, t, bn.data());
            double qnn = 0;
            for (int k = 0; k < l.nn_count(); ++k) qnn += bn[k] * q.values[l.nn_dof(e, k)];
            acc -= w * qnn * v.vn;
            if (l.sf_count() > 0) {
                l.sf_basis(e, t, bs.data());
                double qsf = 0;
                for (int k = 0; k < l.sf_count(); ++k) qsf += bs[k] * q.values[l.sf_dof(e, k)];
                acc += w * qsf * v.v0;
            }
        }
    }
    for (int z : l.j_nodes()) acc += q.values[l.j_dof(z)] * v0_at(z);
    return acc;
}

inline double duality_pair(const NeumannCoeffs& q, const TraceFunctions& g, int gauss_order = 16) {
    const BoundaryMesh& mesh = q.layout->mesh();
    auto at = [&g](int e, double t) {
        TracePointValues v;
        v.v0 = g.v0(e, t);
        v.vn = g.vn(e, t);
        return v;
    };
    auto v0_at = [&g, &mesh](int z) { return g.v0(mesh.element_after(z), 0.0); };
    return duality_pair_eval(q, at, v0_at, gauss_order);
}

inline double duality_pair(const NeumannCoeffs& q, const DirichletCoeffs& v,
                           int gauss_order = 16) {
    auto at = [&v](int e, double t) { return eval_dirichlet(v, e, t); };
    auto v0_at = [&v](int z) { return v.values[v.space->dof_v0(z)]; };
    return duality_pair_eval(q, at, v0_at, gauss_order);
}

/// Canonical interpolation: matches nodal values, nodal ambient gradients,
/// and element moments of the data.
inline DirichletCoeffs interpolate_Ih(const TraceFunctions& g, const DirichletSpace& Y,
                                      int gauss_order = 16) {
    const BoundaryMesh& mesh = Y.mesh();
    Vector c = Vector::Zero(Y.dim());
    for (int z = 0; z < mesh.num_nodes(); ++z) {
        int ea = mesh.element_after(z);
        Frame f = frame_at(mesh.element(ea), 0.0);
        double v0 = g.v0(ea, 0.0), dv0 = g.dv0_ds(ea, 0.0), vn = g.vn(ea, 0.0);
        if (!std::isfinite(v0) || !std::isfinite(dv0) || !std::isfinite(vn))
            throw std::runtime_error("interpolate_Ih: data not finite at a node");
        Vec2 w = dv0 * f.tangent + vn * f.normal;
        c[Y.dof_v0(z)] = v0;
        c[Y.dof_w(z, 0)] = w.x();
        c[Y.dof_w(z, 1)] = w.y();
    }
    const Rule1D& gq = RuleCache::gauss(std::max(gauss_order, Y.p() + 4));
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.element(e);
        for (int j = 0; j < Y.n_mom_n(); ++j) {
            double acc = 0;
            for (size_t i = 0; i < gq.nodes.size(); ++i) {
                double t = gq.nodes[i];
                double w = gq.weights[i] * el.geo.dgamma(t).norm();
                Vector P = shifted_legendre_vec(Y.p() - 1, t);
                acc += w * g.vn(e, t) * P.dot(Y.moment_polys_n(e).col(j));
            }
            c[Y.dof_mom_n(e, j)] = acc;
        }
        for (int j = 0; j < Y.n_mom_0(); ++j) {
            double acc = 0;
            for (size_t i = 0; i < gq.nodes.size(); ++i) {
                double t = gq.nodes[i];
                double w = gq.weights[i] * el.geo.dgamma(t).norm();
                Vector P = shifted_legendre_vec(Y.p() - 2, t);
                acc += w * g.v0(e, t) * P.dot(Y.moment_polys_0(e).col(j));
            }
            c[Y.dof_mom_0(e, j)] = acc;
        }
    }
    return DirichletCoeffs(Y, std::move(c));
}

/// Orthogonal projection onto Y_h in H^{1,0}(Gamma) = H^1 x L_2:
/// <u0,v0> + <d_t u0, d_t v0> + <u_n, v_n>.
inline DirichletCoeffs project_Pih(const TraceFunctions& g, const DirichletSpace& Y,
                                   int gauss_order = 16) {
    const BoundaryMesh& mesh = Y.mesh();
    Matrix G = Matrix::Zero(Y.dim(), Y.dim());
    Vector b = Vector::Zero(Y.dim());
    const Rule1D& gq = RuleCache::gauss(gauss_order);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.element(e);
        const auto& gd = Y.element_dofs(e);
        int nc = static_cast<int>(gd.size());
        std::vector<double> v0(nc), dv0(nc), d2v0(nc), vn(nc);
        for (size_t i = 0; i < gq.nodes.size(); ++i) {
            double t = gq.nodes[i];
            double w = gq.weights[i] * el.geo.dgamma(t).norm();
            Y.eval_local(e, t, v0.data(), dv0.data(), d2v0.data(), vn.data());
            double g0 = g.v0(e, t), gd0 = g.dv0_ds(e, t), gn = g.vn(e, t);
            for (int a = 0; a < nc; ++a) {
                b[gd[a]] += w * (v0[a] * g0 + dv0[a] * gd0 + vn[a] * gn);
                for (int bcol = 0; bcol < nc; ++bcol)
                    G(gd[a], gd[bcol]) += w * (v0[a] * v0[bcol] + dv0[a] * dv0[bcol] + vn[a] * vn[bcol]);
            }
        }
    }
    Eigen::LDLT<Matrix> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("project_Pih: singular Gram matrix (invalid basis)");
    Vector c = ldlt.solve(b);
    return DirichletCoeffs(Y, std::move(c));
}

inline DirichletCoeffs project_Pih(const DirichletCoeffs& g, const DirichletSpace& Y,
                                   int gauss_order = 16) {
    TraceFunctions t;
    t.v0 = [&g](int e, double tt) { return eval_dirichlet(g, e, tt).v0; };
    t.dv0_ds = [&g](int e, double tt) { return eval_dirichlet(g, e, tt).dv0_ds; };
    t.d2v0_ds2 = [&g](int e, double tt) { return eval_dirichlet(g, e, tt).d2v0_ds2; };
    t.vn = [&g](int e, double tt) { return eval_dirichlet(g, e, tt).vn; };
    return project_Pih(t, Y, gauss_order);
}

/// Element-wise L2 projections of the Neumann components onto a reference
/// layout with Legendre blocks of the given degrees; the J block copies the
/// exact corner forces.
inline NeumannCoeffs project_neumann_components(const TraceFunctions& m, const NeumannLayout& ref,
                                                int gauss_order = 20) {
    const BoundaryMesh& mesh = ref.mesh();
    Vector c = Vector::Zero(ref.dim());
    const Rule1D& gq = RuleCache::gauss(gauss_order);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.element(e);
        int dn = ref.nn_degree(), ds = ref.sf_degree();
        Matrix Gn = Matrix::Zero(dn + 1, dn + 1), Gs = Matrix::Zero(ds + 1, ds + 1);
        Vector bn = Vector::Zero(dn + 1), bs = Vector::Zero(ds + 1);
        for (size_t i = 0; i < gq.nodes.size(); ++i) {
            double t = gq.nodes[i];
            double w = gq.weights[i] * el.geo.dgamma(t).norm();
            Vector Pn = shifted_legendre_vec(dn, t), Ps = shifted_legendre_vec(ds, t);
            Gn += w * Pn * Pn.transpose();
            Gs += w * Ps * Ps.transpose();
            bn += w * m.m_nn(e, t) * Pn;
            bs += w * m.m_sf(e, t) * Ps;
        }
        Vector cn = Gn.ldlt().solve(bn), cs = Gs.ldlt().solve(bs);
        for (int k = 0; k <= dn; ++k) c[ref.nn_dof(e, k)] = cn[k];
        for (int k = 0; k <= ds; ++k) c[ref.sf_dof(e, k)] = cs[k];
    }
    for (int z : ref.j_nodes()) c[ref.j_dof(z)] = m.m_J(z);
    return NeumannCoeffs(ref, std::move(c));
}

} // namespace platebem

#endif
