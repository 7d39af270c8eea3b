#ifndef PLATEBEM_ASSEMBLY_HPP
#define PLATEBEM_ASSEMBLY_HPP

#include "platebem/common.hpp"
#include "platebem/kernels.hpp"
#include "platebem/quadrature.hpp"
#include "platebem/trace_spaces.hpp"

#include <fstream>
#include <iomanip>

namespace platebem {

struct AssemblyOptions {
    int gauss_order = 16;
    int log_degree = -1;  // -1: 2*max(nn degrees)+6
    bool near_singular_upgrade = true;
};

namespace detail {

/// All pair rules an assembly pass can need, built once up front so the
/// parallel element loops only read.
class PairRuleSet {
public:
    PairRuleSet(const BoundaryMesh& mesh, int n, int d) : mesh_(&mesh), n_(n), d_(d) {
        auto add = [&](PairClass::Kind kind, std::vector<std::pair<int, int>> shared) {
            PairClass c;
            c.kind = kind;
            c.shared = std::move(shared);
            keyed_.push_back({c, pair_rule(c, KernelKind::log_singular, n, d),
                              pair_rule(c, KernelKind::smooth, n, d)});
        };
        add(PairClass::Kind::coincident, {});
        add(PairClass::Kind::adjacent_shared_node, {{1, 0}});
        add(PairClass::Kind::adjacent_shared_node, {{0, 1}});
        if (mesh.num_elements() == 2) add(PairClass::Kind::adjacent_shared_node, {{1, 0}, {0, 1}});
        PairClass dis;
        disjoint_ = pair_rule(dis, KernelKind::smooth, n, d);
        disjoint_fine_ = pair_rule(dis, KernelKind::smooth, 2 * n, d);
        samples_.resize(mesh.num_elements());
        for (int e = 0; e < mesh.num_elements(); ++e)
            for (int k = 0; k < 5; ++k) samples_[e][k] = mesh.element(e).geo.gamma(k / 4.0);
    }

    /// lg: rule for log-singular kernels, sm: for bounded kernels
    void select(int er, int ec, bool near_upgrade, const PairRule2D*& lg,
                const PairRule2D*& sm) const {
        PairClass c = classify_pair(*mesh_, er, ec);
        if (c.kind == PairClass::Kind::disjoint) {
            const PairRule2D* r = &disjoint_;
            if (near_upgrade) {
                double dmin = std::numeric_limits<double>::max();
                for (int i = 0; i < 5; ++i)
                    for (int j = 0; j < 5; ++j)
                        dmin = std::min(dmin, (samples_[er][i] - samples_[ec][j]).norm());
                if (dmin < std::max(mesh_->element(er).h, mesh_->element(ec).h)) r = &disjoint_fine_;
            }
            lg = sm = r;
            return;
        }
        for (const auto& k : keyed_) {
            if (k.cls.kind == c.kind && k.cls.shared == c.shared) {
                lg = &k.log;
                sm = &k.smooth;
                return;
            }
        }
        throw std::logic_error("PairRuleSet: unhandled pair class");
    }

    /// 1D rule on an element for a kernel with a log singularity at node z;
    /// plain Gauss when z is not an endpoint or the kernel is bounded
    const Rule1D& gauss() const { return RuleCache::gauss(n_); }
    Rule1D node_rule(int e, int z) const {
        const Element& el = mesh_->element(e);
        int end = el.start_node == z ? 0 : (el.end_node == z ? 1 : -1);
        if (end < 0) return RuleCache::gauss(n_);
        const LogRule1D& lr = RuleCache::log(d_);
        Rule1D r;
        r.weights = lr.weights;
        r.nodes = lr.nodes;
        if (end == 1)
            for (auto& t : r.nodes) t = 1 - t;
        return r;
    }

private:
    struct Keyed {
        PairClass cls;
        PairRule2D log, smooth;
    };
    const BoundaryMesh* mesh_;
    int n_, d_;
    std::vector<Keyed> keyed_;
    PairRule2D disjoint_, disjoint_fine_;
    std::vector<std::array<Vec2, 5>> samples_;
};

inline int effective_log_degree(const AssemblyOptions& opts, int nn_deg_row, int nn_deg_col) {
    return opts.log_degree >= 0 ? opts.log_degree : 2 * std::max(nn_deg_row, nn_deg_col) + 6;
}

} // namespace detail

/// Galerkin matrix of the single-layer operator between two Neumann-density
/// layouts: entry (i,j) = <V phi_j, phi_i>. Every block is integrated from
/// its own kernel formula; no transpose mirroring, so the symmetry of the
/// result is a genuine quadrature diagnostic.
inline Matrix assemble_V(const NeumannLayout& rowL, const NeumannLayout& colL, const PlateModel&,
                         const AssemblyOptions& opts = {}) {
    if (&rowL.mesh() != &colL.mesh())
        throw std::invalid_argument("assemble_V: layouts live on different meshes");
    const BoundaryMesh& mesh = rowL.mesh();
    int ne = mesh.num_elements();
    int n = opts.gauss_order;
    int d = detail::effective_log_degree(opts, rowL.nn_degree(), colL.nn_degree());
    detail::PairRuleSet rules(mesh, n, d);
    Matrix A = Matrix::Zero(rowL.dim(), colL.dim());

    parallel_for(ne, [&](int er) {
        std::vector<double> rnn(rowL.nn_count()), rsf(std::max(rowL.sf_count(), 1));
        std::vector<double> cnn(colL.nn_count()), csf(std::max(colL.sf_count(), 1));
        for (int ec = 0; ec < ne; ++ec) {
            const PairRule2D *lg, *sm;
            rules.select(er, ec, opts.near_singular_upgrade, lg, sm);
            bool single = (lg == sm);  // disjoint: one Gauss rule serves both kernel groups
            for (int pass = 0; pass < (single ? 1 : 2); ++pass) {
                const PairRule2D& rule = pass == 0 ? *lg : *sm;
                bool do_log_group = pass == 0;
                bool do_smooth_group = single || pass == 1;
                for (size_t q = 0; q < rule.size(); ++q) {
                    Frame fx = frame_at(mesh.element(er), rule.s[q]);
                    Frame fy = frame_at(mesh.element(ec), rule.t[q]);
                    double w = rule.w[q] * fx.speed * fy.speed;
                    Vec2 dd = fx.point - fy.point;
                    double r2 = dd.squaredNorm();
                    if (r2 < kCoincident2) continue;  // measure-zero guard
                    double lgr = 0.5 * std::log(r2);
                    rowL.nn_basis(er, rule.s[q], rnn.data());
                    colL.nn_basis(ec, rule.t[q], cnn.data());
                    if (rowL.sf_count()) rowL.sf_basis(er, rule.s[q], rsf.data());
                    if (colL.sf_count()) colL.sf_basis(ec, rule.t[q], csf.data());
                    if (do_log_group) {
                        double k_sfsf = kInvPi8 * r2 * lgr;
                        double k_nnsf = kInvPi8 * (2 * lgr + 1) * fy.normal.dot(dd);
                        double k_sfnn = -kInvPi8 * (2 * lgr + 1) * fx.normal.dot(dd);
                        double k_nnnn_log = -kInvPi8 * (2 * lgr + 1) * fx.normal.dot(fy.normal);
                        for (int i = 0; i < rowL.sf_count(); ++i) {
                            for (int j = 0; j < colL.sf_count(); ++j)
                                A(rowL.sf_dof(er, i), colL.sf_dof(ec, j)) += w * k_sfsf * rsf[i] * csf[j];
                            for (int j = 0; j < colL.nn_count(); ++j)
                                A(rowL.sf_dof(er, i), colL.nn_dof(ec, j)) += w * k_nnsf * rsf[i] * cnn[j];
                        }
                        for (int i = 0; i < rowL.nn_count(); ++i) {
                            for (int j = 0; j < colL.sf_count(); ++j)
                                A(rowL.nn_dof(er, i), colL.sf_dof(ec, j)) += w * k_sfnn * rnn[i] * csf[j];
                            for (int j = 0; j < colL.nn_count(); ++j)
                                A(rowL.nn_dof(er, i), colL.nn_dof(ec, j)) += w * k_nnnn_log * rnn[i] * cnn[j];
                        }
                    }
                    if (do_smooth_group) {
                        double k_nnnn_rat = -kInvPi8 * 2 * fx.normal.dot(dd) * fy.normal.dot(dd) / r2;
                        for (int i = 0; i < rowL.nn_count(); ++i)
                            for (int j = 0; j < colL.nn_count(); ++j)
                                A(rowL.nn_dof(er, i), colL.nn_dof(ec, j)) += w * k_nnnn_rat * rnn[i] * cnn[j];
                    }
                }
            }
        }
        // J columns: 1D integrals over the row element against the column
        // node's point source
        for (int z : colL.j_nodes()) {
            int jc = colL.j_dof(z);
            Rule1D r = rules.node_rule(er, z);
            Vec2 zp = mesh.node(z).position;
            for (size_t q = 0; q < r.nodes.size(); ++q) {
                Frame fx = frame_at(mesh.element(er), r.nodes[q]);
                double w = r.weights[q] * fx.speed;
                Vec2 dd = fx.point - zp;
                double r2 = dd.squaredNorm();
                if (r2 < kCoincident2) continue;
                double lgr = 0.5 * std::log(r2);
                rowL.nn_basis(er, r.nodes[q], rnn.data());
                for (int i = 0; i < rowL.nn_count(); ++i)
                    A(rowL.nn_dof(er, i), jc) += -w * kInvPi8 * (2 * lgr + 1) * fx.normal.dot(dd) * rnn[i];
                if (rowL.sf_count()) {
                    rowL.sf_basis(er, r.nodes[q], rsf.data());
                    for (int i = 0; i < rowL.sf_count(); ++i)
                        A(rowL.sf_dof(er, i), jc) += w * kInvPi8 * r2 * lgr * rsf[i];
                }
            }
        }
    });

    // J rows: the first trace of V at the row node
    int nj = static_cast<int>(rowL.j_nodes().size());
    parallel_for(nj, [&](int jz) {
        int z = rowL.j_nodes()[jz];
        int jr = rowL.j_dof(z);
        Vec2 zp = mesh.node(z).position;
        std::vector<double> cnn(colL.nn_count()), csf(std::max(colL.sf_count(), 1));
        for (int ec = 0; ec < ne; ++ec) {
            Rule1D r = rules.node_rule(ec, z);
            for (size_t q = 0; q < r.nodes.size(); ++q) {
                Frame fy = frame_at(mesh.element(ec), r.nodes[q]);
                double w = r.weights[q] * fy.speed;
                Vec2 dd = zp - fy.point;
                double r2 = dd.squaredNorm();
                if (r2 < kCoincident2) continue;
                double lgr = 0.5 * std::log(r2);
                colL.nn_basis(ec, r.nodes[q], cnn.data());
                for (int j = 0; j < colL.nn_count(); ++j)
                    A(jr, colL.nn_dof(ec, j)) += w * kInvPi8 * (2 * lgr + 1) * fy.normal.dot(dd) * cnn[j];
                if (colL.sf_count()) {
                    colL.sf_basis(ec, r.nodes[q], csf.data());
                    for (int j = 0; j < colL.sf_count(); ++j)
                        A(jr, colL.sf_dof(ec, j)) += w * kInvPi8 * r2 * lgr * csf[j];
                }
            }
        }
        for (int z2 : colL.j_nodes()) {
            if (z2 == z) continue;  // 0^2 log 0 = 0
            double r2 = (zp - mesh.node(z2).position).squaredNorm();
            A(jr, colL.j_dof(z2)) += kInvPi8 * r2 * 0.5 * std::log(r2);
        }
    });
    return A;
}

/// Galerkin pairing <K_nu psi_j, phi_i> of the double-layer operator against
/// the X_h functionals; columns come from the generic trial-side field, so
/// the same routine assembles the matrix (Y_h basis) and the right-hand side
/// of closed-form data (single column).
inline Matrix assemble_K(const NeumannLayout& xL, const DirichletField& field,
                         const PlateModel& model, const AssemblyOptions& opts = {}) {
    if (&xL.mesh() != &field.mesh())
        throw std::invalid_argument("assemble_K: row layout and field on different meshes");
    const BoundaryMesh& mesh = xL.mesh();
    int ne = mesh.num_elements();
    int n = opts.gauss_order;
    int d = detail::effective_log_degree(opts, xL.nn_degree(), xL.nn_degree());
    detail::PairRuleSet rules(mesh, n, d);
    const double nu = model.nu;
    Matrix K = Matrix::Zero(xL.dim(), field.cols());

    // (K0nn_b) inner integrals: acc(z, col) = sum_E' int_E' log|z-y| d_t v0
    Matrix acc = Matrix::Zero(mesh.num_nodes(), field.cols());
    parallel_for(mesh.num_nodes(), [&](int z) {
        Vec2 zp = mesh.node(z).position;
        for (int ec = 0; ec < ne; ++ec) {
            const auto& cols = field.element_cols(ec);
            int nc = static_cast<int>(cols.size());
            std::vector<double> v0(nc), dv0(nc), d2v0(nc), vn(nc);
            Rule1D r = rules.node_rule(ec, z);
            for (size_t q = 0; q < r.nodes.size(); ++q) {
                Frame fy = frame_at(mesh.element(ec), r.nodes[q]);
                double w = r.weights[q] * fy.speed;
                double r2 = (zp - fy.point).squaredNorm();
                if (r2 < kCoincident2) continue;
                field.eval(ec, r.nodes[q], v0.data(), dv0.data(), d2v0.data(), vn.data());
                for (int c = 0; c < nc; ++c) acc(z, cols[c]) += w * 0.5 * std::log(r2) * dv0[c];
            }
        }
    });

    parallel_for(ne, [&](int er) {
        std::vector<double> rnn(xL.nn_count()), rdn(xL.nn_count()), rsf(std::max(xL.sf_count(), 1));
        for (int ec = 0; ec < ne; ++ec) {
            const auto& cols = field.element_cols(ec);
            int nc = static_cast<int>(cols.size());
            std::vector<double> v0(nc), dv0(nc), d2v0(nc), vn(nc), tv(2 * nc);
            const PairRule2D *lg, *sm;
            rules.select(er, ec, opts.near_singular_upgrade, lg, sm);
            bool single = (lg == sm);
            for (int pass = 0; pass < (single ? 1 : 2); ++pass) {
                const PairRule2D& rule = pass == 0 ? *lg : *sm;
                bool do_log = pass == 0;
                bool do_smooth = single || pass == 1;
                for (size_t q = 0; q < rule.size(); ++q) {
                    Frame fx = frame_at(mesh.element(er), rule.s[q]);
                    Frame fy = frame_at(mesh.element(ec), rule.t[q]);
                    double w = rule.w[q] * fx.speed * fy.speed;
                    Vec2 dd = fx.point - fy.point;
                    double r2 = dd.squaredNorm();
                    if (r2 < kCoincident2) continue;
                    double lgr = 0.5 * std::log(r2);
                    field.eval(ec, rule.t[q], v0.data(), dv0.data(), d2v0.data(), vn.data());
                    // d_t(d_t v0 n_y) = (d2 v0) n_y + (d_t v0) kappa t_y
                    for (int c = 0; c < nc; ++c) {
                        tv[2 * c] = d2v0[c] * fy.normal.x() + dv0[c] * fy.curvature * fy.tangent.x();
                        tv[2 * c + 1] = d2v0[c] * fy.normal.y() + dv0[c] * fy.curvature * fy.tangent.y();
                    }
                    xL.nn_basis(er, rule.s[q], rnn.data());
                    if (do_log) {
                        xL.nn_basis(er, rule.s[q], rdn.data(), 1);
                        // -(K0nn_a)
                        double kl = -kInvPi2 * lgr;
                        for (int i = 0; i < xL.nn_count(); ++i)
                            for (int c = 0; c < nc; ++c)
                                K(xL.nn_dof(er, i), cols[c]) += w * kl * dv0[c] * rdn[i];
                        // -(Ktnn_a), log part of the kernel
                        double klog = -kInvPi8 * (2 * lgr + 1);
                        for (int i = 0; i < xL.nn_count(); ++i)
                            for (int c = 0; c < nc; ++c) {
                                double dot = fx.normal.x() * tv[2 * c] + fx.normal.y() * tv[2 * c + 1];
                                K(xL.nn_dof(er, i), cols[c]) += w * (1 - nu) * klog * dot * rnn[i];
                            }
                        if (xL.sf_count()) {
                            xL.sf_basis(er, rule.s[q], rsf.data());
                            double knl = (1 + nu) * kInvPi4 * lgr;
                            for (int i = 0; i < xL.sf_count(); ++i)
                                for (int c = 0; c < nc; ++c)
                                    K(xL.sf_dof(er, i), cols[c]) += w * knl * vn[c] * rsf[i];
                        }
                    }
                    if (do_smooth) {
                        double nyd = fy.normal.dot(dd), nxd = fx.normal.dot(dd);
                        double dlp = kInvPi2 * nyd / r2;
                        double tpart = (1 - nu) * kInvPi4 * fy.tangent.dot(dd) * nyd / r2;
                        double ncst = (1 + 3 * nu) * kInvPi8;
                        double nrat = (1 - nu) * kInvPi4 * nyd * nyd / r2;
                        double knnn = (1 + nu) * kInvPi4 * nxd / r2 +
                                      (1 - nu) * kInvPi2 *
                                          (nyd * fx.normal.dot(fy.normal) / r2 -
                                           nyd * nyd * nxd / (r2 * r2));
                        if (xL.sf_count()) {
                            xL.sf_basis(er, rule.s[q], rsf.data());
                            for (int i = 0; i < xL.sf_count(); ++i)
                                for (int c = 0; c < nc; ++c)
                                    K(xL.sf_dof(er, i), cols[c]) +=
                                        w * (dlp * v0[c] + tpart * dv0[c] + (ncst + nrat) * vn[c]) * rsf[i];
                        }
                        // -(Ktnn_a), rational part; and -(Knnn)
                        Vec2 rat = -kInvPi4 * (nxd / r2) * dd;
                        for (int i = 0; i < xL.nn_count(); ++i)
                            for (int c = 0; c < nc; ++c) {
                                double dot = rat.x() * tv[2 * c] + rat.y() * tv[2 * c + 1];
                                K(xL.nn_dof(er, i), cols[c]) +=
                                    w * ((1 - nu) * dot - knnn * vn[c]) * rnn[i];
                            }
                    }
                }
            }
        }
        // -(K0nn_b): jump of the test density at the row element endpoints
        {
            const Element& el = mesh.element(er);
            xL.nn_basis(er, 0.0, rnn.data());
            for (int i = 0; i < xL.nn_count(); ++i)
                for (int c = 0; c < field.cols(); ++c)
                    K(xL.nn_dof(er, i), c) += -kInvPi2 * rnn[i] * acc(el.start_node, c);
            xL.nn_basis(er, 1.0, rnn.data());
            for (int i = 0; i < xL.nn_count(); ++i)
                for (int c = 0; c < field.cols(); ++c)
                    K(xL.nn_dof(er, i), c) += kInvPi2 * rnn[i] * acc(el.end_node, c);
        }
        // -(Ktnn_b): trial-side jumps [d_t v0 n] at mesh nodes
        for (int z = 0; z < mesh.num_nodes(); ++z) {
            auto jumps = field.node_jump(z);
            Vec2 zp = mesh.node(z).position;
            // log part of ktnn_c with the node-aware rule, rational part with Gauss
            Rule1D rl = rules.node_rule(er, z);
            const Rule1D& rg = rules.gauss();
            for (int part = 0; part < 2; ++part) {
                const Rule1D& r = part == 0 ? rl : rg;
                for (size_t q = 0; q < r.nodes.size(); ++q) {
                    Frame fx = frame_at(mesh.element(er), r.nodes[q]);
                    double w = r.weights[q] * fx.speed;
                    Vec2 dd = fx.point - zp;
                    double r2 = dd.squaredNorm();
                    if (r2 < kCoincident2) continue;
                    Vec2 kvec;
                    if (part == 0)
                        kvec = -kInvPi8 * (std::log(r2) + 1) * fx.normal;
                    else
                        kvec = -kInvPi4 * (fx.normal.dot(dd) / r2) * dd;
                    xL.nn_basis(er, r.nodes[q], rnn.data());
                    for (const auto& [c, jv] : jumps) {
                        double dot = kvec.dot(jv);
                        for (int i = 0; i < xL.nn_count(); ++i)
                            K(xL.nn_dof(er, i), c) += w * (1 - nu) * dot * rnn[i];
                    }
                }
            }
        }
    });

    // J rows: K_{nu,0} at the row node, plus the sigma correction
    int nj = static_cast<int>(xL.j_nodes().size());
    parallel_for(nj, [&](int jz) {
        int z = xL.j_nodes()[jz];
        int jr = xL.j_dof(z);
        Vec2 zp = mesh.node(z).position;
        for (int ec = 0; ec < ne; ++ec) {
            const auto& cols = field.element_cols(ec);
            int nc = static_cast<int>(cols.size());
            std::vector<double> v0(nc), dv0(nc), d2v0(nc), vn(nc);
            const Rule1D& rg = rules.gauss();
            for (size_t q = 0; q < rg.nodes.size(); ++q) {
                Frame fy = frame_at(mesh.element(ec), rg.nodes[q]);
                double w = rg.weights[q] * fy.speed;
                Vec2 dd = zp - fy.point;
                double r2 = dd.squaredNorm();
                if (r2 < kCoincident2) continue;
                field.eval(ec, rg.nodes[q], v0.data(), dv0.data(), d2v0.data(), vn.data());
                double nyd = fy.normal.dot(dd);
                double dlp = kInvPi2 * nyd / r2;
                double tpart = (1 - nu) * kInvPi4 * fy.tangent.dot(dd) * nyd / r2;
                double ncst = (1 + 3 * nu) * kInvPi8;
                double nrat = (1 - nu) * kInvPi4 * nyd * nyd / r2;
                for (int c = 0; c < nc; ++c)
                    K(jr, cols[c]) += w * (dlp * v0[c] + tpart * dv0[c] + (ncst + nrat) * vn[c]);
            }
            Rule1D rl = rules.node_rule(ec, z);
            for (size_t q = 0; q < rl.nodes.size(); ++q) {
                Frame fy = frame_at(mesh.element(ec), rl.nodes[q]);
                double w = rl.weights[q] * fy.speed;
                double r2 = (zp - fy.point).squaredNorm();
                if (r2 < kCoincident2) continue;
                field.eval(ec, rl.nodes[q], v0.data(), dv0.data(), d2v0.data(), vn.data());
                double knl = (1 + nu) * kInvPi4 * 0.5 * std::log(r2);
                for (int c = 0; c < nc; ++c) K(jr, cols[c]) += w * knl * vn[c];
            }
        }
        if (mesh.node(z).is_corner) {
            double s = mesh.sigma(z) - 0.5;
            for (const auto& [c, val] : field.node_value(z)) K(jr, c) += s * val;
        }
    });
    return K;
}

/// Duality pairing block: entry (i, j) = ell_{phi_i}(psi_j), the 1/2-term
/// mass of the right-hand side.
inline Matrix assemble_mass_pair(const NeumannLayout& xL, const DirichletField& field,
                                 const AssemblyOptions& opts = {}) {
    const BoundaryMesh& mesh = xL.mesh();
    int ne = mesh.num_elements();
    const Rule1D& gq = RuleCache::gauss(opts.gauss_order);
    Matrix M = Matrix::Zero(xL.dim(), field.cols());
    parallel_for(ne, [&](int e) {
        const auto& cols = field.element_cols(e);
        int nc = static_cast<int>(cols.size());
        std::vector<double> v0(nc), dv0(nc), d2v0(nc), vn(nc);
        std::vector<double> bn(xL.nn_count()), bs(std::max(xL.sf_count(), 1));
        for (size_t q = 0; q < gq.nodes.size(); ++q) {
            double t = gq.nodes[q];
            Frame f = frame_at(mesh.element(e), t);
            double w = gq.weights[q] * f.speed;
            field.eval(e, t, v0.data(), dv0.data(), d2v0.data(), vn.data());
            xL.nn_basis(e, t, bn.data());
            for (int i = 0; i < xL.nn_count(); ++i)
                for (int c = 0; c < nc; ++c) M(xL.nn_dof(e, i), cols[c]) -= w * bn[i] * vn[c];
            if (xL.sf_count()) {
                xL.sf_basis(e, t, bs.data());
                for (int i = 0; i < xL.sf_count(); ++i)
                    for (int c = 0; c < nc; ++c) M(xL.sf_dof(e, i), cols[c]) += w * bs[i] * v0[c];
            }
        }
    });
    for (int z : xL.j_nodes())
        for (const auto& [c, val] : field.node_value(z)) M(xL.j_dof(z), c) += val;
    return M;
}

/// P_1 multiplier block: column k = pairing of the X_h basis with the trace
/// (mu_k, n . grad mu_k), mu in {1, x1, x2}.
inline Matrix assemble_multiplier(const NeumannLayout& xL, const AssemblyOptions& opts = {}) {
    const BoundaryMesh& mesh = xL.mesh();
    const Rule1D& gq = RuleCache::gauss(opts.gauss_order);
    Matrix B = Matrix::Zero(xL.dim(), 3);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        std::vector<double> bn(xL.nn_count()), bs(std::max(xL.sf_count(), 1));
        for (size_t q = 0; q < gq.nodes.size(); ++q) {
            double t = gq.nodes[q];
            Frame f = frame_at(mesh.element(e), t);
            double w = gq.weights[q] * f.speed;
            double mu[3] = {1.0, f.point.x(), f.point.y()};
            double dmu[3] = {0.0, f.normal.x(), f.normal.y()};
            xL.nn_basis(e, t, bn.data());
            for (int k = 0; k < 3; ++k)
                for (int i = 0; i < xL.nn_count(); ++i) B(xL.nn_dof(e, i), k) -= w * bn[i] * dmu[k];
            if (xL.sf_count()) {
                xL.sf_basis(e, t, bs.data());
                for (int k = 0; k < 3; ++k)
                    for (int i = 0; i < xL.sf_count(); ++i) B(xL.sf_dof(e, i), k) += w * bs[i] * mu[k];
            }
        }
    }
    for (int z : xL.j_nodes()) {
        Vec2 zp = mesh.node(z).position;
        B(xL.j_dof(z), 0) += 1.0;
        B(xL.j_dof(z), 1) += zp.x();
        B(xL.j_dof(z), 2) += zp.y();
    }
    return B;
}

/// Plain-text dense dump (row-major), for oracle comparison.
inline void dump_matrix(const Matrix& M, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_matrix: cannot open " + path);
    out << std::setprecision(17);
    out << M.rows() << " " << M.cols() << "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) out << M(i, j) << (j + 1 < M.cols() ? " " : "");
        out << "\n";
    }
}

} // namespace platebem

#endif
