#ifndef PLATEBEM_STUDY_HPP
#define PLATEBEM_STUDY_HPP

#include "platebem/solver_errors.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace platebem {

struct StudyConfig {
    DomainSpec::Kind domain = DomainSpec::Kind::circle;
    int p = 0;
    int levels = -1;  // -1: 7 for p = 0, 6 otherwise
    double nu = 0.0;
    enum class Projection { Pih, Ih } projection = Projection::Pih;
    int quad_order = 16;
    double scale = 0.1;
    std::string out_dir;
    bool dump_matrices = false;
};

struct StudyRow {
    int level = 0;
    int dofs = 0;
    double energy_err = 0;
    double local_rate = 0;  // slope vs dofs against the previous level
};

struct StudyResult {
    std::vector<StudyRow> rows;
    double fitted_slope = 0;  // least-squares slope over the last 4 rows
    std::string csv_name;
};

inline double fit_slope_lastk(const std::vector<StudyRow>& rows, int k = 4) {
    int n = static_cast<int>(rows.size());
    k = std::min(k, n);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = n - k; i < n; ++i) {
        double x = std::log(double(rows[i].dofs)), y = std::log(rows[i].energy_err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

inline const char* domain_name(DomainSpec::Kind k) {
    switch (k) {
    case DomainSpec::Kind::circle: return "circle";
    case DomainSpec::Kind::square: return "square";
    case DomainSpec::Kind::pacman: return "pacman";
    default: return "custom";
    }
}

/// One refinement level: assemble, project the data, solve, measure the
/// energy error against the higher-order projected reference.
struct LevelOutput {
    int dofs = 0;
    double energy_err = 0;
    Solution sol;
    DirichletCoeffs g_h;
};

inline LevelOutput solve_on_mesh(const BoundaryMesh& mesh, const NeumannSpace& X,
                                 const DirichletSpace& Y, const ManufacturedCase& cs,
                                 const PlateModel& model, const StudyConfig& cfg,
                                 Matrix* dumpA = nullptr) {
    AssemblyOptions opts;
    opts.gauss_order = cfg.quad_order;
    opts.log_degree = 2 * cfg.p + 6;
    TraceFunctions g = exact_neumann_trace(cs, model, mesh);

    Matrix A = assemble_V(X.layout(), X.layout(), model, opts);
    Matrix B = assemble_multiplier(X.layout(), opts);
    YhField yh(Y);
    Matrix K = assemble_K(X.layout(), yh, model, opts);
    Matrix M = assemble_mass_pair(X.layout(), yh, opts);

    DirichletCoeffs g_h = cfg.projection == StudyConfig::Projection::Pih
                              ? project_Pih(g, Y, std::max(cfg.quad_order, 16))
                              : interpolate_Ih(g, Y, std::max(cfg.quad_order, 16));
    Vector rhs = (K + 0.5 * M) * g_h.values;
    Solution sol = solve(build_saddle_system(X, A, B, std::move(rhs)));

    NeumannLayout refL = reference_layout(mesh, cfg.p);
    NeumannCoeffs ref = project_neumann_components(g, refL, std::max(cfg.quad_order, 20));
    double err = energy_error(sol.m_h, ref, model, mesh, opts);

    if (dumpA) *dumpA = A;
    if (cfg.dump_matrices && !cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        std::string base = std::string(cfg.out_dir) + "/" + domain_name(cfg.domain) + "_p" +
                           std::to_string(cfg.p) + "_L" + std::to_string(mesh.level());
        dump_matrix(A, base + "_A.txt");
        dump_matrix(B, base + "_B.txt");
        dump_matrix(K, base + "_K.txt");
        dump_matrix(M, base + "_M.txt");
    }
    LevelOutput out{X.dim(), err, std::move(sol), std::move(g_h)};
    return out;
}

inline StudyResult run_study(const StudyConfig& cfg) {
    if (cfg.p < 0) throw std::invalid_argument("run_study: p must be >= 0");
    int levels = cfg.levels > 0 ? cfg.levels : (cfg.p == 0 ? 7 : 6);
    if (levels < 2) throw std::invalid_argument("run_study: need at least 2 levels");
    DomainSpec spec;
    spec.kind = cfg.domain;
    spec.scale = cfg.scale;
    PlateModel model(cfg.nu);
    ManufacturedCase cs = manufactured_case(cfg.domain);
    BoundaryMesh mesh = build_initial_mesh(spec);
    if (cfg.p <= 1 && !has_noncolinear_nodes(mesh))
        throw std::runtime_error("run_study: initial mesh fails the non-colinearity check");

    StudyResult res;
    for (int L = 0; L < levels; ++L) {
        try {
            NeumannSpace X(mesh, cfg.p);
            DirichletSpace Y(mesh, cfg.p);
            LevelOutput out = solve_on_mesh(mesh, X, Y, cs, model, cfg);
            StudyRow row;
            row.level = L;
            row.dofs = out.dofs;
            row.energy_err = out.energy_err;
            if (!res.rows.empty()) {
                const StudyRow& prev = res.rows.back();
                row.local_rate = std::log(row.energy_err / prev.energy_err) /
                                 std::log(double(row.dofs) / prev.dofs);
            }
            res.rows.push_back(row);
        } catch (const std::exception& ex) {
            throw std::runtime_error("run_study: level " + std::to_string(L) + ": " + ex.what());
        }
        if (L + 1 < levels) mesh = refine_uniform(mesh);
    }
    res.fitted_slope = fit_slope_lastk(res.rows);
    std::ostringstream name;
    name << "geo-" << domain_name(cfg.domain) << "_sol-" << cs.name << "_p-" << cfg.p << "_q-"
         << cfg.p << ".csv";
    res.csv_name = name.str();
    return res;
}

/// CSV in the convergence-plot format: header `dofs,errs`, one row per
/// level, full double precision, LF line endings.
inline void emit_csv(const std::vector<StudyRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    out << "dofs,errs\n";
    out << std::setprecision(17);
    for (const auto& r : rows) out << r.dofs << "," << r.energy_err << "\n";
    if (!out) throw std::runtime_error("emit_csv: write failure on " + path);
}

/// gnuplot-friendly annotation with the reference slope through the last point
inline void emit_rate_annotation(const std::vector<StudyRow>& rows, int p,
                                 const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_rate_annotation: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_rate_annotation: cannot open " + path);
    double slope = -(p + 1.5);
    const StudyRow& last = rows.back();
    double c = last.energy_err / std::pow(double(last.dofs), slope);
    out << std::setprecision(17);
    out << "# reference slope " << slope << "; use: c*x**slope\n";
    out << "slope = " << slope << "\n";
    out << "c = " << c << "\n";
    for (const auto& r : rows)
        out << r.dofs << " " << c * std::pow(double(r.dofs), slope) << "\n";
}

} // namespace platebem

#endif
