#ifndef PLATEBEM_GEOMETRY_HPP
#define PLATEBEM_GEOMETRY_HPP

#include "platebem/common.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace platebem {

/// One smooth boundary piece, parametrized over [0,1] with constant speed:
/// straight segments and circular arcs cover all built-in domains and the
/// plain-text custom format.
struct ArcGeometry {
    enum class Kind { segment, circular };
    Kind kind = Kind::segment;
    Vec2 p0{0, 0}, p1{0, 0};                       // segment
    Vec2 center{0, 0};                             // circular
    double radius = 0, theta0 = 0, theta1 = 0;     // circular, positive sweep ccw

    Vec2 gamma(double t) const {
        if (kind == Kind::segment) return p0 + t * (p1 - p0);
        double th = theta0 + (theta1 - theta0) * t;
        return center + radius * Vec2(std::cos(th), std::sin(th));
    }
    Vec2 dgamma(double t) const {
        if (kind == Kind::segment) return p1 - p0;
        double th = theta0 + (theta1 - theta0) * t;
        double w = theta1 - theta0;
        return radius * w * Vec2(-std::sin(th), std::cos(th));
    }
    Vec2 d2gamma(double t) const {
        if (kind == Kind::segment) return Vec2(0, 0);
        double th = theta0 + (theta1 - theta0) * t;
        double w = theta1 - theta0;
        return -radius * w * w * Vec2(std::cos(th), std::sin(th));
    }
    double arc_length() const {
        if (kind == Kind::segment) return (p1 - p0).norm();
        return radius * std::abs(theta1 - theta0);
    }
    ArcGeometry first_half() const {
        ArcGeometry a = *this;
        if (kind == Kind::segment) a.p1 = 0.5 * (p0 + p1);
        else a.theta1 = 0.5 * (theta0 + theta1);
        return a;
    }
    ArcGeometry second_half() const {
        ArcGeometry a = *this;
        if (kind == Kind::segment) a.p0 = 0.5 * (p0 + p1);
        else a.theta0 = 0.5 * (theta0 + theta1);
        return a;
    }
};

/// Mesh element: one arc piece with its global start/end node ids.
struct Element {
    ArcGeometry geo;
    int start_node = -1;
    int end_node = -1;
    double h = 0;  // arc length
};

struct Node {
    Vec2 position{0, 0};
    bool is_corner = false;
    double sigma = 0.5;  // interior angle / (2 pi)
};

/// Local boundary frame. Conventions: t = gamma'/|gamma'|, n = (t_y, -t_x)
/// (exterior for counterclockwise curves), curvature signed by the Frenet
/// relation dn/ds = kappa t, i.e. kappa = +1/R on a ccw circle.
struct Frame {
    Vec2 point;
    Vec2 tangent;
    Vec2 normal;
    double curvature = 0;
    double speed = 0;  // |gamma'(t)|
};

inline Frame frame_at(const Element& e, double t) {
    Vec2 dg = e.geo.dgamma(t);
    double sp = dg.norm();
    if (!(sp > 0)) throw std::runtime_error("frame_at: vanishing |gamma'|, invalid element");
    Frame f;
    f.point = e.geo.gamma(t);
    f.tangent = dg / sp;
    f.normal = rotate_minus90(f.tangent);
    Vec2 d2g = e.geo.d2gamma(t);
    f.curvature = cross2(dg, d2g) / (sp * sp * sp);
    f.speed = sp;
    return f;
}

struct CustomArc {
    ArcGeometry geo;
    bool corner_at_start = false;
};

struct DomainSpec {
    enum class Kind { circle, square, pacman, custom };
    Kind kind = Kind::circle;
    double scale = 0.1;
    std::vector<CustomArc> arcs;  // custom only, ccw order
};

class BoundaryMesh {
public:
    BoundaryMesh(std::vector<Element> elements, std::vector<Node> nodes, int level)
        : elements_(std::move(elements)), nodes_(std::move(nodes)), level_(level) {
        if (elements_.size() < 2)
            throw std::invalid_argument("BoundaryMesh: closed curves need at least 2 elements");
        if (elements_.size() != nodes_.size())
            throw std::invalid_argument("BoundaryMesh: node/element count mismatch on closed curve");
    }

    int num_elements() const { return static_cast<int>(elements_.size()); }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int level() const { return level_; }
    const Element& element(int e) const { return elements_[e]; }
    const Node& node(int z) const { return nodes_[z]; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    /// element ending at node z / starting at node z (cyclic ordering:
    /// element e runs node e -> node e+1)
    int element_before(int z) const { return (z + num_elements() - 1) % num_elements(); }
    int element_after(int z) const { return z; }

    double sigma(int z) const { return nodes_[z].sigma; }

    int num_corners() const {
        int c = 0;
        for (const auto& n : nodes_) c += n.is_corner ? 1 : 0;
        return c;
    }

private:
    std::vector<Element> elements_;
    std::vector<Node> nodes_;
    int level_ = 0;
};

namespace detail {

inline double interior_angle_sigma(const Element& before, const Element& after) {
    Vec2 tb = frame_at(before, 1.0).tangent;
    Vec2 ta = frame_at(after, 0.0).tangent;
    double turn = std::atan2(cross2(tb, ta), tb.dot(ta));
    return (kPi - turn) / (2 * kPi);
}

inline BoundaryMesh finalize_mesh(std::vector<ArcGeometry> arcs, const std::vector<bool>& corner,
                                  int level) {
    int n = static_cast<int>(arcs.size());
    std::vector<Element> els(n);
    for (int i = 0; i < n; ++i) {
        els[i].geo = arcs[i];
        els[i].start_node = i;
        els[i].end_node = (i + 1) % n;
        els[i].h = arcs[i].arc_length();
        if (!(els[i].h > 0)) throw std::invalid_argument("mesh element with zero length");
    }
    std::vector<Node> nodes(n);
    for (int i = 0; i < n; ++i) {
        nodes[i].position = arcs[i].gamma(0.0);
        nodes[i].is_corner = corner[i];
        nodes[i].sigma = corner[i] ? interior_angle_sigma(els[(i + n - 1) % n], els[i]) : 0.5;
    }
    return BoundaryMesh(std::move(els), std::move(nodes), level);
}

} // namespace detail

inline BoundaryMesh build_initial_mesh(const DomainSpec& spec) {
    if (!(spec.scale > 0)) throw std::invalid_argument("build_initial_mesh: scale must be positive");
    const double R = spec.scale;
    std::vector<ArcGeometry> arcs;
    std::vector<bool> corner;
    switch (spec.kind) {
    case DomainSpec::Kind::circle: {
        for (int k = 0; k < 4; ++k) {
            ArcGeometry a;
            a.kind = ArcGeometry::Kind::circular;
            a.center = Vec2(0, 0);
            a.radius = R;
            a.theta0 = k * kPi / 2;
            a.theta1 = (k + 1) * kPi / 2;
            arcs.push_back(a);
            corner.push_back(false);
        }
        break;
    }
    case DomainSpec::Kind::square: {
        Vec2 P[4] = {Vec2(R, R), Vec2(-R, R), Vec2(-R, -R), Vec2(R, -R)};
        for (int k = 0; k < 4; ++k) {
            ArcGeometry a;
            a.kind = ArcGeometry::Kind::segment;
            a.p0 = P[k];
            a.p1 = P[(k + 1) % 4];
            arcs.push_back(a);
            corner.push_back(true);
        }
        break;
    }
    case DomainSpec::Kind::pacman: {
        // sector with opening angle 2*pi*(315/360); notch corners at
        // theta = 157.5 and 202.5 degrees, reentrant corner at the origin
        double th1 = 7 * kPi / 8, th2 = 9 * kPi / 8;
        Vec2 c1 = R * Vec2(std::cos(th1), std::sin(th1));
        Vec2 c2 = R * Vec2(std::cos(th2), std::sin(th2));
        ArcGeometry a0;
        a0.kind = ArcGeometry::Kind::circular;
        a0.center = Vec2(0, 0);
        a0.radius = R;
        a0.theta0 = 0;
        a0.theta1 = th1;
        ArcGeometry a1;
        a1.kind = ArcGeometry::Kind::segment;
        a1.p0 = c1;
        a1.p1 = Vec2(0, 0);
        ArcGeometry a2;
        a2.kind = ArcGeometry::Kind::segment;
        a2.p0 = Vec2(0, 0);
        a2.p1 = c2;
        ArcGeometry a3;
        a3.kind = ArcGeometry::Kind::circular;
        a3.center = Vec2(0, 0);
        a3.radius = R;
        a3.theta0 = th2;
        a3.theta1 = 2 * kPi;
        arcs = {a0, a1, a2, a3};
        corner = {false, true, true, true};
        break;
    }
    case DomainSpec::Kind::custom: {
        if (spec.arcs.size() < 2)
            throw std::invalid_argument("custom domain: need at least 2 arcs on a closed curve");
        double area2 = 0;
        for (size_t i = 0; i < spec.arcs.size(); ++i) {
            const auto& a = spec.arcs[i];
            const auto& b = spec.arcs[(i + 1) % spec.arcs.size()];
            if ((a.geo.gamma(1.0) - b.geo.gamma(0.0)).norm() > 1e-12 * spec.scale)
                throw std::invalid_argument("custom domain: arcs do not form a closed chain");
            arcs.push_back(a.geo);
            corner.push_back(a.corner_at_start);
            for (int k = 0; k < 16; ++k) {
                Vec2 u = a.geo.gamma(k / 16.0), v = a.geo.gamma((k + 1) / 16.0);
                area2 += cross2(u, v);
            }
        }
        if (area2 <= 0)
            throw std::invalid_argument("custom domain: boundary must be positively oriented (ccw)");
        break;
    }
    default:
        throw std::invalid_argument("build_initial_mesh: unknown domain kind");
    }
    return detail::finalize_mesh(std::move(arcs), corner, 0);
}

/// Split every element at its parameter midpoint (= arc-length midpoint for
/// the constant-speed arcs used here).
inline BoundaryMesh refine_uniform(const BoundaryMesh& mesh) {
    std::vector<ArcGeometry> arcs;
    std::vector<bool> corner;
    arcs.reserve(2 * mesh.num_elements());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.element(e);
        arcs.push_back(el.geo.first_half());
        arcs.push_back(el.geo.second_half());
        corner.push_back(mesh.node(el.start_node).is_corner);
        corner.push_back(false);
    }
    return detail::finalize_mesh(std::move(arcs), corner, mesh.level() + 1);
}

/// Plain-text custom domain description, one arc per line in ccw order:
///   segment x0 y0 x1 y1 [corner]
///   arc cx cy radius theta0 theta1 [corner]
/// "corner" flags the junction at the arc's start point; '#' starts a comment.
inline DomainSpec load_domain_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_domain_spec: cannot open " + path);
    DomainSpec spec;
    spec.kind = DomainSpec::Kind::custom;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        CustomArc arc;
        if (tag == "segment") {
            arc.geo.kind = ArcGeometry::Kind::segment;
            if (!(ls >> arc.geo.p0.x() >> arc.geo.p0.y() >> arc.geo.p1.x() >> arc.geo.p1.y()))
                throw std::runtime_error("load_domain_spec: malformed segment line");
        } else if (tag == "arc") {
            arc.geo.kind = ArcGeometry::Kind::circular;
            if (!(ls >> arc.geo.center.x() >> arc.geo.center.y() >> arc.geo.radius >>
                  arc.geo.theta0 >> arc.geo.theta1))
                throw std::runtime_error("load_domain_spec: malformed arc line");
            if (!(arc.geo.radius > 0)) throw std::runtime_error("load_domain_spec: radius <= 0");
        } else {
            throw std::runtime_error("load_domain_spec: unknown arc type '" + tag + "'");
        }
        std::string flag;
        if (ls >> flag) {
            if (flag == "corner") arc.corner_at_start = true;
            else throw std::runtime_error("load_domain_spec: unexpected token '" + flag + "'");
        }
        spec.arcs.push_back(arc);
    }
    if (spec.arcs.empty()) throw std::runtime_error("load_domain_spec: no arcs in " + path);
    return spec;
}

} // namespace platebem

#endif
