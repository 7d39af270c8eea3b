#include <catch2/catch_amalgamated.hpp>
#include <platebem/geometry.hpp>

#include <fstream>

using namespace platebem;

namespace {

BoundaryMesh make(DomainSpec::Kind k, int refinements = 0) {
    DomainSpec spec;
    spec.kind = k;
    BoundaryMesh m = build_initial_mesh(spec);
    for (int i = 0; i < refinements; ++i) m = refine_uniform(m);
    return m;
}

double perimeter(const BoundaryMesh& m) {
    double s = 0;
    for (const auto& e : m.elements()) s += e.h;
    return s;
}

bool analytic_inside(DomainSpec::Kind k, const Vec2& x, double R = 0.1) {
    switch (k) {
    case DomainSpec::Kind::circle: return x.norm() < R;
    case DomainSpec::Kind::square: return std::max(std::abs(x.x()), std::abs(x.y())) < R;
    case DomainSpec::Kind::pacman: {
        double th = std::atan2(x.y(), x.x());
        return x.norm() < R && th > -7 * kPi / 8 && th < 7 * kPi / 8;
    }
    default: return false;
    }
}

} // namespace

TEST_CASE("initial meshes match the published setups") {
    BoundaryMesh circle = make(DomainSpec::Kind::circle);
    CHECK(circle.num_elements() == 4);
    CHECK(circle.num_nodes() == 4);
    CHECK(circle.num_corners() == 0);

    BoundaryMesh square = make(DomainSpec::Kind::square);
    CHECK(square.num_elements() == 4);
    CHECK(square.num_nodes() == 4);
    CHECK(square.num_corners() == 4);

    BoundaryMesh pacman = make(DomainSpec::Kind::pacman);
    CHECK(pacman.num_elements() == 4);
    CHECK(pacman.num_nodes() == 4);
    CHECK(pacman.num_corners() == 3);
    // node markers of the figure: (0.1, 0) is a mesh node but not a corner
    bool found = false;
    for (const auto& n : pacman.nodes())
        if ((n.position - Vec2(0.1, 0)).norm() < 1e-14) {
            found = true;
            CHECK_FALSE(n.is_corner);
        }
    CHECK(found);
}

TEST_CASE("invalid specs are rejected") {
    DomainSpec spec;
    spec.scale = -1.0;
    CHECK_THROWS_AS(build_initial_mesh(spec), std::invalid_argument);
    DomainSpec custom;
    custom.kind = DomainSpec::Kind::custom;
    CHECK_THROWS_AS(build_initial_mesh(custom), std::invalid_argument);  // empty arc list
}

TEST_CASE("perimeters match analytic values to 1e-12 relative") {
    struct Row {
        DomainSpec::Kind kind;
        double exact;
    } rows[] = {{DomainSpec::Kind::circle, 2 * kPi * 0.1},
                {DomainSpec::Kind::square, 0.8},
                {DomainSpec::Kind::pacman, 2 * kPi * 0.1 * (315.0 / 360.0) + 0.2}};
    for (const auto& r : rows)
        for (int lvl = 0; lvl < 4; ++lvl) {
            BoundaryMesh m = make(r.kind, lvl);
            CHECK(std::abs(perimeter(m) - r.exact) <= 1e-12 * r.exact);
        }
}

TEST_CASE("uniform refinement bisects arc lengths") {
    for (auto kind :
         {DomainSpec::Kind::circle, DomainSpec::Kind::square, DomainSpec::Kind::pacman}) {
        BoundaryMesh m = make(kind);
        for (int k = 1; k <= 3; ++k) {
            int prev_nodes = m.num_nodes();
            double prev_hmax = 0;
            for (const auto& e : m.elements()) prev_hmax = std::max(prev_hmax, e.h);
            m = refine_uniform(m);
            CHECK(m.num_elements() == 4 * (1 << k));
            CHECK(m.num_nodes() == 2 * prev_nodes);
            CHECK(m.level() == k);
            double hmax = 0;
            for (const auto& e : m.elements()) hmax = std::max(hmax, e.h);
            CHECK(hmax == Catch::Approx(0.5 * prev_hmax).epsilon(1e-14));
            CHECK(m.num_corners() == make(kind).num_corners());
        }
        // element lengths equal within each smooth piece
        BoundaryMesh c = make(kind, 3);
        for (int e = 0; e + 1 < c.num_elements(); ++e) {
            int shared = c.element(e).end_node;
            if (!c.node(shared).is_corner)
                CHECK(std::abs(c.element(e).h - c.element(e + 1).h) <= 1e-12 * c.element(e).h);
        }
    }
}

TEST_CASE("circle mesh elements keep h_E = 2 pi 0.1 / #E") {
    BoundaryMesh m = make(DomainSpec::Kind::circle, 1);
    for (const auto& e : m.elements()) CHECK(e.h == Catch::Approx(2 * kPi * 0.1 / 8).epsilon(1e-13));
}

TEST_CASE("frames: tangent, outward normal, curvature") {
    BoundaryMesh circle = make(DomainSpec::Kind::circle);
    Frame f = frame_at(circle.element(0), 0.0);  // point (0.1, 0)
    CHECK((f.point - Vec2(0.1, 0)).norm() < 1e-15);
    CHECK((f.normal - Vec2(1, 0)).norm() < 1e-14);
    CHECK((f.tangent - Vec2(0, 1)).norm() < 1e-14);
    CHECK(std::abs(std::abs(f.curvature) - 10.0) < 1e-10);

    BoundaryMesh square = make(DomainSpec::Kind::square);
    Frame g = frame_at(square.element(0), 0.4);
    CHECK(g.curvature == 0.0);
    CHECK(std::abs(g.tangent.dot(g.normal)) < 1e-15);

    // Frenet sign convention: dn/ds = kappa t, checked by finite differences
    const Element& el = circle.element(1);
    double t0 = 0.37, h = 1e-6;
    Frame fm = frame_at(el, t0 - h), fp = frame_at(el, t0 + h), fc = frame_at(el, t0);
    double ds = 2 * h * fc.speed;
    Vec2 dn_ds = (fp.normal - fm.normal) / ds;
    CHECK((dn_ds - fc.curvature * fc.tangent).norm() < 1e-5 * std::abs(fc.curvature));
}

TEST_CASE("sigma: interior angle over 2 pi") {
    CHECK(make(DomainSpec::Kind::circle).sigma(1) == 0.5);
    BoundaryMesh square = make(DomainSpec::Kind::square);
    for (int z = 0; z < 4; ++z) CHECK(square.sigma(z) == Catch::Approx(0.25).epsilon(1e-13));
    BoundaryMesh pacman = make(DomainSpec::Kind::pacman);
    for (int z = 0; z < 4; ++z) {
        if (pacman.node(z).position.norm() < 1e-14)
            CHECK(pacman.sigma(z) == Catch::Approx(7.0 / 8.0).epsilon(1e-13));
        else if (pacman.node(z).is_corner)
            CHECK(pacman.sigma(z) == Catch::Approx(0.25).epsilon(1e-13));
        else
            CHECK(pacman.sigma(z) == 0.5);
    }
}

TEST_CASE("tangent continuity at smooth shared nodes") {
    for (auto kind :
         {DomainSpec::Kind::circle, DomainSpec::Kind::square, DomainSpec::Kind::pacman}) {
        BoundaryMesh m = make(kind, 2);
        for (int z = 0; z < m.num_nodes(); ++z) {
            if (m.node(z).is_corner) continue;
            Frame fb = frame_at(m.element(m.element_before(z)), 1.0);
            Frame fa = frame_at(m.element(m.element_after(z)), 0.0);
            CHECK((fb.tangent - fa.tangent).norm() < 1e-10);
        }
    }
}

TEST_CASE("normals point outward: x + eps n leaves the domain") {
    for (auto kind :
         {DomainSpec::Kind::circle, DomainSpec::Kind::square, DomainSpec::Kind::pacman}) {
        BoundaryMesh m = make(kind, 1);
        double eps = 1e-5;
        for (const auto& e : m.elements())
            for (double t : {0.2, 0.5, 0.8}) {
                Frame f = frame_at(e, t);
                CHECK_FALSE(analytic_inside(kind, f.point + eps * f.normal));
                CHECK(analytic_inside(kind, f.point - eps * f.normal));
            }
    }
}

TEST_CASE("custom domain round trip and validation") {
    const std::string path = "custom_domain_test.txt";
    {
        std::ofstream out(path);
        out << "# half-disc of radius 0.1, ccw\n";
        out << "arc 0 0 0.1 0 3.14159265358979323846 corner\n";
        out << "segment -0.1 0 0.1 0 corner\n";
    }
    DomainSpec spec = load_domain_spec(path);
    REQUIRE(spec.arcs.size() == 2);
    BoundaryMesh m = build_initial_mesh(spec);
    CHECK(m.num_elements() == 2);
    CHECK(m.num_corners() == 2);
    CHECK(perimeter(m) == Catch::Approx(kPi * 0.1 + 0.2).epsilon(1e-13));
    // half-disc corner angles are pi/2
    for (int z = 0; z < m.num_nodes(); ++z) CHECK(m.sigma(z) == Catch::Approx(0.25).epsilon(1e-12));
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "segment 0 0 1 0\n";
        out << "segment 1 0 0 1\n";  // chain does not close
    }
    CHECK_THROWS(build_initial_mesh(load_domain_spec(path)));
    std::remove(path.c_str());

    // one-element closed curves are rejected
    DomainSpec one;
    one.kind = DomainSpec::Kind::custom;
    CustomArc full;
    full.geo.kind = ArcGeometry::Kind::circular;
    full.geo.center = Vec2(0, 0);
    full.geo.radius = 0.1;
    full.geo.theta0 = 0;
    full.geo.theta1 = 2 * kPi;
    one.arcs = {full};
    CHECK_THROWS_AS(build_initial_mesh(one), std::invalid_argument);

    // clockwise orientation is rejected
    DomainSpec cw;
    cw.kind = DomainSpec::Kind::custom;
    CustomArc a1, a2;
    a1.geo.kind = ArcGeometry::Kind::circular;
    a1.geo.center = Vec2(0, 0);
    a1.geo.radius = 0.1;
    a1.geo.theta0 = kPi;
    a1.geo.theta1 = 0;
    a2 = a1;
    a2.geo.theta0 = 2 * kPi;
    a2.geo.theta1 = kPi;
    cw.arcs = {a1, a2};
    CHECK_THROWS_AS(build_initial_mesh(cw), std::invalid_argument);
}
