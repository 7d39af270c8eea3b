#include <catch2/catch_amalgamated.hpp>
#include <platebem/geometry.hpp>
#include <platebem/quadrature.hpp>

#include "oracles.hpp"

using namespace platebem;

namespace {
double apply(const std::vector<double>& x, const std::vector<double>& w,
             const std::function<double(double)>& f) {
    double s = 0;
    for (size_t i = 0; i < x.size(); ++i) s += w[i] * f(x[i]);
    return s;
}
} // namespace

TEST_CASE("gauss_legendre basics") {
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
    Rule1D r1 = gauss_legendre(1);
    CHECK(r1.nodes[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(r1.weights[0] == Catch::Approx(1.0).margin(1e-15));
    Rule1D r2 = gauss_legendre(2);
    CHECK(apply(r2.nodes, r2.weights, [](double s) { return s * s * s; }) ==
          Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("gauss_legendre exact for P_{2n-1}, n <= 30") {
    for (int n = 1; n <= 30; ++n) {
        Rule1D r = gauss_legendre(n);
        double wsum = 0;
        for (double w : r.weights) {
            CHECK(w > 0);
            wsum += w;
        }
        CHECK(wsum == Catch::Approx(1.0).margin(1e-14));
        for (size_t i = 1; i < r.nodes.size(); ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double v = apply(r.nodes, r.weights, [k](double s) { return std::pow(s, k); });
            CHECK(std::abs(v - 1.0 / (k + 1)) < 1e-13);
        }
    }
}

TEST_CASE("log_rule: analytic examples") {
    LogRule1D r = log_rule(3);
    CHECK(apply(r.nodes, r.weights, [](double s) { return std::log(s); }) ==
          Catch::Approx(-1.0).margin(1e-13));
    CHECK(apply(r.nodes, r.weights, [](double s) { return s * std::log(s); }) ==
          Catch::Approx(-0.25).margin(1e-13));
    CHECK(apply(r.nodes, r.weights, [](double s) { return 1.0 + std::log(s); }) ==
          Catch::Approx(0.0).margin(1e-13));
    CHECK_THROWS_AS(log_rule(-1), std::invalid_argument);
}

TEST_CASE("log_rule exact for P_d + P_d log, d <= 20") {
    for (int d : {0, 1, 2, 4, 6, 8, 10, 14, 20}) {
        LogRule1D r = log_rule(d);
        CHECK(r.degree == d);
        for (int k = 0; k <= d; ++k) {
            double mono = apply(r.nodes, r.weights, [k](double s) { return std::pow(s, k); });
            CHECK(std::abs(mono - 1.0 / (k + 1)) < 1e-12);
            double logm =
                apply(r.nodes, r.weights, [k](double s) { return std::pow(s, k) * std::log(s); });
            CHECK(std::abs(logm + 1.0 / ((k + 1.0) * (k + 1.0))) < 1e-12);
        }
    }
    // the assembly-default degrees keep all weights positive
    for (int d : {6, 8, 10}) {
        LogRule1D r = log_rule(d);
        for (double w : r.weights) CHECK(w > 0);
    }
}

TEST_CASE("classify_pair") {
    DomainSpec spec;
    spec.kind = DomainSpec::Kind::square;
    BoundaryMesh m = build_initial_mesh(spec);
    CHECK(classify_pair(m, 1, 1).kind == PairClass::Kind::coincident);
    PairClass adj = classify_pair(m, 0, 1);
    CHECK(adj.kind == PairClass::Kind::adjacent_shared_node);
    REQUIRE(adj.shared.size() == 1);
    CHECK(adj.shared[0] == std::pair<int, int>(1, 0));
    CHECK(classify_pair(m, 0, 2).kind == PairClass::Kind::disjoint);  // opposite edges
}

TEST_CASE("pair_rule measures and positivity") {
    PairClass dis;
    PairClass coin;
    coin.kind = PairClass::Kind::coincident;
    PairClass adj;
    adj.kind = PairClass::Kind::adjacent_shared_node;
    adj.shared = {{1, 0}};
    for (auto kind : {KernelKind::smooth, KernelKind::log_singular})
        for (const PairClass* c : {&dis, &coin, &adj}) {
            PairRule2D r = pair_rule(*c, kind, 16, 8);
            double total = 0;
            for (size_t i = 0; i < r.size(); ++i) {
                total += r.w[i];
                CHECK(r.w[i] > 0);
                CHECK(r.s[i] > 0);
                CHECK(r.s[i] < 1);
                CHECK(r.t[i] > 0);
                CHECK(r.t[i] < 1);
            }
            CHECK(total == Catch::Approx(1.0).margin(1e-13));
        }
}

TEST_CASE("coincident Duffy rule integrates log singularities") {
    PairClass coin;
    coin.kind = PairClass::Kind::coincident;
    PairRule2D r = pair_rule(coin, KernelKind::log_singular, 16, 10);
    double v = 0;
    for (size_t i = 0; i < r.size(); ++i) v += r.w[i] * std::log(std::abs(r.s[i] - r.t[i]));
    CHECK(std::abs(v - (-1.5)) < 1e-10);

    // (s-t)^2 log|s-t| against an adaptive-refinement oracle
    auto f = [](double s, double t) {
        double d = std::abs(s - t);
        return d <= 0 ? 0.0 : d * d * std::log(d);
    };
    double ref = oracles::adaptive2d(f, 1e-13, [](double s) { return s; });
    double got = 0;
    for (size_t i = 0; i < r.size(); ++i) got += r.w[i] * f(r.s[i], r.t[i]);
    CHECK(std::abs(got - ref) < 1e-10);
}

TEST_CASE("tensor Gauss n=16 resolves smooth pair integrands") {
    PairClass dis;
    PairRule2D r = pair_rule(dis, KernelKind::smooth, 16, 8);
    double v = 0;
    for (size_t i = 0; i < r.size(); ++i) v += r.w[i] * std::exp(r.s[i] + r.t[i]);
    double e1 = std::exp(1.0) - 1.0;
    CHECK(std::abs(v - e1 * e1) < 1e-13);
}

TEST_CASE("disjoint smooth pair integrals saturate in n") {
    // separated elements of a refined square: kernel-like smooth integrand
    DomainSpec spec;
    spec.kind = DomainSpec::Kind::square;
    BoundaryMesh m = refine_uniform(build_initial_mesh(spec));
    const Element& E = m.element(0);
    const Element& F = m.element(4);  // separation >= element length
    auto pairint = [&](int n) {
        PairClass dis;
        PairRule2D r = pair_rule(dis, KernelKind::smooth, n, 8);
        double acc = 0;
        for (size_t i = 0; i < r.size(); ++i) {
            Vec2 x = E.geo.gamma(r.s[i]), y = F.geo.gamma(r.t[i]);
            acc += r.w[i] * std::log((x - y).squaredNorm()) * E.geo.dgamma(r.s[i]).norm() *
                   F.geo.dgamma(r.t[i]).norm();
        }
        return acc;
    };
    double v16 = pairint(16), v32 = pairint(32);
    CHECK(std::abs(v32 - v16) <= 1e-12 * std::abs(v32));
}

TEST_CASE("adjacent Duffy rule integrates corner log singularities") {
    PairClass adj;
    adj.kind = PairClass::Kind::adjacent_shared_node;
    adj.shared = {{1, 0}};
    PairRule2D r = pair_rule(adj, KernelKind::log_singular, 16, 10);
    // singular corner at (s,t) = (1,0): integrand log((1-s)+t)
    auto f = [](double s, double t) { return std::log((1 - s) + t); };
    double got = 0;
    for (size_t i = 0; i < r.size(); ++i) got += r.w[i] * f(r.s[i], r.t[i]);
    double ref = oracles::adaptive2d(f, 1e-13);
    CHECK(std::abs(got - ref) < 1e-11);
}

TEST_CASE("two-element meshes get the quadrant-split adjacent rule") {
    PairClass adj;
    adj.kind = PairClass::Kind::adjacent_shared_node;
    adj.shared = {{1, 0}, {0, 1}};
    PairRule2D r = pair_rule(adj, KernelKind::log_singular, 12, 8);
    double total = 0;
    for (size_t i = 0; i < r.size(); ++i) total += r.w[i];
    CHECK(total == Catch::Approx(1.0).margin(1e-13));
    // both corners singular: log((1-s)+t) + log(s+(1-t))
    auto f = [](double s, double t) { return std::log((1 - s) + t) + std::log(s + (1 - t)); };
    double got = 0;
    for (size_t i = 0; i < r.size(); ++i) got += r.w[i] * f(r.s[i], r.t[i]);
    double ref = oracles::adaptive2d(f, 1e-13);
    CHECK(std::abs(got - ref) < 1e-9);
}

TEST_CASE("integrate_element uses the arc-length measure") {
    DomainSpec spec;
    spec.kind = DomainSpec::Kind::circle;
    BoundaryMesh circle = build_initial_mesh(spec);
    Rule1D g = gauss_legendre(12);
    double len = integrate_element([](double) { return 1.0; }, circle.element(0), g);
    CHECK(len == Catch::Approx(kPi * 0.05).epsilon(1e-12));  // circle quarter-arc

    DomainSpec sq;
    sq.kind = DomainSpec::Kind::square;
    BoundaryMesh square = build_initial_mesh(sq);
    const Element& edge = square.element(0);
    double L = integrate_element([](double) { return 1.0; }, edge, g);
    CHECK(L == Catch::Approx(edge.h).epsilon(1e-14));

    // f = x1 on an edge vs the analytic line integral
    auto f = [&](double t) { return edge.geo.gamma(t).x(); };
    double v = integrate_element(f, edge, g);
    double ref = oracles::adaptive(
        [&](double t) { return edge.geo.gamma(t).x() * edge.geo.dgamma(t).norm(); }, 0, 1, 1e-14);
    CHECK(v == Catch::Approx(ref).margin(1e-14));
}
