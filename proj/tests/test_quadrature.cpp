#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "surfflow/quadrature.hpp"

using namespace surfflow;

namespace {
// Exact integral of xi^a eta^b over the reference triangle.
double monomial_integral(int a, int b) {
    auto fact = [](int n) {
        double f = 1;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    return fact(a) * fact(b) / fact(a + b + 2);
}

double apply(const QuadratureRule& r, int a, int b) {
    double s = 0;
    for (int q = 0; q < r.size(); ++q)
        s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b);
    return s;
}
}  // namespace

TEST_CASE("weights positive and sum to reference area") {
    for (int d = 1; d <= 12; ++d) {
        auto r = quadrature_rule(d);
        REQUIRE(r.size() > 0);
        double sum = 0;
        for (double w : r.weights) {
            CHECK(w > 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 0.5) < 1e-14);
        CHECK(r.exactness_degree >= d);
    }
}

TEST_CASE("monomial exactness up to advertised degree") {
    for (int d = 1; d <= 12; ++d) {
        auto r = quadrature_rule(d);
        for (int a = 0; a <= r.exactness_degree; ++a)
            for (int b = 0; a + b <= r.exactness_degree; ++b) {
                double got = apply(r, a, b);
                double want = monomial_integral(a, b);
                INFO("degree " << d << " monomial xi^" << a << " eta^" << b);
                CHECK(std::abs(got - want) < 1e-13);
            }
    }
}

TEST_CASE("centroid rule for degree 1") {
    auto r = quadrature_rule(1);
    REQUIRE(r.size() == 1);
    CHECK(r.points[0].isApprox(Vec2(1.0 / 3.0, 1.0 / 3.0), 1e-15));
    CHECK(r.weights[0] == 0.5);
}

TEST_CASE("degree 8 rule integrates xi^3 eta^3 to analytic value") {
    auto r = quadrature_rule(8);
    CHECK(std::abs(apply(r, 3, 3) - monomial_integral(3, 3)) < 1e-14);
}

TEST_CASE("points lie in the closed reference triangle") {
    for (int d = 1; d <= 12; ++d) {
        auto r = quadrature_rule(d);
        for (auto& p : r.points) {
            CHECK(p[0] >= -1e-15);
            CHECK(p[1] >= -1e-15);
            CHECK(p[0] + p[1] <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("unsupported degrees rejected") {
    CHECK_THROWS_AS(quadrature_rule(0), UnsupportedDegree);
    CHECK_THROWS_AS(quadrature_rule(13), UnsupportedDegree);
    CHECK_THROWS_AS(quadrature_rule(-2), UnsupportedDegree);
}
