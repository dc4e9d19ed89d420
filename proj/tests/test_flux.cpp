#include <cmath>
#include <stdexcept>

#include "ctflow/flux.hpp"
#include "doctest.h"

using namespace ctflow;

namespace {

// central finite differences used as the independent derivative oracle
double fd1(const FluxModel& m, double x, double h = 1e-5) {
    return (m.eval(x + h) - m.eval(x - h)) / (2 * h);
}

double fd2(const FluxModel& m, double x, double h = 1e-5) {
    return (m.eval(x + h) - 2 * m.eval(x) + m.eval(x - h)) / (h * h);
}

}  // namespace

TEST_CASE("family J basics") {
    const auto f1 = make_family_j(1.0);
    CHECK(f1.eval(0.3) == doctest::Approx(0.3 * 0.7).epsilon(1e-14));
    CHECK(f1.rho_c == 1.0);

    const auto f2 = make_family_j(2.0);
    CHECK(f2.rho_c == doctest::Approx(2.0 / 3.0));
    CHECK(f2.eval(0.0) == 0.0);
    CHECK(f2.deriv1(0.0) == doctest::Approx(1.0));
    CHECK(f2.beta == doctest::Approx(0.5));

    CHECK_THROWS_AS(make_family_j(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_family_j(-1.0), std::invalid_argument);
}

TEST_CASE("analytic derivatives agree with finite differences") {
    for (double J : {0.5, 1.0, 2.0, 3.0, 5.0}) {
        const auto m = make_family_j(J);
        for (int i = 0; i <= 94; ++i) {
            const double rho = 0.01 + i * 0.01;
            CHECK(m.deriv1(rho) ==
                  doctest::Approx(fd1(m, rho)).epsilon(1e-6));
            CHECK(m.deriv2(rho) ==
                  doctest::Approx(fd2(m, rho)).epsilon(1e-4));
        }
    }
}

TEST_CASE("find_inflection") {
    CHECK(find_inflection(make_lwr()) == 1.0);
    CHECK(find_inflection(make_family_j(3.0)) == doctest::Approx(0.5).epsilon(1e-10));
    for (double J : {1.5, 2.0, 3.0, 5.0}) {
        CHECK(find_inflection(make_family_j(J)) ==
              doctest::Approx(2.0 / (J + 1.0)).epsilon(1e-10));
    }
}

TEST_CASE("f(rho) <= f'(0) rho on a fine grid") {
    for (double J : {0.5, 1.0, 2.0, 4.0}) {
        const auto m = make_family_j(J);
        const double fp0 = m.deriv1(0.0);
        for (int i = 0; i <= 1000; ++i) {
            const double rho = i / 1000.0;
            CHECK(m.eval(rho) <= fp0 * rho + 1e-14);
        }
    }
}

TEST_CASE("validate_hypotheses") {
    CHECK(validate_hypotheses(make_lwr(), 1000).all_passed());

    const auto rep = validate_hypotheses(make_family_j(2.0), 1000);
    CHECK(rep.all_passed());

    // f(rho) = rho^2 (1-rho) has f'(0) = 0
    const auto bad = make_custom([](double r) { return r * r * (1.0 - r); });
    const auto bad_rep = validate_hypotheses(bad, 1000);
    CHECK_FALSE(bad_rep.all_passed());
    bool fp0_failed = false;
    for (const auto& c : bad_rep.checks) {
        if (c.name == "f'(0) > 0" && !c.passed) fp0_failed = true;
    }
    CHECK(fp0_failed);

    CHECK_THROWS_AS(validate_hypotheses(make_lwr(), 8), std::invalid_argument);
}

TEST_CASE("custom flux fills derivatives by finite differences") {
    const auto m = make_custom([](double r) { return r * (1.0 - r) * (1.0 - r); });
    const auto ref = make_family_j(2.0);
    for (double rho : {0.1, 0.3, 0.5, 0.8}) {
        CHECK(m.deriv1(rho) == doctest::Approx(ref.deriv1(rho)).epsilon(1e-7));
        CHECK(m.deriv2(rho) == doctest::Approx(ref.deriv2(rho)).epsilon(1e-5));
    }
    CHECK(m.rho_c == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(m.beta == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("parse_flux_spec") {
    CHECK(parse_flux_spec("lwr").kind == FluxModel::Kind::Lwr);
    const auto fj = parse_flux_spec("fj:2.5");
    CHECK(fj.J == doctest::Approx(2.5));
    CHECK_THROWS(parse_flux_spec("nope"));
}
