#include <cmath>
#include <stdexcept>

#include "ctflow/profiles.hpp"
#include "ctflow/threshold.hpp"
#include "doctest.h"

using namespace ctflow;

namespace {

void check_derivative(const Profile& p) {
    const double h = 1e-6;
    for (int i = -40; i <= 40; ++i) {
        const double x = 0.25 * i;
        const double fd = (p.rho0(x + h) - p.rho0(x - h)) / (2 * h);
        CHECK(p.drho0(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
}

}  // namespace

TEST_CASE("sech2 bump") {
    const auto p = make_sech2(0.2, 4.0);
    CHECK(p.rho0(0.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(p.drho0(0.0) == doctest::Approx(0.0));
    CHECK(p.amplitude == 0.2);
    CHECK(p.rho0(p.support_radius) < 1e-13);
    CHECK(p.mass() == doctest::Approx(2.0 * 0.2 * 4.0).epsilon(1e-8));
    check_derivative(p);
}

TEST_CASE("steepened sech2 shifts slope into the rising flank") {
    const auto p = make_steepened_sech2(0.3, 2.0, 0.5);
    CHECK(p.rho0(0.0) == doctest::Approx(0.3).epsilon(1e-15));
    check_derivative(p);

    // steeper on the left than the mirrored point on the right
    double max_rise = 0.0, max_fall = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double x = 0.02 * i;
        max_rise = std::max(max_rise, p.drho0(-x));
        max_fall = std::max(max_fall, -p.drho0(x));
    }
    CHECK(max_rise > max_fall);

    CHECK_THROWS_AS(make_steepened_sech2(0.3, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("plateau profile") {
    const auto p = make_plateau(0.85, 10.0, 4.0);
    double top = 0.0;
    for (int i = -1000; i <= 1000; ++i) top = std::max(top, p.rho0(0.02 * i));
    CHECK(top == doctest::Approx(0.85).epsilon(1e-3));
    CHECK(top <= 0.85 + 1e-12);
    check_derivative(p);

    // descending front is much steeper than the rise
    double steepest_fall = 0.0, steepest_rise = 0.0;
    for (int i = -2000; i <= 2000; ++i) {
        const double d = p.drho0(0.01 * i);
        steepest_rise = std::max(steepest_rise, d);
        steepest_fall = std::max(steepest_fall, -d);
    }
    CHECK(steepest_fall > 5.0 * steepest_rise);

    CHECK_THROWS_AS(make_plateau(1.2, 10.0, 4.0), std::invalid_argument);
}

TEST_CASE("gentle plateau rise admits a subcriticality certificate") {
    // rising slope max h/(2 sr) = h/w stays below sigma along the flank
    const auto flux = make_family_j(2.0);
    const auto sigma = build_sigma(flux);
    const auto gamma = build_gamma(flux);
    const auto p = make_plateau(0.5, 12.0, 5.0);
    GridSpec grid{-40.0, 10.0, 2000};
    const auto s = sample(p, grid);
    for (size_t i = 0; i < s.x.size(); ++i) {
        if (s.drho[i] <= 0.0) continue;
        CHECK(s.drho[i] < sigma.value_at(s.rho[i]));
    }
    const auto cls = classify_profile(flux, sigma, gamma, s);
    CHECK(cls.region != Region::TypeISupercritical);
}

TEST_CASE("sampling hits cell centers") {
    const auto p = make_sech2(0.2, 4.0);
    GridSpec grid{-10.0, 10.0, 40};
    const auto s = sample(p, grid);
    REQUIRE(s.x.size() == 40);
    CHECK(s.x[0] == doctest::Approx(-9.75));
    CHECK(s.rho[20] == doctest::Approx(p.rho0(s.x[20])));
    CHECK(s.drho[5] == doctest::Approx(p.drho0(s.x[5])));
}

TEST_CASE("parse_profile_spec") {
    const auto p = parse_profile_spec("sech2:A=0.2,w=4");
    CHECK(p.kind == Profile::Kind::Sech2);
    CHECK(p.rho0(0.0) == doctest::Approx(0.2));
    CHECK(p.spec == "sech2:A=0.2,w=4");

    CHECK(parse_profile_spec("ssech2:A=0.3,w=2,skew=0.4").kind ==
          Profile::Kind::SteepenedSech2);
    CHECK(parse_profile_spec("plateau:h=0.85,w=10,s=4").kind ==
          Profile::Kind::Plateau);

    CHECK_THROWS_AS(parse_profile_spec("sech2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_profile_spec("sech2:A=0.2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_profile_spec("blob:A=0.2,w=4"), std::invalid_argument);
    CHECK_THROWS_AS(parse_profile_spec("sech2:A=2,w=4"), std::invalid_argument);
}
