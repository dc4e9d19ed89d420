#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctflow/pde.hpp"
#include "ctflow/phase.hpp"
#include "ctflow/threshold.hpp"
#include "doctest.h"

using namespace ctflow;

namespace {

GridSolution from_profile(const Profile& p, double a, double b, int n) {
    GridSolution sol;
    sol.grid = {a, b, n};
    sol.rho.resize(n);
    for (int i = 0; i < n; ++i) {
        sol.rho[i] = std::max(0.0, p.rho0(sol.grid.center(i)));
    }
    return sol;
}

double mass_of(const GridSolution& sol) {
    double m = 0.0;
    for (double r : sol.rho) m += r;
    return m * sol.grid.dx();
}

}  // namespace

TEST_CASE("zero state is stationary") {
    const auto flux = make_family_j(2.0);
    const auto kernel = KernelSpec::infinite();
    GridSolution sol;
    sol.grid = {-10.0, 10.0, 100};
    sol.rho.assign(100, 0.0);
    const double dt = step(flux, kernel, sol, 0.4);
    CHECK(dt > 0.0);
    for (double r : sol.rho) CHECK(r == 0.0);
}

TEST_CASE("step rejects cfl outside (0,1)") {
    const auto flux = make_family_j(2.0);
    const auto kernel = KernelSpec::infinite();
    auto sol = from_profile(make_sech2(0.2, 2.0), -10.0, 10.0, 100);
    CHECK_THROWS_AS(step(flux, kernel, sol, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(step(flux, kernel, sol, 1.0), std::invalid_argument);
}

TEST_CASE("mass conserved per step to round-off") {
    const auto flux = make_family_j(2.0);
    // tails must sit below round-off inside the domain or the zero-ghost
    // boundaries show up as a genuine (physical) leak
    const auto bump = make_sech2(0.3, 1.0);
    for (const auto& kernel :
         {KernelSpec::infinite(), KernelSpec::indicator(2.0),
          KernelSpec::linear_decay(1.5)}) {
        // 120 steps at cfl 0.9 reach t ~ 11; unit-speed material stays inside
        auto sol = from_profile(bump, -20.0, 32.0, 520);
        const double m0 = mass_of(sol);
        for (int k = 0; k < 120; ++k) {
            step(flux, kernel, sol, 0.9);
            CHECK(std::abs(mass_of(sol) - m0) < 1e-12);
        }
    }
}

TEST_CASE("discrete maximum principle under the CFL bound") {
    const auto flux = make_family_j(2.0);
    const auto kernel = KernelSpec::infinite();
    const double A = 0.45;
    auto sol = from_profile(make_sech2(A, 1.0), -10.0, 15.0, 500);
    while (sol.t < 2.0) {
        step(flux, kernel, sol, 0.9, 2.0 - sol.t);
        for (double r : sol.rho) {
            CHECK(r >= -1e-12);
            CHECK(r <= A + 1e-12);
        }
    }
}

TEST_CASE("small-amplitude bump refines at first order in L1") {
    const auto flux = make_family_j(2.0);
    const auto kernel = KernelSpec::infinite();
    const auto bump = make_sech2(0.1, 2.0);
    auto advance = [&](int n) {
        auto sol = from_profile(bump, -10.0, 10.0, n);
        while (sol.t < 0.5 - 1e-13) step(flux, kernel, sol, 0.4, 0.5 - sol.t);
        return sol;
    };
    const auto s200 = advance(200), s400 = advance(400), s800 = advance(800);
    auto l1 = [](const GridSolution& c, const GridSolution& f) {
        double acc = 0.0;
        for (int i = 0; i < c.grid.n_cells; ++i) {
            acc += std::abs(c.rho[i] - 0.5 * (f.rho[2 * i] + f.rho[2 * i + 1]));
        }
        return acc * c.grid.dx();
    };
    const double d24 = l1(s200, s400), d48 = l1(s400, s800);
    // measured: 8.5e-4 and 4.3e-4, O(dx) with halving ratio ~0.50
    CHECK(d24 < 0.05 * s200.grid.dx());
    CHECK(d48 / d24 > 0.35);
    CHECK(d48 / d24 < 0.70);
}

TEST_CASE("diagnostics on a unit-mass bump") {
    // mass of A sech^2(x/w) is 2 A w = 1
    const auto bump = make_sech2(0.25, 2.0);
    const auto sol = from_profile(bump, -20.0, 20.0, 2000);

    const auto kernel = KernelSpec::infinite();
    const auto rec = diagnostics(sol, kernel);
    CHECK(rec.mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rec.rho_max == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(rec.rho_min >= 0.0);
    CHECK(rec.rho_min < 1e-8);  // sech^2 tail at the domain edge
    // at the far left everything lies ahead: rho_bar tends to the full mass
    CHECK(rec.rhobar_max == doctest::Approx(rec.mass).epsilon(1e-6));
    // steepest slope of A sech^2 is at tanh = 1/sqrt(3)
    const double gmax = 2.0 * 0.25 / 2.0 * (2.0 / (3.0 * std::sqrt(3.0)));
    CHECK(rec.grad_max == doctest::Approx(gmax).epsilon(1e-3));
    CHECK(rec.grad_min == doctest::Approx(-gmax).epsilon(1e-3));

    const auto chk = check_bounds(sol, kernel);
    CHECK(chk.all());
    CHECK(chk.worst == 0.0);

    // a finite window sees at most the full mass
    const auto ind = KernelSpec::indicator(1.5);
    const auto rec2 = diagnostics(sol, ind);
    CHECK(rec2.rhobar_max < rec.rhobar_max);
    CHECK(rec2.rhobar_max <= ind.k_max * rec.mass);
    CHECK(check_bounds(sol, ind).all());
}

TEST_CASE("a priori bounds hold along a run") {
    const auto flux = make_family_j(2.0);
    for (const auto& kernel :
         {KernelSpec::infinite(), KernelSpec::linear_decay(2.0)}) {
        auto sol = from_profile(make_sech2(0.35, 2.0), -15.0, 20.0, 600);
        for (int k = 0; k < 40; ++k) {
            for (int j = 0; j < 10; ++j) step(flux, kernel, sol, 0.9);
            CHECK(check_bounds(sol, kernel).all());
        }
    }
}

TEST_CASE("simulate rejects amplitude >= 1 and reports domain exit") {
    const auto flux = make_family_j(2.0);
    const auto kernel = KernelSpec::infinite();
    SimulateOptions opt;

    Profile full;
    full.amplitude = 1.0;
    full.rho0 = [](double) { return 1.0; };
    full.drho0 = [](double) { return 0.0; };
    CHECK_THROWS_AS(simulate(flux, kernel, full, opt), std::invalid_argument);

    // support wider than the domain: boundary mass above threshold
    opt.t_end = 1.0;
    opt.domain_a = -6.0;
    opt.domain_b = 6.0;
    CHECK_THROWS_WITH_AS(simulate(flux, kernel, make_sech2(0.2, 5.0), opt),
                         "simulate: domain exit", std::runtime_error);
}

TEST_CASE("simulate is deterministic") {
    const auto flux = make_family_j(2.0);
    const auto kernel = KernelSpec::infinite();
    SimulateOptions opt;
    opt.t_end = 1.5;
    opt.n_cells = 300;
    opt.domain_a = -12.0;
    opt.domain_b = 12.0;
    auto [s1, r1] = simulate(flux, kernel, make_sech2(0.3, 1.0), opt);
    auto [s2, r2] = simulate(flux, kernel, make_sech2(0.3, 1.0), opt);
    REQUIRE(s1.rho.size() == s2.rho.size());
    for (size_t i = 0; i < s1.rho.size(); ++i) CHECK(s1.rho[i] == s2.rho[i]);
    CHECK(r1.detected == r2.detected);
    CHECK(r1.refinement_evidence == r2.refinement_evidence);
}

// the three canonical runs: trichotomy consistency between classify_profile
// and the shock detector, plus the conservation/maximum-principle budget

namespace {

struct RunSummary {
    Classification cls;
    ShockReport report;
    GridSolution sol;
    double drift = 0.0;
    double rho_min = 0.0, rho_max = 0.0;
};

RunSummary canonical_run(const Profile& p, const KernelSpec& kernel,
                         const SimulateOptions& opt) {
    const auto flux = make_family_j(2.0);
    const auto sigma = build_sigma(flux);
    const auto gamma = build_gamma(flux);
    RunSummary rs;
    GridSpec grid{opt.domain_a, opt.domain_b, opt.n_cells};
    rs.cls = classify_profile(flux, sigma, gamma, sample(p, grid));
    auto [sol, rep] = simulate(flux, kernel, p, opt);
    rs.report = rep;
    const double m0 = sol.history.front().mass;
    for (const auto& h : sol.history) {
        rs.drift = std::max(rs.drift, std::abs(h.mass - m0));
        rs.rho_min = std::min(rs.rho_min, h.rho_min);
        rs.rho_max = std::max(rs.rho_max, h.rho_max);
    }
    rs.sol = std::move(sol);
    return rs;
}

}  // namespace

TEST_CASE("canonical subcritical run stays smooth under refinement") {
    const auto sub = make_sech2(0.2, 5.0);
    SimulateOptions opt;
    opt.t_end = 10.0;
    opt.domain_a = -85.0;
    opt.domain_b = 85.0;
    opt.n_cells = 400;
    const auto rs = canonical_run(sub, KernelSpec::infinite(), opt);
    CHECK(rs.cls.region == Region::Subcritical);
    CHECK_FALSE(rs.report.detected);
    CHECK(rs.drift <= 1e-10);
    CHECK(rs.rho_min >= -1e-12);
    CHECK(rs.rho_max <= 0.2 + 1e-12);

    // max rho decays in time, and the max gradient is grid-converged
    opt.n_cells = 800;
    const auto rs8 = canonical_run(sub, KernelSpec::infinite(), opt);
    CHECK_FALSE(rs8.report.detected);
    double prev = 1e9;
    for (const auto& h : rs.sol.history) {
        CHECK(h.rho_max <= prev + 1e-12);
        prev = h.rho_max;
    }
    REQUIRE(rs.sol.history.size() == rs8.sol.history.size());
    for (size_t i = 0; i < rs.sol.history.size(); ++i) {
        const auto& c = rs.sol.history[i];
        const auto& f = rs8.sol.history[i];
        const double gc = std::max(std::abs(c.grad_max), std::abs(c.grad_min));
        const double gf = std::max(std::abs(f.grad_max), std::abs(f.grad_min));
        CHECK(std::abs(gf - gc) / gc < 0.10);  // measured worst: 2.5%
    }
}

TEST_CASE("canonical type I run shocks on the rising flank") {
    const auto flux = make_family_j(2.0);
    const auto kernel = KernelSpec::infinite();
    const auto p = make_steepened_sech2(0.45, 1.2, 0.2);
    SimulateOptions opt;
    opt.t_end = 8.0;
    opt.n_cells = 10000;
    opt.domain_a = -15.0;
    opt.domain_b = 35.0;
    opt.cfl = 0.9;

    // capture the slowdown-factor field for the characteristic replay
    std::vector<double> times;
    std::vector<std::vector<double>> efields;
    GridSpec grid{opt.domain_a, opt.domain_b, opt.n_cells};
    opt.on_snapshot = [&](const GridSolution& s) {
        times.push_back(s.t);
        const auto rb = nonlocal_density(kernel, s.grid, s.rho);
        std::vector<double> e(rb.size());
        for (size_t i = 0; i < rb.size(); ++i) e[i] = std::exp(-rb[i]);
        efields.push_back(std::move(e));
    };

    const auto rs = canonical_run(p, kernel, opt);
    CHECK(rs.cls.region == Region::TypeISupercritical);
    REQUIRE(rs.report.detected);
    CHECK(rs.report.gradient_sign == 1);
    CHECK(rs.report.refinement_evidence >= 1.8);
    REQUIRE(rs.report.t_shock.has_value());
    CHECK(*rs.report.t_shock > 3.0);   // measured: 4.0
    CHECK(*rs.report.t_shock < 5.0);
    CHECK(rs.drift <= 1e-10);
    CHECK(rs.rho_min >= -1e-12);
    CHECK(rs.rho_max <= 0.45 + 1e-12);

    // characteristic cross-validation: the coupled phase integration seeded
    // at the classifier's witness blows up within 20% of t_shock
    const double x0 = rs.cls.witness_x.value();
    auto field = [&](double t, double x) -> double {
        size_t k = 0;
        while (k + 1 < times.size() && times[k + 1] <= t) ++k;
        auto at = [&](size_t j, double xx) -> double {
            double u = (xx - grid.center(0)) / grid.dx();
            if (u <= 0.0) return efields[j].front();
            if (u >= grid.n_cells - 1.0) return efields[j].back();
            const auto i = static_cast<size_t>(u);
            return (1.0 - (u - i)) * efields[j][i] + (u - i) * efields[j][i + 1];
        };
        if (k + 1 >= times.size()) return at(times.size() - 1, x);
        const double w = (t - times[k]) / (times[k + 1] - times[k]);
        return (1.0 - w) * at(k, x) + w * at(k + 1, x);
    };
    PhaseIntegrateOptions popt;
    popt.t_max = 12.0;
    const auto traj = integrate_phase(
        flux, NonlocalFactorModel::coupled(p.mass(), x0, field), p.rho0(x0),
        p.drho0(x0), popt);
    REQUIRE(traj.terminal == Terminal::BlowUpPlus);
    // measured: t_star = 3.80 against t_shock = 4.00
    CHECK(std::abs(*traj.t_star - *rs.report.t_shock) <=
          0.2 * *rs.report.t_shock);
}

TEST_CASE("canonical type II run shocks on the falling front") {
    const auto p = make_plateau(0.85, 11.0, 0.4);
    SimulateOptions opt;
    opt.t_end = 9.0;
    opt.n_cells = 74000;
    opt.domain_a = -69.0;
    opt.domain_b = 16.0;
    opt.cfl = 0.9;
    const auto rs = canonical_run(p, KernelSpec::indicator(1.0), opt);
    CHECK(rs.cls.region == Region::TypeIISupercritical);
    CHECK(rs.cls.witness_x.value_or(-1.0) > 4.0);  // on the descending front
    REQUIRE(rs.report.detected);
    CHECK(rs.report.gradient_sign == -1);
    CHECK(rs.report.refinement_evidence >= 1.8);
    REQUIRE(rs.report.t_shock.has_value());
    CHECK(*rs.report.t_shock > 5.0);   // measured: 6.5
    CHECK(*rs.report.t_shock < 8.0);
    CHECK(rs.report.x_shock.value_or(-99.0) > 3.0);
    CHECK(rs.report.x_shock.value_or(99.0) < 6.0);
    CHECK(rs.drift <= 1e-10);
    CHECK(rs.rho_min >= -1e-12);
    CHECK(rs.rho_max <= 0.85 + 1e-12);
}
