#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ctflow {

// Scalar flux f on [0,1] with f(0)=f(1)=0, f'(0)>0, and a single
// concave-to-convex switch at rho_c (rho_c = 1 means concave throughout).
struct FluxModel {
    enum class Kind { Lwr, FamilyJ, Custom };

    Kind kind = Kind::Custom;
    double J = 0.0;  // only meaningful for FamilyJ

    std::function<double(double)> eval;
    std::function<double(double)> deriv1;
    std::function<double(double)> deriv2;
    std::function<double(double)> deriv3;

    double rho_c = 1.0;   // inflection point, in (0,1]
    double beta = 0.0;    // -2 f'(0) / f''(0)

    double operator()(double rho) const { return eval(rho); }
};

// f_J(rho) = rho (1-rho)^J with analytic derivatives. Rejects J <= 0.
FluxModel make_family_j(double J);

// LWR flux rho(1-rho); identical to make_family_j(1) up to the kind tag.
FluxModel make_lwr();

// Custom flux from an evaluation callback. Missing derivatives are filled
// by 4th-order central differences with step 1e-5.
FluxModel make_custom(std::function<double(double)> eval,
                      std::function<double(double)> d1 = nullptr,
                      std::function<double(double)> d2 = nullptr,
                      std::function<double(double)> d3 = nullptr);

// Custom flux from sampled (rho, f) pairs via monotone cubic interpolation.
FluxModel make_tabulated(const std::vector<double>& rho,
                         const std::vector<double>& f);

// Locates the sign change of f'' by bisection to 1e-12, or returns 1 if
// f'' < 0 on all of [0, 1). Throws on more than one sign change.
double find_inflection(const FluxModel& flux);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    double worst = 0.0;  // worst violation magnitude (0 when passed)
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const;
};

// Checks the flux hypotheses on a uniform grid of n_samples points.
ValidationReport validate_hypotheses(const FluxModel& flux, int n_samples);

// Parses "lwr", "fj:<J>", or "table:<path>".
FluxModel parse_flux_spec(const std::string& spec);

}  // namespace ctflow
