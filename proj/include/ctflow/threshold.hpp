#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctflow/flux.hpp"
#include "ctflow/numerics.hpp"

namespace ctflow {

// Sampled critical-threshold curve in the (rho, d_x rho) phase plane.
// sigma is defined from rho = 0; gamma from just above rho_c with a
// vertical asymptote to -infinity at rho_c.
struct ThresholdCurve {
    enum class Which { Sigma, Gamma };

    Which which = Which::Sigma;
    std::vector<double> grid;    // strictly increasing abscissas
    std::vector<double> values;  // curve values at grid points
    std::optional<double> blowup_at;  // rho_* (sigma) or rho^* (gamma)
    double rho_c = 1.0;

    // Curve value with the conventions of the classifier: +infinity at and
    // beyond blowup_at, -infinity below the gamma seed point.
    double value_at(double rho) const;

    void finalize();  // builds the interpolant; call after filling grid/values

private:
    MonotoneCubic interp_;
};

enum class Region { Subcritical, TypeISupercritical, TypeIISupercritical };

std::string to_string(Region r);

struct Classification {
    Region region = Region::Subcritical;
    std::optional<double> witness_x;  // location violating subcriticality
    double margin = 0.0;  // d0 - sigma(rho0) or gamma(rho0) - d0, worst point
    std::string note;
};

struct CurveBuildOptions {
    double eps = 1e-4;    // sigma seed extent
    double delta = 1e-4;  // gamma seed step past rho_c
    double cap = 1e6;     // blow-up declaration level
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 1e-3;
};

// Integrates the phase-plane trajectory ODE from the origin with slope
// beta, the unique trajectory entering (0,0) non-degenerately.
ThresholdCurve build_sigma(const FluxModel& flux,
                           const CurveBuildOptions& opt = {});

// Integrates eta = 1/gamma from eta(rho_c) = 0 with a Taylor seed, then
// switches to the trajectory ODE once gamma is moderate.
ThresholdCurve build_gamma(const FluxModel& flux,
                           const CurveBuildOptions& opt = {});

// Closed forms for the f_J family.
double sigma_closed_fj(double J, double rho);
double gamma_closed_fj(double J, double rho);

// Theorem-4.1 style region test for a single (rho0, d0) point.
Classification classify_pair(const FluxModel& flux,
                             const ThresholdCurve& sigma,
                             const std::optional<ThresholdCurve>& gamma,
                             double rho0, double d0);

struct ProfileSamples {
    std::vector<double> x;
    std::vector<double> rho;
    std::vector<double> drho;
};

// Classifies a sampled initial profile; subcritical only if every sample
// is. On a TypeI/TypeII tie, TypeI is reported with both witnesses noted.
Classification classify_profile(const FluxModel& flux,
                                const ThresholdCurve& sigma,
                                const std::optional<ThresholdCurve>& gamma,
                                const ProfileSamples& profile);

}  // namespace ctflow
