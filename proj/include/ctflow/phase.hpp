#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctflow/flux.hpp"

namespace ctflow {

struct PhaseState {
    double t = 0.0;
    double rho = 0.0;
    double d = 0.0;  // d_x rho along the characteristic
};

enum class Terminal { ConvergedToOrigin, BlowUpPlus, BlowUpMinus, TimeLimit };

std::string to_string(Terminal t);

struct PhaseTrajectory {
    std::vector<PhaseState> states;
    Terminal terminal = Terminal::TimeLimit;
    std::optional<double> t_star;  // blow-up time estimate
};

// Slowdown factor e^{-rho_bar} along the characteristic. ConstantOne and
// ConstantLower bracket the genuine coupled factor; Coupled samples a
// time-dependent field at the moving foot point.
struct NonlocalFactorModel {
    enum class Mode { ConstantOne, ConstantLower, Coupled };

    Mode mode = Mode::ConstantOne;
    double m = 0.0;   // total mass (lower bound e^{-m})
    double x0 = 0.0;  // characteristic origin, Coupled only
    std::function<double(double t, double x)> field;  // e^{-rho_bar}(t, x)

    static NonlocalFactorModel one() { return {}; }
    static NonlocalFactorModel lower(double m);
    static NonlocalFactorModel coupled(double m, double x0,
                                       std::function<double(double, double)> f);
};

struct PhaseIntegrateOptions {
    double t_max = 100.0;
    double blowup_cap = 1e6;
    double h_max = 0.1;  // shrink for dense output
};

// Integrates the coupled (rho, d) characteristic dynamics in time.
PhaseTrajectory integrate_phase(const FluxModel& flux,
                                const NonlocalFactorModel& factor, double rho0,
                                double d0, const PhaseIntegrateOptions& opt);

struct PhaseCurve {
    std::vector<double> rho;
    std::vector<double> d;
    std::optional<double> blowup_at;  // rho where |d| exceeded the cap
};

// Integrates the factor-independent phase-plane ODE d(rho) in decreasing rho.
PhaseCurve trajectory_in_phase_plane(const FluxModel& flux, double rho0,
                                     double d0, double rho_end,
                                     double cap = 1e6);

// Roots d_- < d_+ of the quadratic right-hand side of the d dynamics;
// absent when the discriminant is negative (only possible above rho_c).
std::optional<std::pair<double, double>> nullclines(const FluxModel& flux,
                                                    double rho);

// Upper bound t_1 on the time for rho to descend from rho0 to rho1,
// t_1 = e^m * integral of 1/(rho f(rho)) over [rho1, rho0].
double descent_time(const FluxModel& flux, double m, double rho0, double rho1);

// Upper bound on the blow-up time for a type-I seed: t_1 + 1/(C d_+(rho1)).
double blowup_time_bound(const FluxModel& flux, double m, double rho0,
                         double d0, double rho1);

}  // namespace ctflow
