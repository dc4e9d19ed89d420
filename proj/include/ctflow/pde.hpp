#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ctflow/flux.hpp"
#include "ctflow/kernel.hpp"
#include "ctflow/profiles.hpp"

namespace ctflow {

struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double grad_max = 0.0;  // max of d_x rho (central differences)
    double grad_min = 0.0;  // min of d_x rho
    double rhobar_max = 0.0;
};

struct GridSolution {
    GridSpec grid;
    double t = 0.0;
    std::vector<double> rho;  // cell averages
    std::vector<DiagnosticsRecord> history;
};

struct ShockReport {
    bool detected = false;
    std::optional<double> t_shock;
    std::optional<double> x_shock;
    int gradient_sign = 0;  // +1 type I, -1 type II
    double refinement_evidence = 1.0;  // fine/coarse max-gradient ratio
};

// One explicit Rusanov step with the nonlocal factor frozen for the step.
// dt = cfl * dx / max wave speed, capped by max_dt. Returns the dt taken.
double step(const FluxModel& flux, const KernelSpec& kernel, GridSolution& sol,
            double cfl, double max_dt = 1e30);

// Discrete checks of the a-priori bounds on rho_bar and e^{-rho_bar}.
struct BoundCheck {
    bool rhobar_in_range = false;     // 0 <= rho_bar <= K_M m
    bool factor_in_range = false;     // e^{-K_M m} <= e^{-rho_bar} <= 1
    bool factor_gradient_ok = false;  // |d_x e^{-rho_bar}| <= |K|_BV
    double worst = 0.0;

    bool all() const {
        return rhobar_in_range && factor_in_range && factor_gradient_ok;
    }
};

DiagnosticsRecord diagnostics(const GridSolution& sol, const KernelSpec& kernel);
BoundCheck check_bounds(const GridSolution& sol, const KernelSpec& kernel);

struct SimulateOptions {
    double t_end = 10.0;
    int n_cells = 400;
    double cfl = 0.4;
    double domain_a = -10.0;
    double domain_b = 10.0;
    double check_dt = 0.1;  // shock-detection and snapshot cadence
    double grad_growth_factor = 20.0;
    double refinement_threshold = 1.8;
    std::function<void(const GridSolution&)> on_snapshot;
};

// Advances to t_end or until shock detection. A companion run at twice the
// resolution supplies the refinement evidence for the detector.
std::pair<GridSolution, ShockReport> simulate(const FluxModel& flux,
                                              const KernelSpec& kernel,
                                              const Profile& profile,
                                              const SimulateOptions& opt);

}  // namespace ctflow
