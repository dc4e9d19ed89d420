#include "ctflow/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ctflow/numerics.hpp"

namespace ctflow {

std::string to_string(Terminal t) {
    switch (t) {
        case Terminal::ConvergedToOrigin:
            return "converged";
        case Terminal::BlowUpPlus:
            return "blowup+";
        case Terminal::BlowUpMinus:
            return "blowup-";
        case Terminal::TimeLimit:
            return "time-limit";
    }
    return "?";
}

NonlocalFactorModel NonlocalFactorModel::lower(double m) {
    NonlocalFactorModel f;
    f.mode = Mode::ConstantLower;
    f.m = m;
    return f;
}

NonlocalFactorModel NonlocalFactorModel::coupled(
    double m, double x0, std::function<double(double, double)> field) {
    NonlocalFactorModel f;
    f.mode = Mode::Coupled;
    f.m = m;
    f.x0 = x0;
    f.field = std::move(field);
    return f;
}

PhaseTrajectory integrate_phase(const FluxModel& flux,
                                const NonlocalFactorModel& factor, double rho0,
                                double d0, const PhaseIntegrateOptions& opt) {
    if (!(rho0 >= 0.0 && rho0 < 1.0)) {
        throw std::invalid_argument("integrate_phase: rho0 in [0, 1)");
    }
    if (!(opt.t_max > 0.0) || !(opt.blowup_cap >= 1e4)) {
        throw std::invalid_argument("integrate_phase: bad options");
    }

    auto eval_factor = [&](double t, double x) {
        switch (factor.mode) {
            case NonlocalFactorModel::Mode::ConstantOne:
                return 1.0;
            case NonlocalFactorModel::Mode::ConstantLower:
                return std::exp(-factor.m);
            case NonlocalFactorModel::Mode::Coupled: {
                const double v = factor.field(t, x);
                if (v < std::exp(-factor.m) - 1e-9 || v > 1.0 + 1e-9) {
                    throw std::runtime_error(
                        "integrate_phase: factor out of bounds");
                }
                return v;
            }
        }
        return 1.0;
    };

    PhaseTrajectory traj;
    traj.states.push_back({0.0, rho0, d0});

    // state: (rho, d, x)
    std::vector<double> y = {rho0, d0, factor.x0};
    auto rhs = [&](double t, std::span<const double> s, std::span<double> out) {
        const double rho = s[0];
        const double d = s[1];
        const double e = eval_factor(t, s[2]);
        const double f = flux.eval(rho);
        const double fp = flux.deriv1(rho);
        const double fpp = flux.deriv2(rho);
        out[0] = -rho * f * e;
        out[1] = -(fpp * d * d + (f + 2.0 * rho * fp) * d + rho * rho * f) * e;
        out[2] = fp * e;
    };

    bool done = false;
    auto observer = [&](double t, std::span<const double> s) {
        traj.states.push_back({t, s[0], s[1]});
        if (std::abs(s[1]) > opt.blowup_cap) {
            traj.terminal = (s[1] > 0.0) ? Terminal::BlowUpPlus
                                         : Terminal::BlowUpMinus;
            traj.t_star = t;
            done = true;
            return false;
        }
        // trapping cone: strictly below the separatrix slope beta near the
        // origin, far below rho_c, and d bounded; decay to 0 is guaranteed
        if (s[0] < 0.01 && s[1] <= 0.45 * flux.beta * s[0] + 1e-12 &&
            s[1] > -1.0) {
            traj.terminal = Terminal::ConvergedToOrigin;
            done = true;
            return false;
        }
        return true;
    };

    OdeStepControl ctrl;
    ctrl.rel_tol = 1e-10;
    ctrl.abs_tol = 1e-12;
    ctrl.h_max = std::min(opt.h_max, opt.t_max / 16.0);
    const bool ok = integrate_adaptive(rhs, y, 0.0, opt.t_max, ctrl, observer);
    if (!ok && !done) {
        // step floor while d is already huge: report as blow-up
        if (std::abs(y[1]) > 1e3) {
            traj.terminal = (y[1] > 0.0) ? Terminal::BlowUpPlus
                                         : Terminal::BlowUpMinus;
            traj.t_star = traj.states.back().t;
        } else {
            throw std::runtime_error("integrate_phase: step floor hit");
        }
    }
    return traj;
}

PhaseCurve trajectory_in_phase_plane(const FluxModel& flux, double rho0,
                                     double d0, double rho_end, double cap) {
    if (!(0.0 < rho_end && rho_end < rho0 && rho0 < 1.0)) {
        throw std::invalid_argument(
            "trajectory_in_phase_plane: need 0 < rho_end < rho0 < 1");
    }
    PhaseCurve curve;
    curve.rho.push_back(rho0);
    curve.d.push_back(d0);

    std::vector<double> y = {d0};
    auto rhs = [&flux](double rho, std::span<const double> s,
                       std::span<double> out) {
        const double f = flux.eval(rho);
        const double fp = flux.deriv1(rho);
        const double fpp = flux.deriv2(rho);
        const double d = s[0];
        out[0] = (fpp * d * d + (f + 2.0 * rho * fp) * d + rho * rho * f) /
                 (rho * f);
    };
    bool capped = false;
    auto observer = [&](double rho, std::span<const double> s) {
        if (std::abs(s[0]) > cap) {
            curve.blowup_at = rho;
            capped = true;
            return false;
        }
        curve.rho.push_back(rho);
        curve.d.push_back(s[0]);
        return true;
    };
    OdeStepControl ctrl;
    ctrl.rel_tol = 1e-10;
    ctrl.abs_tol = 1e-12;
    ctrl.h_max = 1e-3;
    const bool ok = integrate_adaptive(rhs, y, rho0, rho_end, ctrl, observer);
    if (!ok && !capped) {
        if (std::abs(y[0]) > 1e3) {
            curve.blowup_at = curve.rho.back();
        } else {
            throw std::runtime_error("trajectory_in_phase_plane: stalled");
        }
    }
    return curve;
}

std::optional<std::pair<double, double>> nullclines(const FluxModel& flux,
                                                    double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("nullclines: rho in (0,1)");
    }
    const double fpp = flux.deriv2(rho);
    if (std::abs(fpp) < 1e-14) {
        throw std::invalid_argument("nullclines: rho at the inflection point");
    }
    const double f = flux.eval(rho);
    const double fp = flux.deriv1(rho);
    const double b = f + 2.0 * rho * fp;
    const double disc = b * b - 4.0 * rho * rho * f * fpp;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double d_plus = (-b - root) / (2.0 * fpp);
    const double d_minus = (-b + root) / (2.0 * fpp);
    if (rho < flux.rho_c && !(d_minus < 0.0 && d_plus > 0.0)) {
        throw std::runtime_error("nullclines: sign structure violated");
    }
    return std::make_pair(d_minus, d_plus);
}

double descent_time(const FluxModel& flux, double m, double rho0, double rho1) {
    if (!(0.0 < rho1 && rho1 < rho0 && rho0 < 1.0)) {
        throw std::invalid_argument("descent_time: need 0 < rho1 < rho0 < 1");
    }
    const double integral = adaptive_simpson(
        [&flux](double r) { return 1.0 / (r * flux.eval(r)); }, rho1, rho0,
        1e-12);
    return std::exp(m) * integral;
}

double blowup_time_bound(const FluxModel& flux, double m, double rho0,
                         double d0, double rho1) {
    const auto nc = nullclines(flux, rho1);
    if (!nc) {
        throw std::invalid_argument("blowup_time_bound: no nullcline at rho1");
    }
    const double d_plus = nc->second;

    // empirical uniform lower bound of d along the trajectory
    PhaseCurve curve = trajectory_in_phase_plane(flux, rho0, d0, rho1, 1e8);
    const double c = *std::min_element(curve.d.begin(), curve.d.end());
    if (!(2.0 * d_plus < c)) {
        throw std::invalid_argument("blowup_time_bound: rho1 too large");
    }

    double min_neg_fpp = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
        const double r = rho1 * i / 1000.0;
        min_neg_fpp = std::min(min_neg_fpp, -flux.deriv2(r));
    }
    const double C = std::exp(-m) * min_neg_fpp;
    if (!(C > 0.0)) {
        throw std::runtime_error("blowup_time_bound: nonpositive C");
    }
    return descent_time(flux, m, rho0, rho1) + 1.0 / (C * d_plus);
}

}  // namespace ctflow
