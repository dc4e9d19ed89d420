#include "ctflow/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoEnd = 1.0 - 1e-9;

// Right-hand side of the phase-plane trajectory ODE d'(rho).
double trajectory_rhs(const FluxModel& flux, double rho, double d) {
    const double f = flux.eval(rho);
    const double fp = flux.deriv1(rho);
    const double fpp = flux.deriv2(rho);
    return (fpp * d * d + (f + 2.0 * rho * fp) * d + rho * rho * f) /
           (rho * f);
}

// Right-hand side for eta = 1/gamma near the inflection point.
double eta_rhs(const FluxModel& flux, double rho, double eta) {
    const double f = flux.eval(rho);
    const double fp = flux.deriv1(rho);
    const double fpp = flux.deriv2(rho);
    return (-fpp - (f + 2.0 * rho * fp) * eta -
            rho * rho * f * eta * eta) /
           (rho * f);
}

OdeStepControl make_ctrl(const CurveBuildOptions& opt) {
    OdeStepControl c;
    c.rel_tol = opt.rel_tol;
    c.abs_tol = opt.abs_tol;
    c.h_max = opt.max_step;
    return c;
}

}  // namespace

double ThresholdCurve::value_at(double rho) const {
    if (blowup_at && rho >= *blowup_at) return kInf;
    if (which == Which::Gamma && rho < grid.front()) return -kInf;
    return interp_(rho);
}

void ThresholdCurve::finalize() { interp_ = MonotoneCubic(grid, values); }

ThresholdCurve build_sigma(const FluxModel& flux,
                           const CurveBuildOptions& opt) {
    if (!(opt.eps > 0.0 && opt.eps <= 1e-3)) {
        throw std::invalid_argument("build_sigma: eps in (0, 1e-3]");
    }
    if (!(opt.cap >= 1e3)) {
        throw std::invalid_argument("build_sigma: cap >= 1e3");
    }
    const double beta = flux.beta;

    ThresholdCurve curve;
    curve.which = ThresholdCurve::Which::Sigma;
    curve.rho_c = flux.rho_c;

    // linear seed sigma = beta*rho on [0, eps]
    curve.grid = {0.0, 0.5 * opt.eps, opt.eps};
    curve.values = {0.0, 0.5 * beta * opt.eps, beta * opt.eps};
    for (size_t i = 0; i < curve.grid.size(); ++i) {
        const double s = curve.values[i];
        if (s < 0.0 || s > 1.25 * beta * curve.grid[i] + 1e-300) {
            throw std::runtime_error("build_sigma: seed region violation");
        }
    }

    std::vector<double> y = {beta * opt.eps};
    auto rhs = [&flux](double rho, std::span<const double> s,
                       std::span<double> out) {
        out[0] = trajectory_rhs(flux, rho, s[0]);
    };
    bool capped = false;
    auto observer = [&](double rho, std::span<const double> s) {
        if (s[0] > opt.cap) {
            curve.blowup_at = rho;
            capped = true;
            return false;
        }
        curve.grid.push_back(rho);
        curve.values.push_back(s[0]);
        return true;
    };
    const bool ok = integrate_adaptive(rhs, y, opt.eps, kRhoEnd,
                                       make_ctrl(opt), observer);
    if (!ok && !capped) {
        // step floor hit; treat as blow-up when the curve is already steep
        if (y[0] > 1e3) {
            curve.blowup_at = curve.grid.back();
        } else {
            throw std::runtime_error("build_sigma: integration stalled");
        }
    }
    if (curve.blowup_at && !(*curve.blowup_at > flux.rho_c)) {
        throw std::runtime_error("build_sigma: blow-up at or below rho_c");
    }
    curve.finalize();
    return curve;
}

namespace {

// f^(n)(rho) for n in 3..6; n > 3 via central differences of deriv3.
double flux_nth_deriv(const FluxModel& flux, double rho, int n) {
    const double h = 1e-3;
    switch (n) {
        case 3:
            return flux.deriv3(rho);
        case 4:
            return (flux.deriv3(rho + h) - flux.deriv3(rho - h)) / (2 * h);
        case 5:
            return (flux.deriv3(rho + h) - 2 * flux.deriv3(rho) +
                    flux.deriv3(rho - h)) /
                   (h * h);
        case 6:
            return (flux.deriv3(rho + 2 * h) - 2 * flux.deriv3(rho + h) +
                    2 * flux.deriv3(rho - h) - flux.deriv3(rho - 2 * h)) /
                   (2 * h * h * h);
        default:
            throw std::logic_error("flux_nth_deriv: n out of range");
    }
}

}  // namespace

ThresholdCurve build_gamma(const FluxModel& flux,
                           const CurveBuildOptions& opt) {
    if (!(flux.rho_c < 1.0)) {
        throw std::runtime_error("build_gamma: no inflection");
    }
    if (!(opt.delta > 0.0 && opt.delta <= 1e-3)) {
        throw std::invalid_argument("build_gamma: delta in (0, 1e-3]");
    }
    const double rc = flux.rho_c;

    // Taylor seed for eta from the first nonvanishing derivative of f at rho_c
    int n = 3;
    double fn = 0.0;
    for (; n <= 6; ++n) {
        fn = flux_nth_deriv(flux, rc, n);
        if (std::abs(fn) > 1e-10) break;
    }
    if (n > 6) {
        throw std::runtime_error("build_gamma: degenerate inflection");
    }
    double fact = 1.0;
    for (int k = 2; k <= n - 1; ++k) fact *= k;
    const double eta_deriv = -fn / (rc * flux.eval(rc));
    const double h0 = opt.delta;
    double eta0 = eta_deriv * std::pow(h0, n - 1) / fact;

    ThresholdCurve curve;
    curve.which = ThresholdCurve::Which::Gamma;
    curve.rho_c = rc;

    // stage 1: integrate eta until gamma = 1/eta is moderate
    std::vector<double> y = {eta0};
    auto rhs_eta = [&flux](double rho, std::span<const double> s,
                           std::span<double> out) {
        out[0] = eta_rhs(flux, rho, s[0]);
    };
    constexpr double kEtaSwitch = 1e-3;
    double rho_switch = rc + h0;
    auto obs_eta = [&](double rho, std::span<const double> s) {
        if (std::abs(s[0]) > 1e-12) {
            curve.grid.push_back(rho);
            curve.values.push_back(1.0 / s[0]);
        }
        rho_switch = rho;
        if (std::abs(s[0]) >= kEtaSwitch) return false;
        return true;
    };
    if (std::abs(eta0) > 1e-12) {
        curve.grid.push_back(rc + h0);
        curve.values.push_back(1.0 / eta0);
    }
    if (!integrate_adaptive(rhs_eta, y, rc + h0, kRhoEnd, make_ctrl(opt),
                            obs_eta)) {
        throw std::runtime_error("build_gamma: eta integration stalled");
    }
    if (std::abs(y[0]) < kEtaSwitch) {
        // eta never grew; gamma remains below -1/kEtaSwitch everywhere
        curve.finalize();
        return curve;
    }

    // stage 2: continue in the gamma variable
    std::vector<double> g = {1.0 / y[0]};
    auto rhs_g = [&flux](double rho, std::span<const double> s,
                         std::span<double> out) {
        out[0] = trajectory_rhs(flux, rho, s[0]);
    };
    bool capped = false;
    auto obs_g = [&](double rho, std::span<const double> s) {
        if (s[0] > opt.cap) {
            curve.blowup_at = rho;
            capped = true;
            return false;
        }
        curve.grid.push_back(rho);
        curve.values.push_back(s[0]);
        return true;
    };
    const bool ok =
        integrate_adaptive(rhs_g, g, rho_switch, kRhoEnd, make_ctrl(opt), obs_g);
    if (!ok && !capped) {
        if (g[0] > 1e3) {
            curve.blowup_at = curve.grid.back();
        } else {
            throw std::runtime_error("build_gamma: integration stalled");
        }
    }
    curve.finalize();
    return curve;
}

double sigma_closed_fj(double J, double rho) {
    if (!(J > 0.0)) throw std::invalid_argument("sigma_closed_fj: J > 0");
    return rho * (1.0 - rho) / J;
}

double gamma_closed_fj(double J, double rho) {
    if (!(J > 1.0)) throw std::invalid_argument("gamma_closed_fj: J > 1");
    const double rc = 2.0 / (J + 1.0);
    if (!(rho > rc)) {
        throw std::invalid_argument("gamma_closed_fj: rho at or below rho_c");
    }
    const double re = 4.0 * J / ((J + 1.0) * (J + 1.0));
    const double dr = rho - rc;
    return rho * rho * (1.0 - rho) * (rho - re) / (J * dr * dr);
}

std::string to_string(Region r) {
    switch (r) {
        case Region::Subcritical:
            return "subcritical";
        case Region::TypeISupercritical:
            return "type1";
        case Region::TypeIISupercritical:
            return "type2";
    }
    return "?";
}

Classification classify_pair(const FluxModel& flux,
                             const ThresholdCurve& sigma,
                             const std::optional<ThresholdCurve>& gamma,
                             double rho0, double d0) {
    if (!(rho0 >= 0.0 && rho0 < 1.0)) {
        throw std::invalid_argument("classify_pair: rho0 must be in [0, 1)");
    }
    if (flux.rho_c < 1.0 && !gamma) {
        throw std::invalid_argument(
            "classify_pair: gamma required when rho_c < 1");
    }
    Classification out;
    const double sv = sigma.value_at(rho0);
    if (d0 > sv) {
        out.region = Region::TypeISupercritical;
        out.margin = d0 - sv;
        return out;
    }
    if (gamma && rho0 > flux.rho_c) {
        const double gv = gamma->value_at(rho0);
        if (d0 <= gv) {
            out.region = Region::TypeIISupercritical;
            out.margin = gv - d0;
            return out;
        }
        out.region = Region::Subcritical;
        out.margin = std::max(d0 - sv, gv - d0);  // negative
        return out;
    }
    out.region = Region::Subcritical;
    out.margin = d0 - sv;
    return out;
}

namespace {

Classification classify_samples(const FluxModel& flux,
                                const ThresholdCurve& sigma,
                                const std::optional<ThresholdCurve>& gamma,
                                const std::vector<double>& x,
                                const std::vector<double>& rho,
                                const std::vector<double>& drho) {
    Classification worst1, worst2, sub;
    bool any1 = false, any2 = false;
    sub.margin = -kInf;
    for (size_t i = 0; i < x.size(); ++i) {
        Classification c = classify_pair(flux, sigma, gamma, rho[i], drho[i]);
        switch (c.region) {
            case Region::TypeISupercritical:
                if (!any1 || c.margin > worst1.margin) {
                    worst1 = c;
                    worst1.witness_x = x[i];
                }
                any1 = true;
                break;
            case Region::TypeIISupercritical:
                if (!any2 || c.margin > worst2.margin) {
                    worst2 = c;
                    worst2.witness_x = x[i];
                }
                any2 = true;
                break;
            case Region::Subcritical:
                if (c.margin > sub.margin) {
                    sub.margin = c.margin;
                    sub.witness_x = x[i];
                }
                break;
        }
    }
    if (any1 && any2) {
        worst1.note = "both supercritical types present; type2 witness at x=" +
                      std::to_string(*worst2.witness_x);
        return worst1;
    }
    if (any1) return worst1;
    if (any2) return worst2;
    sub.region = Region::Subcritical;
    return sub;
}

}  // namespace

Classification classify_profile(const FluxModel& flux,
                                const ThresholdCurve& sigma,
                                const std::optional<ThresholdCurve>& gamma,
                                const ProfileSamples& profile) {
    if (profile.x.size() < 2) {
        throw std::invalid_argument("classify_profile: need >= 2 samples");
    }
    Classification coarse = classify_samples(flux, sigma, gamma, profile.x,
                                             profile.rho, profile.drho);

    // 2x refinement via interpolation of the sampled profile
    MonotoneCubic ir(profile.x, profile.rho);
    MonotoneCubic id(profile.x, profile.drho);
    std::vector<double> xf, rf, df;
    for (size_t i = 0; i + 1 < profile.x.size(); ++i) {
        xf.push_back(profile.x[i]);
        rf.push_back(profile.rho[i]);
        df.push_back(profile.drho[i]);
        const double xm = 0.5 * (profile.x[i] + profile.x[i + 1]);
        xf.push_back(xm);
        rf.push_back(std::clamp(ir(xm), 0.0, 1.0 - 1e-12));
        df.push_back(id(xm));
    }
    xf.push_back(profile.x.back());
    rf.push_back(profile.rho.back());
    df.push_back(profile.drho.back());
    Classification fine = classify_samples(flux, sigma, gamma, xf, rf, df);
    if (fine.region != coarse.region) {
        throw std::runtime_error("classify_profile: resolution warning");
    }
    return coarse;
}

}  // namespace ctflow
