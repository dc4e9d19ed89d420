#include "ctflow/flux.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "ctflow/numerics.hpp"

namespace ctflow {

namespace {

constexpr double kRhoClamp = 1.0 - 1e-9;  // (1-rho)^(J-2) diverges at 1 for J<2
constexpr double kFdStep = 1e-5;

double fd1(const std::function<double(double)>& f, double x) {
    const double h = kFdStep;
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
           (12 * h);
}

double fd2(const std::function<double(double)>& f, double x) {
    const double h = kFdStep;
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) -
            f(x - 2 * h)) /
           (12 * h * h);
}

double fd3(const std::function<double(double)>& f, double x) {
    const double h = 10 * kFdStep;
    return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) /
           (2 * h * h * h);
}

}  // namespace

FluxModel make_family_j(double J) {
    if (!(J > 0.0)) {
        throw std::invalid_argument("make_family_j: J must be positive");
    }
    FluxModel m;
    m.kind = (J == 1.0) ? FluxModel::Kind::Lwr : FluxModel::Kind::FamilyJ;
    m.J = J;
    m.eval = [J](double r) { return r * std::pow(1.0 - r, J); };
    m.deriv1 = [J](double r) {
        r = std::min(r, kRhoClamp);
        return std::pow(1.0 - r, J - 1.0) * (1.0 - (J + 1.0) * r);
    };
    m.deriv2 = [J](double r) {
        r = std::min(r, kRhoClamp);
        return J * ((J + 1.0) * r - 2.0) * std::pow(1.0 - r, J - 2.0);
    };
    m.deriv3 = [J](double r) {
        r = std::min(r, kRhoClamp);
        return J * (J - 1.0) * (3.0 - (J + 1.0) * r) *
               std::pow(1.0 - r, J - 3.0);
    };
    m.rho_c = (J > 1.0) ? 2.0 / (J + 1.0) : 1.0;
    m.beta = 1.0 / J;  // -2 f'(0)/f''(0) = -2*1/(-2J)
    return m;
}

FluxModel make_lwr() { return make_family_j(1.0); }

FluxModel make_custom(std::function<double(double)> eval,
                      std::function<double(double)> d1,
                      std::function<double(double)> d2,
                      std::function<double(double)> d3) {
    if (!eval) throw std::invalid_argument("make_custom: eval required");
    FluxModel m;
    m.kind = FluxModel::Kind::Custom;
    m.eval = eval;
    m.deriv1 = d1 ? std::move(d1) : [eval](double r) { return fd1(eval, r); };
    m.deriv2 = d2 ? std::move(d2) : [eval](double r) { return fd2(eval, r); };
    m.deriv3 = d3 ? std::move(d3) : [eval](double r) { return fd3(eval, r); };
    try {
        m.rho_c = find_inflection(m);
    } catch (const std::runtime_error&) {
        m.rho_c = 1.0;  // hypothesis violation; validate_hypotheses reports it
    }
    const double fp0 = m.deriv1(0.0);
    const double fpp0 = m.deriv2(0.0);
    m.beta = -2.0 * fp0 / fpp0;
    return m;
}

FluxModel make_tabulated(const std::vector<double>& rho,
                         const std::vector<double>& f) {
    auto interp = std::make_shared<MonotoneCubic>(rho, f);
    return make_custom([interp](double r) { return (*interp)(r); });
}

double find_inflection(const FluxModel& flux) {
    constexpr double kRight = 1.0 - 1e-6;
    constexpr int kSamples = 4096;
    // locate sign changes of f'' on a fine grid
    double left = -1.0, right = -1.0;
    int changes = 0;
    double prev_x = 1e-6;
    double prev = flux.deriv2(prev_x);
    for (int i = 1; i <= kSamples; ++i) {
        const double x = 1e-6 + (kRight - 1e-6) * i / kSamples;
        const double v = flux.deriv2(x);
        if (prev < 0.0 && v > 0.0) {
            ++changes;
            left = prev_x;
            right = x;
        } else if (prev > 0.0 && v < 0.0) {
            throw std::runtime_error(
                "find_inflection: hypothesis violation (convex-to-concave switch)");
        }
        prev = v;
        prev_x = x;
    }
    if (changes == 0) return 1.0;
    if (changes > 1) {
        throw std::runtime_error(
            "find_inflection: hypothesis violation (multiple sign changes)");
    }
    while (right - left > 1e-12) {
        const double mid = 0.5 * (left + right);
        if (flux.deriv2(mid) < 0.0) {
            left = mid;
        } else {
            right = mid;
        }
    }
    return 0.5 * (left + right);
}

bool ValidationReport::all_passed() const {
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

ValidationReport validate_hypotheses(const FluxModel& flux, int n_samples) {
    if (n_samples < 16) {
        throw std::invalid_argument("validate_hypotheses: n_samples >= 16");
    }
    ValidationReport rep;
    auto add = [&rep](const std::string& name, double violation) {
        rep.checks.push_back({name, violation <= 0.0, std::max(0.0, violation)});
    };

    add("f(0) = 0", std::abs(flux.eval(0.0)) - 1e-12);
    add("f(1) = 0", std::abs(flux.eval(1.0)) - 1e-12);
    const double fp0 = flux.deriv1(0.0);
    rep.checks.push_back({"f'(0) > 0", fp0 > 0.0, fp0 > 0.0 ? 0.0 : -fp0});

    double rho_c = 1.0;
    bool sign_ok = true;
    try {
        rho_c = find_inflection(flux);
    } catch (const std::runtime_error&) {
        sign_ok = false;
    }
    rep.checks.push_back({"single concave-to-convex switch", sign_ok, 0.0});

    double worst_concave = 0.0, worst_convex = 0.0;
    const double right = 1.0 - 1e-6;
    for (int i = 0; i < n_samples; ++i) {
        const double x = right * i / (n_samples - 1);
        if (std::abs(x - rho_c) < 1e-10) continue;
        const double fpp = flux.deriv2(x);
        if (x < rho_c) {
            worst_concave = std::max(worst_concave, fpp);
        } else {
            worst_convex = std::max(worst_convex, -fpp);
        }
    }
    add("f'' < 0 below rho_c", worst_concave - 1e-10);
    if (rho_c < 1.0) add("f'' > 0 above rho_c", worst_convex - 1e-10);
    const double beta = -2.0 * fp0 / flux.deriv2(0.0);
    rep.checks.push_back({"beta > 0", beta > 0.0, beta > 0.0 ? 0.0 : -beta});
    return rep;
}

FluxModel parse_flux_spec(const std::string& spec) {
    if (spec == "lwr") return make_lwr();
    if (spec.rfind("fj:", 0) == 0) {
        const double J = std::stod(spec.substr(3));
        return make_family_j(J);
    }
    if (spec.rfind("table:", 0) == 0) {
        std::ifstream in(spec.substr(6));
        if (!in) {
            throw std::runtime_error("parse_flux_spec: cannot open " +
                                     spec.substr(6));
        }
        std::vector<double> r, f;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            double a, b;
            char comma;
            if ((ls >> a)) {
                ls >> std::ws;
                if (ls.peek() == ',') ls >> comma;
                if (ls >> b) {
                    r.push_back(a);
                    f.push_back(b);
                }
            }
        }
        return make_tabulated(r, f);
    }
    throw std::invalid_argument("parse_flux_spec: unknown spec '" + spec + "'");
}

}  // namespace ctflow
