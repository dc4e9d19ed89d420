#include "ctflow/profiles.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ctflow/numerics.hpp"

namespace ctflow {

double Profile::mass() const {
    return adaptive_simpson(rho0, -support_radius, support_radius, 1e-12);
}

namespace {

double sech2(double z) {
    const double c = std::cosh(z);
    return 1.0 / (c * c);
}

void check_amplitude(double A) {
    if (!(A > 0.0 && A < 1.0)) {
        throw std::invalid_argument("profile amplitude must be in (0, 1)");
    }
}

}  // namespace

Profile make_sech2(double A, double w) {
    check_amplitude(A);
    if (!(w > 0.0)) throw std::invalid_argument("sech2 profile: w > 0");
    Profile p;
    p.kind = Profile::Kind::Sech2;
    p.amplitude = A;
    p.rho0 = [A, w](double x) { return A * sech2(x / w); };
    p.drho0 = [A, w](double x) {
        return -2.0 * A / w * sech2(x / w) * std::tanh(x / w);
    };
    // sech^2 ~ 4 e^{-2|x|/w}
    p.support_radius = 0.5 * w * std::log(4.0 * A / 1e-14);
    return p;
}

Profile make_steepened_sech2(double A, double w, double skew) {
    check_amplitude(A);
    if (!(w > 0.0)) throw std::invalid_argument("ssech2 profile: w > 0");
    // max of |tanh z + z sech^2 z| is ~1.1995, so monotonicity of the shear
    // needs |skew| below ~0.83
    if (!(skew > -0.8 && skew < 0.8)) {
        throw std::invalid_argument("ssech2 profile: |skew| < 0.8");
    }
    Profile p;
    p.kind = Profile::Kind::SteepenedSech2;
    p.amplitude = A;
    // shear u(x) = (x/w)(1 - skew tanh(x/w)); skew > 0 compresses x < 0
    auto u = [w, skew](double x) {
        return (x / w) * (1.0 - skew * std::tanh(x / w));
    };
    auto du = [w, skew](double x) {
        const double z = x / w;
        return (1.0 - skew * std::tanh(z) - z * skew * sech2(z)) / w;
    };
    p.rho0 = [A, u](double x) { return A * sech2(u(x)); };
    p.drho0 = [A, u, du](double x) {
        const double v = u(x);
        return -2.0 * A * sech2(v) * std::tanh(v) * du(x);
    };
    p.support_radius = 0.5 * w / (1.0 - std::abs(skew)) *
                       std::log(4.0 * A / 1e-14);
    return p;
}

Profile make_plateau(double height, double width, double front_steepness) {
    check_amplitude(height);
    if (!(width > 0.0 && front_steepness > 0.0)) {
        throw std::invalid_argument("plateau profile: positive width and steepness");
    }
    const double sr = 0.5 * width;  // gentle rising scale
    const double c = 0.5 * width;
    // descending front: uniform slope of magnitude front_steepness built from
    // a softplus difference, with a sharp smoothing corner at the top so the
    // slope is already substantial while the density is still near the peak
    const double C = front_steepness;
    const double sc = 0.021 / C;  // corner scale
    const double x1 = c;
    const double x2 = c + height / C;

    auto softplus = [](double z) {
        return (z > 30.0) ? z : std::log1p(std::exp(z));
    };
    auto logistic = [](double z) {
        return (z > 30.0) ? 1.0 : std::exp(z) / (1.0 + std::exp(z));
    };
    auto up = [c, sr](double x) { return 0.5 * (1.0 + std::tanh((x + c) / sr)); };
    auto ramp = [=](double x) {
        return C * sc * (softplus((x2 - x) / sc) - softplus((x1 - x) / sc));
    };
    auto dramp = [=](double x) {
        return -C * (logistic((x2 - x) / sc) - logistic((x1 - x) / sc));
    };
    auto g = [up, ramp](double x) { return up(x) * ramp(x); };

    // peak sits just left of the front corner; dense scan plus refinement
    const double lo0 = -c - 10.0 * sr, hi0 = x2;
    double best_x = 0.0, best = -1.0;
    for (int i = 0; i <= 4000; ++i) {
        const double x = lo0 + (hi0 - lo0) * i / 4000.0;
        if (g(x) > best) {
            best = g(x);
            best_x = x;
        }
    }
    double lo = best_x - (hi0 - lo0) / 4000.0;
    double hi = best_x + (hi0 - lo0) / 4000.0;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (g(m1) < g(m2)) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    const double scale = height / g(0.5 * (lo + hi));

    Profile p;
    p.kind = Profile::Kind::Plateau;
    p.amplitude = height;
    p.rho0 = [scale, g](double x) { return scale * g(x); };
    p.drho0 = [scale, up, ramp, dramp, c, sr](double x) {
        const double dup = 0.5 * sech2((x + c) / sr) / sr;
        return scale * (dup * ramp(x) + up(x) * dramp(x));
    };
    const double decay = std::log(4.0 * height / 1e-14);
    p.support_radius = std::max(c + 0.5 * sr * decay, x2 + sc * decay);
    return p;
}

Profile parse_profile_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("parse_profile_spec: missing ':' in '" +
                                    spec + "'");
    }
    const std::string kind = spec.substr(0, colon);
    std::map<std::string, double> kv;
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("parse_profile_spec: bad item '" +
                                        item + "'");
        }
        kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
    auto get = [&kv, &spec](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw std::invalid_argument("parse_profile_spec: missing '" + key +
                                        "' in '" + spec + "'");
        }
        return it->second;
    };
    Profile p;
    if (kind == "sech2") {
        p = make_sech2(get("A"), get("w"));
    } else if (kind == "ssech2") {
        p = make_steepened_sech2(get("A"), get("w"), get("skew"));
    } else if (kind == "plateau") {
        p = make_plateau(get("h"), get("w"), get("s"));
    } else {
        throw std::invalid_argument("parse_profile_spec: unknown kind '" +
                                    kind + "'");
    }
    p.spec = spec;
    return p;
}

ProfileSamples sample(const Profile& profile, const GridSpec& grid) {
    ProfileSamples s;
    s.x.reserve(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i) {
        const double x = grid.center(i);
        s.x.push_back(x);
        s.rho.push_back(profile.rho0(x));
        s.drho.push_back(profile.drho0(x));
    }
    return s;
}

}  // namespace ctflow
