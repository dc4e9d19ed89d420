#include "ctflow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctflow {

double KernelSpec::operator()(double x) const {
    if (x < 0.0) return 0.0;
    switch (kind) {
        case Kind::InfiniteLookAhead:
            return 1.0;
        case Kind::Indicator:
            return x <= L ? 1.0 : 0.0;
        case Kind::LinearDecay:
            return x < L ? 1.0 - x / L : 0.0;
    }
    return 0.0;
}

KernelSpec KernelSpec::infinite() {
    return {Kind::InfiniteLookAhead, 0.0, 1.0, 2.0};
}

KernelSpec KernelSpec::indicator(double L) {
    if (!(L > 0.0)) throw std::invalid_argument("indicator kernel: L > 0");
    return {Kind::Indicator, L, 1.0, 2.0};
}

KernelSpec KernelSpec::linear_decay(double L) {
    if (!(L > 0.0)) throw std::invalid_argument("linear kernel: L > 0");
    return {Kind::LinearDecay, L, 1.0, 2.0};
}

std::vector<double> nonlocal_density(const KernelSpec& kernel,
                                     const GridSpec& grid,
                                     const std::vector<double>& rho) {
    const int n = grid.n_cells;
    if (static_cast<int>(rho.size()) != n) {
        throw std::invalid_argument("nonlocal_density: rho size mismatch");
    }
    for (double r : rho) {
        if (r < -1e-12 || r > 1.0 + 1e-12) {
            throw std::invalid_argument("nonlocal_density: rho out of [0,1]");
        }
    }
    const double dx = grid.dx();
    std::vector<double> rhobar(n, 0.0);

    if (kernel.kind == KernelSpec::Kind::InfiniteLookAhead) {
        // right-to-left cumulative trapezoid; rho vanishes beyond the grid
        double acc = 0.0;
        rhobar[n - 1] = 0.0;
        for (int i = n - 2; i >= 0; --i) {
            acc += 0.5 * dx * (rho[i] + rho[i + 1]);
            rhobar[i] = acc;
        }
        return rhobar;
    }

    // windowed trapezoid over [x_i, x_i + L]. Both finite kernels are (at
    // most) linear in y - x_i, so the window sum splits into prefix sums of
    // the plain and first-moment trapezoid segments: O(n) overall.
    const int win = static_cast<int>(std::floor(kernel.L / dx));
    const bool lin = (kernel.kind == KernelSpec::Kind::LinearDecay);
    // s0[j] = integral of rho over segment j, s1[j] = integral of (y/dx) rho
    // (first moment in units of dx to keep magnitudes tame)
    std::vector<double> p0(n, 0.0), p1(n, 0.0);
    for (int j = 0; j + 1 < n; ++j) {
        const double s0 = 0.5 * dx * (rho[j] + rho[j + 1]);
        p0[j + 1] = p0[j] + s0;
        if (lin) {
            const double s1 =
                0.5 * dx * (j * rho[j] + (j + 1.0) * rho[j + 1]);
            p1[j + 1] = p1[j] + s1;
        }
    }
    const double inv_l = 1.0 / kernel.L;
    for (int i = 0; i < n; ++i) {
        const int m = std::min(i + win, n - 1);
        double acc = p0[m] - p0[i];
        if (lin) {
            // K(y - x_i) = 1 - (y - x_i)/L with y/dx as the stored moment
            acc -= inv_l * dx * ((p1[m] - p1[i]) - i * (p0[m] - p0[i]));
        }
        // partial segment up to the window edge, rho linearly interpolated
        const double rest = kernel.L - (m - i) * dx;
        if (rest > 0.0 && m < n - 1) {
            const double frac = rest / dx;
            const double rho_edge = rho[m] + frac * (rho[m + 1] - rho[m]);
            const double ga = kernel((m - i) * dx) * rho[m];
            const double gb = kernel(kernel.L) * rho_edge;
            acc += 0.5 * rest * (ga + gb);
        }
        rhobar[i] = acc;
    }
    return rhobar;
}

KernelSpec parse_kernel_spec(const std::string& spec) {
    if (spec == "infinite") return KernelSpec::infinite();
    if (spec.rfind("indicator:", 0) == 0) {
        return KernelSpec::indicator(std::stod(spec.substr(10)));
    }
    if (spec.rfind("linear:", 0) == 0) {
        return KernelSpec::linear_decay(std::stod(spec.substr(7)));
    }
    throw std::invalid_argument("parse_kernel_spec: unknown spec '" + spec +
                                "'");
}

}  // namespace ctflow
