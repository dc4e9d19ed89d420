#pragma once

#include <string>
#include <vector>

namespace ctflow {

// Uniform cell-centered grid on [a, b].
struct GridSpec {
    double a = -10.0;
    double b = 10.0;
    int n_cells = 400;

    double dx() const { return (b - a) / n_cells; }
    double center(int i) const { return a + (i + 0.5) * dx(); }
};

// Look-ahead interaction kernel K >= 0 supported on x >= 0.
struct KernelSpec {
    enum class Kind { InfiniteLookAhead, Indicator, LinearDecay };

    Kind kind = Kind::InfiniteLookAhead;
    double L = 0.0;        // look-ahead distance; unused for InfiniteLookAhead
    double k_max = 1.0;    // sup bound K_M
    double bv_norm = 2.0;  // conservative total-variation bound

    double operator()(double x) const;

    static KernelSpec infinite();
    static KernelSpec indicator(double L);
    static KernelSpec linear_decay(double L);
};

// rho_bar(x_i) = integral of K(y) rho(x_i + y) dy by trapezoid quadrature,
// with rho extended by zero outside the grid. O(N) for InfiniteLookAhead.
std::vector<double> nonlocal_density(const KernelSpec& kernel,
                                     const GridSpec& grid,
                                     const std::vector<double>& rho);

// Parses "infinite", "indicator:<L>", "linear:<L>".
KernelSpec parse_kernel_spec(const std::string& spec);

}  // namespace ctflow
