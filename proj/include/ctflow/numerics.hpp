#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ctflow {

// Monotone cubic (Fritsch-Carlson) interpolant on strictly increasing knots.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_, slope_;
};

// One adaptive step result of the embedded Dormand-Prince 5(4) pair.
struct OdeStepControl {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_min = 1e-14;
    double h_max = 1e-2;
};

// Integrates y' = rhs(t, y) from t0 to t1, invoking observer after every
// accepted step. Returns false if the step size hit h_min (stiff failure);
// accept_state may veto continuation (e.g. on blow-up caps).
bool integrate_adaptive(
    const std::function<void(double, std::span<const double>, std::span<double>)>& rhs,
    std::vector<double>& y, double t0, double t1, const OdeStepControl& ctrl,
    const std::function<bool(double, std::span<const double>)>& observer);

// Adaptive Simpson quadrature of fn on [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& fn, double a,
                        double b, double tol);

}  // namespace ctflow
