#include "ctflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctflow {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
        throw std::invalid_argument("MonotoneCubic: need >= 2 matched knots");
    }
    for (size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw std::invalid_argument("MonotoneCubic: knots not increasing");
        }
    }
    // Fritsch-Carlson slopes
    std::vector<double> delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    slope_.resize(n);
    slope_[0] = delta[0];
    slope_[n - 1] = delta[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            slope_[i] = 0.0;
        } else {
            const double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
            const double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
            slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    for (size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            slope_[i] = 0.0;
            slope_[i + 1] = 0.0;
        } else {
            const double a = slope_[i] / delta[i];
            const double b = slope_[i + 1] / delta[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double tau = 3.0 / std::sqrt(s);
                slope_[i] = tau * a * delta[i];
                slope_[i + 1] = tau * b * delta[i];
            }
        }
    }
}

double MonotoneCubic::operator()(double x) const {
    if (x_.empty()) throw std::logic_error("MonotoneCubic: empty");
    if (x <= x_.front()) x = x_.front();
    if (x >= x_.back()) x = x_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    size_t i = static_cast<size_t>(std::distance(x_.begin(), it));
    i = std::clamp<size_t>(i, 1, x_.size() - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] +
           h11 * h * slope_[i + 1];
}

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

}  // namespace

bool integrate_adaptive(
    const std::function<void(double, std::span<const double>, std::span<double>)>& rhs,
    std::vector<double>& y, double t0, double t1, const OdeStepControl& ctrl,
    const std::function<bool(double, std::span<const double>)>& observer) {
    const size_t n = y.size();
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    double t = t0;
    double h = dir * std::min(ctrl.h_max, std::abs(t1 - t0) / 16.0 + ctrl.h_min);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n),
        ytmp(n), ynew(n);
    rhs(t, y, k1);

    while (dir * (t1 - t) > 0.0) {
        if (dir * (t + h) > dir * t1) h = t1 - t;

        for (size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * kA21 * k1[i];
        rhs(t + h / 5, ytmp, k2);
        for (size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
        rhs(t + 3 * h / 10, ytmp, k3);
        for (size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
        rhs(t + 4 * h / 5, ytmp, k4);
        for (size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] +
                                  kA54 * k4[i]);
        rhs(t + 8 * h / 9, ytmp, k5);
        for (size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] +
                                  kA64 * k4[i] + kA65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] +
                                  kB5 * k5[i] + kB6 * k6[i]);
        rhs(t + h, ynew, k7);

        double err = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] +
                                  kE5 * k5[i] + kE6 * k6[i] + kE7 * k7[i]);
            const double sc = ctrl.abs_tol +
                              ctrl.rel_tol * std::max(std::abs(y[i]),
                                                      std::abs(ynew[i]));
            const double r = e / sc;
            err += r * r;
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (!std::isfinite(err) || err > 1.0) {
            const double shrink = std::isfinite(err)
                                      ? std::max(0.1, 0.9 * std::pow(err, -0.25))
                                      : 0.1;
            h *= shrink;
            if (std::abs(h) < ctrl.h_min) return false;
            continue;
        }

        t += h;
        y = ynew;
        k1 = k7;  // FSAL
        if (!observer(t, y)) return true;

        const double grow =
            (err == 0.0) ? 5.0
                         : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        h *= grow;
        if (std::abs(h) > ctrl.h_max) h = dir * ctrl.h_max;
        if (std::abs(h) < ctrl.h_min) h = dir * ctrl.h_min;
    }
    return true;
}

namespace {

double simpson(const std::function<double(double)>& fn, double a, double fa,
               double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& fn, double a, double fa,
                   double b, double fb, double m, double fm, double whole,
                   double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = simpson(fn, a, fa, m, fm, lm, flm);
    const double right = simpson(fn, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_rec(fn, a, fa, m, fm, lm, flm, left, tol / 2, depth - 1) +
           simpson_rec(fn, m, fm, b, fb, rm, frm, right, tol / 2, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& fn, double a,
                        double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = fn(a), fb = fn(b), fm = fn(m);
    const double whole = simpson(fn, a, fa, b, fb, m, fm);
    return simpson_rec(fn, a, fa, b, fb, m, fm, whole, tol, 50);
}

}  // namespace ctflow
