#include "sparselab/ode.hpp"

#include <algorithm>
#include <string>

namespace sparselab {

namespace {

bool finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

Trajectory integrate_ode(const OdeRhs& rhs, std::vector<double> y0, double t_end, double step) {
    require(step > 0.0 && t_end > 0.0, Errc::ConfigError, "integrate_ode needs step > 0 and t_end > 0");
    require(finite(y0), Errc::NonFiniteState, "initial state not finite");

    const std::size_t dim = y0.size();
    // Fixed grid t_i = i*step, with the last node clamped to t_end so the
    // trajectory always ends exactly there.
    const std::size_t n_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_end / step - 1e-9)));

    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(y0);

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    std::vector<double> y = std::move(y0);
    double t = 0.0;

    for (std::size_t i = 1; i <= n_steps; ++i) {
        const double t_next = (i == n_steps) ? t_end : std::min(static_cast<double>(i) * step, t_end);
        const double h = t_next - t;

        rhs(t, y, k1);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + h * k3[j];
        rhs(t_next, tmp, k4);

        for (std::size_t j = 0; j < dim; ++j)
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        t = t_next;

        if (!finite(y))
            raise(Errc::NonFiniteState, "state diverged at t=" + std::to_string(t));
        traj.times.push_back(t);
        traj.states.push_back(y);
    }
    return traj;
}

}  // namespace sparselab
