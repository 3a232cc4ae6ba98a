#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "sparselab/error.hpp"

namespace sparselab {

/// Time series of state vectors; times strictly increasing, one state per time.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;

    std::size_t size() const { return times.size(); }
    const std::vector<double>& front() const { return states.front(); }
    const std::vector<double>& back() const { return states.back(); }
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Classical fixed-step RK4 from t=0 to t_end inclusive; the last step is
/// shortened so the trajectory lands exactly on t_end. Throws NonFiniteState
/// as soon as any state entry stops being finite (divergence / step too big).
Trajectory integrate_ode(const OdeRhs& rhs, std::vector<double> y0, double t_end, double step);

}  // namespace sparselab
