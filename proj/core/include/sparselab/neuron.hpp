#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sparselab/matrix.hpp"
#include "sparselab/ode.hpp"
#include "sparselab/rng.hpp"

namespace sparselab {

/// Two-layer model f(x) = a * relu(w.x) with a single hidden neuron.
struct NeuronParams {
    double a = 0.0;
    std::vector<double> w;

    std::size_t dim() const { return w.size(); }
    double w_norm() const { return norm2(w); }
    /// |a^2 - ||w||^2|, zero (to fp accuracy) under balanced init and along
    /// the gradient flow.
    double balance_gap() const { return std::abs(a * a - dot(w, w)); }
};

/// Training set for the single-neuron task: y = relu(x_1) + noise,
/// rows of x drawn from N(0, I/d).
struct DataSet1Neuron {
    DenseMatrix x;
    std::vector<double> y;
    double noise_sigma = 0.0;

    std::size_t n() const { return x.rows; }
    std::size_t d() const { return x.cols; }
};

/// Constants of the univariate flow ODE over the current active sample set.
/// c2_tilde = sign(a) * sign(w) * c2 folds the initial signs into the
/// effective drift term.
struct FlowConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double c2_tilde = 0.0;
    std::vector<std::size_t> active_set;
};

/// Joint sign of (a(0), w1(0)); first letter is a, second is w1.
enum class SignQuadrant { PosPos = 0, PosNeg = 1, NegPos = 2, NegNeg = 3 };

enum class Outcome { Success, Degenerate, WrongSign };

SignQuadrant quadrant_of(double a, double w1);
const char* quadrant_name(SignQuadrant q);
const char* outcome_name(Outcome o);

DataSet1Neuron make_neuron_dataset(std::size_t n, std::size_t d, double noise_sigma, Rng& rng);

/// Balanced init: w ~ N(0, scale^2 I), a = +-||w|| with a uniform sign, so
/// a(0)^2 = sum_i w_i(0)^2 holds to machine precision.
NeuronParams balanced_init(std::size_t d, double scale, Rng& rng);

/// Rescale w to the requested norm and recompute a = sign(a) * norm.
/// Keeps balancedness; used to place initializations inside ranges like
/// 0 < |a| ||w(0)|| <= 2.
void set_weight_norm(NeuronParams& p, double norm);

/// Mean squared error objective 1/(2n) sum (a relu(w.x_i) - y_i)^2.
double neuron_loss(const NeuronParams& p, const DataSet1Neuron& data);

/// Univariate flow constants over the active set {i : w.x_i > 0}.
/// Empty active set yields c1 = c2 = 0 (the flow halts).
FlowConstants flow_constants(const NeuronParams& p, const DataSet1Neuron& data);

/// Solution of the univariate flow w' = -c1 w^3 + c2_tilde w at time t,
/// valid until a sign change of w (which the exact flow never performs).
/// c1 == 0 freezes the flow and returns w0.
double closed_form_w(double t, double w0, double c1, double c2_tilde);

/// Gradient-flow right-hand side for (a, w):
///   w' = -a^2 C1 w + a C2,   a' = -a w^T C1 w + C2^T w,
/// with C1 = 1/n sum_{i in I} x_i x_i^T and C2 = 1/n sum_{i in I} y_i x_i
/// evaluated on the current active set I = {i : w.x_i > 0}.
void multivariate_flow_rhs(double a, std::span<const double> w, const DataSet1Neuron& data,
                           double& da, std::span<double> dw);
void multivariate_flow_rhs(const NeuronParams& p, const DataSet1Neuron& data,
                           double& da, std::span<double> dw);

/// RK4 integration of the flow; state vector layout is [a, w_0 ... w_{d-1}]
/// and the active set is re-evaluated at every stage.
Trajectory simulate_flow(const NeuronParams& p0, const DataSet1Neuron& data, double t_end,
                         double step);

NeuronParams params_from_state(std::span<const double> state);

/// Success requires fitting the target a*w1 = 1 and reaching a loss below
/// success_tol; a negative outer weight with non-vanishing product is the
/// wrong-sign failure; everything else collapsed towards zero.
Outcome classify_outcome(const NeuronParams& final_params, double loss, double success_tol,
                         double product_tol = 0.1);

/// True iff sign(a(t)) never changes over the recorded trajectory
/// (states with a == 0 do not count).
bool check_sign_preservation(const Trajectory& traj);

}  // namespace sparselab
