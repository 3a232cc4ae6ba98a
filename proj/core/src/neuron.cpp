#include "sparselab/neuron.hpp"

#include <algorithm>
#include <cmath>

namespace sparselab {

SignQuadrant quadrant_of(double a, double w1) {
    if (a >= 0.0) return w1 >= 0.0 ? SignQuadrant::PosPos : SignQuadrant::PosNeg;
    return w1 >= 0.0 ? SignQuadrant::NegPos : SignQuadrant::NegNeg;
}

const char* quadrant_name(SignQuadrant q) {
    switch (q) {
        case SignQuadrant::PosPos: return "PosPos";
        case SignQuadrant::PosNeg: return "PosNeg";
        case SignQuadrant::NegPos: return "NegPos";
        case SignQuadrant::NegNeg: return "NegNeg";
    }
    return "?";
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Success: return "Success";
        case Outcome::Degenerate: return "Degenerate";
        case Outcome::WrongSign: return "WrongSign";
    }
    return "?";
}

DataSet1Neuron make_neuron_dataset(std::size_t n, std::size_t d, double noise_sigma, Rng& rng) {
    DataSet1Neuron data;
    data.x = sample_gaussian_inputs(n, d, rng);
    data.y.resize(n);
    data.noise_sigma = noise_sigma;
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = data.x(i, 0);
        data.y[i] = std::max(x1, 0.0);
    }
    if (noise_sigma > 0.0)
        for (std::size_t i = 0; i < n; ++i) data.y[i] += rng.gaussian(0.0, noise_sigma);
    return data;
}

NeuronParams balanced_init(std::size_t d, double scale, Rng& rng) {
    require(d >= 1 && scale > 0.0, Errc::ConfigError, "balanced_init needs d >= 1, scale > 0");
    NeuronParams p;
    p.w.resize(d);
    for (double& wi : p.w) wi = rng.gaussian(0.0, scale);
    p.a = (rng.coin() ? 1.0 : -1.0) * norm2(p.w);
    return p;
}

void set_weight_norm(NeuronParams& p, double norm) {
    const double cur = p.w_norm();
    require(cur > 0.0 && norm > 0.0, Errc::ConfigError, "set_weight_norm needs nonzero norms");
    const double f = norm / cur;
    for (double& wi : p.w) wi *= f;
    p.a = (p.a < 0.0 ? -1.0 : 1.0) * norm2(p.w);
}

double neuron_loss(const NeuronParams& p, const DataSet1Neuron& data) {
    const std::size_t n = data.n();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = dot(data.x.row(i), p.w);
        const double r = p.a * std::max(s, 0.0) - data.y[i];
        sum += r * r;
    }
    return sum / (2.0 * static_cast<double>(n));
}

FlowConstants flow_constants(const NeuronParams& p, const DataSet1Neuron& data) {
    FlowConstants fc;
    const std::size_t n = data.n();
    double sxx = 0.0;
    double syx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = dot(data.x.row(i), p.w);
        if (s > 0.0) {
            fc.active_set.push_back(i);
            if (data.d() == 1) {
                const double x = data.x(i, 0);
                sxx += x * x;
                syx += data.y[i] * x;
            }
        }
    }
    if (data.d() == 1 && !fc.active_set.empty()) {
        fc.c1 = sxx / static_cast<double>(n);
        fc.c2 = syx / static_cast<double>(n);
        const double sa = p.a < 0.0 ? -1.0 : (p.a > 0.0 ? 1.0 : 0.0);
        const double sw = p.w[0] < 0.0 ? -1.0 : (p.w[0] > 0.0 ? 1.0 : 0.0);
        fc.c2_tilde = sa * sw * fc.c2;
    }
    return fc;
}

double closed_form_w(double t, double w0, double c1, double c2_tilde) {
    require(c1 >= 0.0, Errc::ConfigError, "closed_form_w needs c1 >= 0");
    if (c1 == 0.0 || w0 == 0.0) return w0;
    if (c2_tilde == 0.0) return w0 / std::sqrt(2.0 * c1 * w0 * w0 * t + 1.0);

    // w(t)^2 = c2t w0^2 / (c2t e^{-u} + c1 w0^2 (1 - e^{-u})),  u = 2 c2t t.
    // For c2t > 0 this rises/falls monotonically to c2t/c1; for c2t < 0 the
    // denominator grows like e^{|u|} and w decays to zero.
    const double u = 2.0 * c2_tilde * t;
    if (c2_tilde < 0.0 && -u > 700.0) return 0.0;  // e^{-u} overflows; exact limit
    const double em = std::exp(-u);
    const double denom = c2_tilde * em - c1 * w0 * w0 * std::expm1(-u);
    const double w2 = c2_tilde * w0 * w0 / denom;
    return (w0 < 0.0 ? -1.0 : 1.0) * std::sqrt(w2);
}

void multivariate_flow_rhs(double a, std::span<const double> w, const DataSet1Neuron& data,
                           double& da, std::span<double> dw) {
    require(w.size() == data.d() && dw.size() == data.d(), Errc::ShapeMismatch,
            "flow rhs dimension mismatch");
    const std::size_t n = data.n();
    da = 0.0;
    std::fill(dw.begin(), dw.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.x.row(i);
        const double s = dot(xi, w);
        if (s > 0.0) {
            const double r = data.y[i] - a * s;
            da += r * s;
            axpy(r, xi, dw);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    da *= inv_n;
    for (double& v : dw) v *= a * inv_n;
}

void multivariate_flow_rhs(const NeuronParams& p, const DataSet1Neuron& data, double& da,
                           std::span<double> dw) {
    multivariate_flow_rhs(p.a, p.w, data, da, dw);
}

namespace {

/// Univariate sufficient statistics: the active set is {x > 0} when w > 0
/// and {x < 0} when w < 0, so both cases can be summed once up front.
struct UnivariateStats {
    double pos_xx = 0.0, pos_yx = 0.0;
    double neg_xx = 0.0, neg_yx = 0.0;
    double inv_n = 0.0;

    explicit UnivariateStats(const DataSet1Neuron& data) {
        for (std::size_t i = 0; i < data.n(); ++i) {
            const double x = data.x(i, 0);
            if (x > 0.0) {
                pos_xx += x * x;
                pos_yx += data.y[i] * x;
            } else if (x < 0.0) {
                neg_xx += x * x;
                neg_yx += data.y[i] * x;
            }
        }
        inv_n = 1.0 / static_cast<double>(data.n());
    }
};

}  // namespace

Trajectory simulate_flow(const NeuronParams& p0, const DataSet1Neuron& data, double t_end,
                         double step) {
    require(p0.dim() == data.d(), Errc::ShapeMismatch, "params/data dimension mismatch");
    const std::size_t d = data.d();

    std::vector<double> y0(1 + d);
    y0[0] = p0.a;
    std::copy(p0.w.begin(), p0.w.end(), y0.begin() + 1);

    if (d == 1) {
        const UnivariateStats st(data);
        auto rhs = [st](double, std::span<const double> y, std::span<double> dy) {
            const double a = y[0], w = y[1];
            double c1 = 0.0, c2 = 0.0;
            if (w > 0.0) {
                c1 = st.pos_xx * st.inv_n;
                c2 = st.pos_yx * st.inv_n;
            } else if (w < 0.0) {
                c1 = st.neg_xx * st.inv_n;
                c2 = st.neg_yx * st.inv_n;
            }
            dy[0] = -a * w * w * c1 + w * c2;
            dy[1] = -w * a * a * c1 + a * c2;
        };
        return integrate_ode(rhs, std::move(y0), t_end, step);
    }

    auto rhs = [&data, d](double, std::span<const double> y, std::span<double> dy) {
        double da = 0.0;
        multivariate_flow_rhs(y[0], y.subspan(1, d), data, da, dy.subspan(1, d));
        dy[0] = da;
    };
    return integrate_ode(rhs, std::move(y0), t_end, step);
}

NeuronParams params_from_state(std::span<const double> state) {
    NeuronParams p;
    p.a = state[0];
    p.w.assign(state.begin() + 1, state.end());
    return p;
}

Outcome classify_outcome(const NeuronParams& final_params, double loss, double success_tol,
                         double product_tol) {
    require(success_tol > 0.0, Errc::ConfigError, "classify_outcome needs success_tol > 0");
    const double prod = final_params.a * (final_params.dim() > 0 ? final_params.w[0] : 0.0);
    if (loss < success_tol && std::abs(prod - 1.0) < product_tol) return Outcome::Success;
    if (final_params.a < 0.0 && std::abs(prod) > product_tol) return Outcome::WrongSign;
    return Outcome::Degenerate;
}

bool check_sign_preservation(const Trajectory& traj) {
    double ref = 0.0;
    for (const auto& state : traj.states) {
        const double a = state[0];
        if (a == 0.0) continue;
        const double s = a < 0.0 ? -1.0 : 1.0;
        if (ref == 0.0)
            ref = s;
        else if (s != ref)
            return false;
    }
    return true;
}

}  // namespace sparselab
