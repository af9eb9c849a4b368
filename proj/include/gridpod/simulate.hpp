#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridpod/assembly.hpp"

// Time-domain integration of the assembled model with piecewise-constant
// inputs. Events are applied exactly: the integrator lands on each event
// time, mutates the input vector and restarts from the discontinuity.

namespace gridpod {

struct Event {
    enum class Kind { LoadScale, ReferenceStep };
    Kind kind = Kind::LoadScale;
    double t = 0.0;
    std::string bus;         // LoadScale target
    double factor = 1.0;     // multiplies the present load scale
    std::string device;      // ReferenceStep target
    std::string channel;     // p_ref | q_ref | v_ref | pod_p_in | pod_q_in
    double delta = 0.0;      // added to the present reference
};

enum class IntegrationMethod { Rk4, Trapezoidal };

struct SimOptions {
    double dt = 50e-6;
    double t_end = 20.0;
    double output_dt = 1e-3;
    IntegrationMethod method = IntegrationMethod::Rk4;
    int trap_max_iter = 20;
    double trap_tol = 1e-11;
};

struct TimeSeries {
    std::vector<std::string> channels;  // without the leading time column
    std::vector<double> t;
    Eigen::MatrixXd data;               // one row per sample

    int channel_index(const std::string& name) const {
        for (size_t i = 0; i < channels.size(); ++i)
            if (channels[i] == name) return static_cast<int>(i);
        return -1;
    }
    Eigen::VectorXd column(const std::string& name) const {
        const int c = channel_index(name);
        if (c < 0) throw Error("unknown channel '" + name + "'");
        return data.col(c);
    }
};

inline void apply_event(const AssembledSystem& a, const Event& ev, Eigen::VectorXd& u) {
    if (ev.kind == Event::Kind::LoadScale) {
        bool hit = false;
        for (const auto& l : a.loads) {
            if (a.spec.buses[l.bus].id == ev.bus) {
                u(l.u_scale) *= ev.factor;
                hit = true;
            }
        }
        if (!hit) throw Error("event targets bus '" + ev.bus + "' which has no load");
    } else {
        const int idx = a.input_index(ev.device + "." + ev.channel);
        if (idx < 0)
            throw Error("event targets unknown reference '" + ev.device + "." + ev.channel + "'");
        u(idx) += ev.delta;
    }
}

namespace detail {

class Stepper {
public:
    Stepper(const AssembledSystem& a, IntegrationMethod method, const SimOptions& opt)
        : a_(a), method_(method), opt_(opt) {
        k1_.resize(a.nx);
        k2_.resize(a.nx);
        k3_.resize(a.nx);
        k4_.resize(a.nx);
        xt_.resize(a.nx);
    }

    /// Jacobian-dependent data for the implicit method; refreshed after
    /// every discontinuity.
    void prepare(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt) {
        if (method_ != IntegrationMethod::Trapezoidal) return;
        const int n = a_.nx;
        Eigen::MatrixXd jac(n, n);
        Eigen::VectorXd fp(n), fm(n), xp = x;
        for (int j = 0; j < n; ++j) {
            const double h = std::max(1e-9, 1e-6 * std::abs(x(j)));
            xp(j) = x(j) + h;
            a_.derivatives(xp, u, fp, ws_);
            xp(j) = x(j) - h;
            a_.derivatives(xp, u, fm, ws_);
            xp(j) = x(j);
            jac.col(j) = (fp - fm) / (2.0 * h);
        }
        trap_lu_.compute(Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * jac);
        trap_dt_ = dt;
    }

    void step(Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt) {
        if (method_ == IntegrationMethod::Rk4) {
            a_.derivatives(x, u, k1_, ws_);
            xt_ = x + 0.5 * dt * k1_;
            a_.derivatives(xt_, u, k2_, ws_);
            xt_ = x + 0.5 * dt * k2_;
            a_.derivatives(xt_, u, k3_, ws_);
            xt_ = x + dt * k3_;
            a_.derivatives(xt_, u, k4_, ws_);
            x += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
        } else {
            if (trap_dt_ != dt) prepare(x, u, dt);
            a_.derivatives(x, u, k1_, ws_);
            Eigen::VectorXd xn = x + dt * k1_;  // explicit predictor
            for (int it = 0; it < opt_.trap_max_iter; ++it) {
                a_.derivatives(xn, u, k2_, ws_);
                xt_ = xn - x - 0.5 * dt * (k1_ + k2_);
                const Eigen::VectorXd dxn = trap_lu_.solve(xt_);
                xn -= dxn;
                if (dxn.cwiseAbs().maxCoeff() < opt_.trap_tol) break;
            }
            x = xn;
        }
    }

private:
    const AssembledSystem& a_;
    IntegrationMethod method_;
    SimOptions opt_;
    AssembledSystem::NetworkState ws_;
    Eigen::VectorXd k1_, k2_, k3_, k4_, xt_;
    Eigen::PartialPivLU<Eigen::MatrixXd> trap_lu_;
    double trap_dt_ = -1.0;
};

}  // namespace detail

inline TimeSeries simulate(const Model& model, std::vector<Event> events,
                           const SimOptions& opt = {}) {
    const AssembledSystem& a = *model;
    if (opt.dt <= 0 || opt.t_end <= 0) throw Error("simulate: dt and t_end must be positive");
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& l, const Event& r) { return l.t < r.t; });
    for (const auto& ev : events)
        if (ev.t < 0 || ev.t > opt.t_end) throw Error("simulate: event time outside [0, t_end]");

    Eigen::VectorXd x = a.x0, u = a.u0, y;
    detail::Stepper stepper(a, opt.method, opt);
    stepper.prepare(x, u, opt.dt);

    const double out_dt = std::max(opt.output_dt, opt.dt);
    const int n_out = static_cast<int>(std::round(opt.t_end / out_dt));
    TimeSeries ts;
    ts.channels = a.output_names;
    ts.t.reserve(n_out + 1);
    ts.data.resize(n_out + 1, a.n_outputs());

    size_t next_ev = 0;
    auto apply_due_events = [&](double t_now) {
        bool any = false;
        while (next_ev < events.size() && events[next_ev].t <= t_now + 1e-12) {
            apply_event(a, events[next_ev], u);
            ++next_ev;
            any = true;
        }
        if (any) stepper.prepare(x, u, opt.dt);
    };

    auto record = [&](double t_now) {
        a.outputs(x, u, y);
        ts.t.push_back(t_now);
        ts.data.row(static_cast<int>(ts.t.size()) - 1) = y.transpose();
    };

    double t = 0.0;
    apply_due_events(0.0);
    record(0.0);
    const char* worst_name = nullptr;
    for (int k = 1; k <= n_out; ++k) {
        const double t_target = k * out_dt;
        while (t < t_target - 1e-12) {
            // Stop exactly at the next event or the sample boundary.
            double t_stop = t_target;
            if (next_ev < events.size()) t_stop = std::min(t_stop, events[next_ev].t);
            const double h = std::min(opt.dt, t_stop - t);
            stepper.step(x, u, h);
            t += h;
            if (std::abs(t - t_stop) < 1e-12) t = t_stop;
            if (!x.allFinite()) {
                for (int i = 0; i < a.nx; ++i)
                    if (!std::isfinite(x(i))) { worst_name = a.state_names[i].c_str(); break; }
                throw Error("simulation diverged at t = " + std::to_string(t) + " s (state " +
                            (worst_name ? worst_name : "?") + " is not finite)");
            }
            apply_due_events(t);
        }
        t = t_target;
        record(t);
    }
    return ts;
}

}  // namespace gridpod
