#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gridpod/assembly.hpp"
#include "gridpod/simulate.hpp"

// Small-signal model extraction by central finite differences around the
// assembled equilibrium.

namespace gridpod {

struct LinearizeOptions {
    double rel_step = 1e-6;
    double abs_floor = 1e-9;
};

struct LinearModel {
    Eigen::MatrixXd a, b, c, d;
    Eigen::VectorXd x0, u0, y0;
    std::vector<std::string> state_names, input_names, output_names;

    int state_index(const std::string& name) const {
        for (size_t i = 0; i < state_names.size(); ++i)
            if (state_names[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline LinearModel linearize(const Model& model, const LinearizeOptions& opt = {}) {
    const AssembledSystem& s = *model;
    const int nx = s.nx, nu = s.nu, ny = s.n_outputs();
    LinearModel lm;
    lm.a.resize(nx, nx);
    lm.b.resize(nx, nu);
    lm.c.resize(ny, nx);
    lm.d.resize(ny, nu);
    lm.x0 = s.x0;
    lm.u0 = s.u0;
    lm.state_names = s.state_names;
    lm.input_names = s.input_names;
    lm.output_names = s.output_names;

    AssembledSystem::NetworkState ws;
    Eigen::VectorXd fp(nx), fm(nx), yp(ny), ym(ny);
    Eigen::VectorXd x = s.x0, u = s.u0;

    s.outputs(x, u, lm.y0);

    for (int j = 0; j < nx; ++j) {
        const double h = std::max(opt.abs_floor, opt.rel_step * std::abs(x(j)));
        const double xj = x(j);
        x(j) = xj + h;
        s.derivatives(x, u, fp, ws);
        s.outputs(x, u, yp);
        x(j) = xj - h;
        s.derivatives(x, u, fm, ws);
        s.outputs(x, u, ym);
        x(j) = xj;
        lm.a.col(j) = (fp - fm) / (2.0 * h);
        lm.c.col(j) = (yp - ym) / (2.0 * h);
    }
    for (int j = 0; j < nu; ++j) {
        const double h = std::max(opt.abs_floor, opt.rel_step * std::abs(u(j)));
        const double uj = u(j);
        u(j) = uj + h;
        s.derivatives(x, u, fp, ws);
        s.outputs(x, u, yp);
        u(j) = uj - h;
        s.derivatives(x, u, fm, ws);
        s.outputs(x, u, ym);
        u(j) = uj;
        lm.b.col(j) = (fp - fm) / (2.0 * h);
        lm.d.col(j) = (yp - ym) / (2.0 * h);
    }
    return lm;
}

/// Linear response with the same event semantics as the nonlinear solver,
/// integrated exactly per piece via the matrix exponential of [A B; 0 0].
/// Returns absolute outputs y0 + C dx + D du on the same sampling grid.
inline TimeSeries simulate_linear(const Model& model, const LinearModel& lm,
                                  std::vector<Event> events, const SimOptions& opt = {}) {
    const AssembledSystem& a = *model;
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& l, const Event& r) { return l.t < r.t; });

    const int nx = lm.a.rows(), nu = lm.b.cols();
    const double out_dt = std::max(opt.output_dt, opt.dt);
    const int n_out = static_cast<int>(std::round(opt.t_end / out_dt));

    TimeSeries ts;
    ts.channels = lm.output_names;
    ts.data.resize(n_out + 1, static_cast<int>(lm.output_names.size()));

    // Augmented propagator over one sample interval; rebuilt when u changes
    // mid-grid (events are exact, like the nonlinear path).
    Eigen::MatrixXd aug(nx + nu, nx + nu);
    auto propagator = [&](double h) {
        aug.setZero();
        aug.topLeftCorner(nx, nx) = lm.a * h;
        aug.topRightCorner(nx, nu) = lm.b * h;
        return aug.exp().eval();
    };
    Eigen::MatrixXd prop_full = propagator(out_dt);

    Eigen::VectorXd dx = Eigen::VectorXd::Zero(nx);
    Eigen::VectorXd u = a.u0;
    auto record = [&](int row, double) {
        const Eigen::VectorXd du = u - lm.u0;
        ts.data.row(row) = (lm.y0 + lm.c * dx + lm.d * du).transpose();
    };

    size_t next_ev = 0;
    double t = 0.0;
    while (next_ev < events.size() && events[next_ev].t <= 1e-12)
        apply_event(a, events[next_ev++], u);
    ts.t.push_back(0.0);
    record(0, 0.0);
    for (int k = 1; k <= n_out; ++k) {
        const double t_target = k * out_dt;
        while (true) {
            double t_stop = t_target;
            if (next_ev < events.size() && events[next_ev].t < t_target - 1e-12)
                t_stop = events[next_ev].t;
            const double h = t_stop - t;
            if (h > 1e-15) {
                const Eigen::MatrixXd prop =
                    (std::abs(h - out_dt) < 1e-15) ? prop_full : propagator(h);
                const Eigen::VectorXd du = u - lm.u0;
                dx = prop.topLeftCorner(nx, nx) * dx + prop.topRightCorner(nx, nu) * du;
            }
            t = t_stop;
            if (t >= t_target - 1e-12) break;
            while (next_ev < events.size() && events[next_ev].t <= t + 1e-12)
                apply_event(a, events[next_ev++], u);
        }
        while (next_ev < events.size() && events[next_ev].t <= t + 1e-12)
            apply_event(a, events[next_ev++], u);
        ts.t.push_back(t_target);
        record(k, t_target);
    }
    return ts;
}

}  // namespace gridpod
