#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridpod/spec.hpp"

// Phasor-domain network layer: admittance assembly, constant-impedance load
// conversion and a polar Newton-Raphson power flow.

namespace gridpod {

/// Aggregate shunt seen at a bus: capacitive susceptance behind a series
/// damping resistance, plus a direct conductance. Every bus of the dynamic
/// model carries one; buses with little physical capacitance get a damped
/// parasitic one so the network remains a pure ODE.
struct BusShunt {
    double b = 0.0;       // susceptance, system pu
    double r_damp = 0.0;  // series resistance of the capacitive path
    double g = 0.0;       // node conductance, system pu

    Complex capacitive_admittance() const {
        if (b == 0.0) return {0.0, 0.0};
        return Complex(0.0, b) / Complex(1.0, b * r_damp);
    }
    Complex total_admittance() const { return capacitive_admittance() + Complex(g, 0.0); }
};

/// Resolve per-bus shunts: declared shunt plus half line charging per
/// incident branch end, floored to the parasitic minimum. Auto damping is
/// 1/(scale*B) unless the bus pins r_damp explicitly.
inline std::vector<BusShunt> effective_bus_shunts(const SystemSpec& spec) {
    const size_t n = spec.buses.size();
    std::vector<BusShunt> sh(n);
    for (size_t i = 0; i < n; ++i) {
        sh[i].b = spec.buses[i].b_shunt_pu;
        sh[i].g = spec.buses[i].g_shunt_pu;
    }
    for (const auto& br : spec.branches) {
        const int f = spec.bus_index(br.from);
        const int t = spec.bus_index(br.to);
        // Charging of a tapped branch: the `from` half sits behind the ideal
        // transformer and scales with 1/tap^2.
        sh[f].b += 0.5 * br.b_pu / (br.tap * br.tap);
        sh[t].b += 0.5 * br.b_pu;
    }
    for (size_t i = 0; i < n; ++i) {
        if (sh[i].b < spec.options.bus_b_min_pu) sh[i].b = spec.options.bus_b_min_pu;
        const double rd = spec.buses[i].r_damp_pu;
        if (rd >= 0.0)
            sh[i].r_damp = rd;
        else if (sh[i].b > 0.0 && spec.options.shunt_damping_scale > 0.0)
            sh[i].r_damp = 1.0 / (spec.options.shunt_damping_scale * sh[i].b);
    }
    return sh;
}

/// Nodal admittance matrix from branches and effective bus shunts.
/// Loads are not included.
inline Eigen::MatrixXcd build_admittance(const SystemSpec& spec) {
    const int n = static_cast<int>(spec.buses.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : spec.branches) {
        const int f = spec.bus_index(br.from);
        const int t = spec.bus_index(br.to);
        const Complex ys = 1.0 / Complex(br.r_pu, br.x_pu);
        const double a = br.tap;
        y(f, f) += ys / (a * a);
        y(t, t) += ys;
        y(f, t) -= ys / a;
        y(t, f) -= ys / a;
    }
    const auto shunts = effective_bus_shunts(spec);
    for (int i = 0; i < n; ++i) y(i, i) += shunts[i].total_admittance();
    return y;
}

/// Constant-impedance equivalent of a PQ load at the given terminal voltage:
/// an admittance that consumes exactly p + jq there, at any voltage angle.
inline Complex load_to_admittance(double p_pu, double q_pu, Complex v) {
    const double v2 = std::norm(v);
    if (v2 <= 0.0) throw Error("load_to_admittance: zero terminal voltage");
    return Complex(p_pu, -q_pu) / v2;
}

class PowerFlowError : public Error {
public:
    PowerFlowError(const std::string& msg, std::vector<double> history)
        : Error(msg), mismatch_history(std::move(history)) {}
    std::vector<double> mismatch_history;
};

struct PowerFlowOptions {
    double tol = 1e-8;  // infinity norm of the power mismatch, system pu
    int max_iter = 50;
};

struct PowerFlowSolution {
    Eigen::VectorXcd v;               // bus voltage phasors, system pu
    std::vector<Complex> s_injection; // net injection per bus (gen - load)
    std::vector<Complex> s_generation;// injection plus nominal PQ load
    int iterations = 0;
    std::vector<double> mismatch_history;

    double vmag(int bus) const { return std::abs(v(bus)); }
    double vang(int bus) const { return std::arg(v(bus)); }
};

/// Polar Newton-Raphson with analytic Jacobian and flat start. Loads are
/// constant PQ here; dynamic studies convert them to impedances at the
/// solved voltage, which reproduces the same operating point.
inline PowerFlowSolution solve_powerflow(const SystemSpec& spec,
                                         const PowerFlowOptions& opt = {}) {
    validate(spec);
    const int n = static_cast<int>(spec.buses.size());
    const Eigen::MatrixXcd y = build_admittance(spec);

    // Scheduled net injections (system pu). Device reactive output is a free
    // variable at PV and slack buses.
    std::vector<double> p_sched(n, 0.0), q_sched(n, 0.0);
    for (const auto& g : spec.sgs) p_sched[spec.bus_index(g.bus)] += g.p_mw / spec.base.s_mva;
    for (const auto& g : spec.gfors) p_sched[spec.bus_index(g.bus)] += g.p_mw / spec.base.s_mva;
    for (const auto& l : spec.loads) {
        p_sched[spec.bus_index(l.bus)] -= l.p_pu;
        q_sched[spec.bus_index(l.bus)] -= l.q_pu;
    }

    int slack = -1;
    std::vector<int> ang_vars, mag_vars;  // bus index per unknown
    for (int i = 0; i < n; ++i) {
        switch (spec.buses[i].kind) {
            case BusKind::Slack: slack = i; break;
            case BusKind::PV: ang_vars.push_back(i); break;
            case BusKind::PQ:
                ang_vars.push_back(i);
                mag_vars.push_back(i);
                break;
        }
    }
    const int na = static_cast<int>(ang_vars.size());
    const int nm = static_cast<int>(mag_vars.size());
    const int nv = na + nm;

    Eigen::VectorXd vm(n), th(n);
    for (int i = 0; i < n; ++i) {
        vm(i) = (spec.buses[i].kind == BusKind::PQ) ? 1.0 : spec.buses[i].v_set_pu;
        th(i) = 0.0;
    }

    std::vector<double> history;
    Eigen::VectorXd p(n), q(n);
    auto compute_pq = [&]() {
        for (int i = 0; i < n; ++i) {
            double pi = 0.0, qi = 0.0;
            for (int k = 0; k < n; ++k) {
                const double gik = y(i, k).real(), bik = y(i, k).imag();
                const double t = th(i) - th(k);
                const double ct = std::cos(t), st = std::sin(t);
                pi += vm(i) * vm(k) * (gik * ct + bik * st);
                qi += vm(i) * vm(k) * (gik * st - bik * ct);
            }
            p(i) = pi;
            q(i) = qi;
        }
    };

    Eigen::VectorXd f(nv);
    Eigen::MatrixXd jac(nv, nv);
    int it = 0;
    for (;; ++it) {
        compute_pq();
        for (int r = 0; r < na; ++r) f(r) = p_sched[ang_vars[r]] - p(ang_vars[r]);
        for (int r = 0; r < nm; ++r) f(na + r) = q_sched[mag_vars[r]] - q(mag_vars[r]);
        const double mis = nv > 0 ? f.cwiseAbs().maxCoeff() : 0.0;
        history.push_back(mis);
        if (mis < opt.tol) break;
        if (it >= opt.max_iter) {
            std::string msg = "power flow did not converge in " + std::to_string(opt.max_iter) +
                              " iterations (last mismatch " + std::to_string(mis) + " pu)";
            throw PowerFlowError(msg, history);
        }

        jac.setZero();
        auto dp_dth = [&](int i, int k) {
            if (i == k) return -q(i) - y(i, i).imag() * vm(i) * vm(i);
            const double t = th(i) - th(k);
            return vm(i) * vm(k) * (y(i, k).real() * std::sin(t) - y(i, k).imag() * std::cos(t));
        };
        auto dp_dv = [&](int i, int k) {
            if (i == k) return p(i) / vm(i) + y(i, i).real() * vm(i);
            const double t = th(i) - th(k);
            return vm(i) * (y(i, k).real() * std::cos(t) + y(i, k).imag() * std::sin(t));
        };
        auto dq_dth = [&](int i, int k) {
            if (i == k) return p(i) - y(i, i).real() * vm(i) * vm(i);
            const double t = th(i) - th(k);
            return -vm(i) * vm(k) * (y(i, k).real() * std::cos(t) + y(i, k).imag() * std::sin(t));
        };
        auto dq_dv = [&](int i, int k) {
            if (i == k) return q(i) / vm(i) - y(i, i).imag() * vm(i);
            const double t = th(i) - th(k);
            return vm(i) * (y(i, k).real() * std::sin(t) - y(i, k).imag() * std::cos(t));
        };
        for (int r = 0; r < na; ++r) {
            for (int c = 0; c < na; ++c) jac(r, c) = dp_dth(ang_vars[r], ang_vars[c]);
            for (int c = 0; c < nm; ++c) jac(r, na + c) = dp_dv(ang_vars[r], mag_vars[c]);
        }
        for (int r = 0; r < nm; ++r) {
            for (int c = 0; c < na; ++c) jac(na + r, c) = dq_dth(mag_vars[r], ang_vars[c]);
            for (int c = 0; c < nm; ++c) jac(na + r, na + c) = dq_dv(mag_vars[r], mag_vars[c]);
        }

        Eigen::VectorXd dx = jac.partialPivLu().solve(f);
        if (!dx.allFinite())
            throw PowerFlowError("power flow Jacobian is singular", history);
        for (int r = 0; r < na; ++r) th(ang_vars[r]) += dx(r);
        for (int r = 0; r < nm; ++r) vm(mag_vars[r]) += dx(na + r);
    }

    PowerFlowSolution sol;
    sol.v.resize(n);
    for (int i = 0; i < n; ++i) sol.v(i) = std::polar(vm(i), th(i));
    // Recompute injections exactly from the final voltages so that downstream
    // initialisation satisfies the nodal equations to machine precision.
    Eigen::VectorXcd inj = sol.v.array() * (y * sol.v).conjugate().array();
    sol.s_injection.assign(n, Complex());
    sol.s_generation.assign(n, Complex());
    for (int i = 0; i < n; ++i) sol.s_injection[i] = inj(i);
    for (int i = 0; i < n; ++i) sol.s_generation[i] = inj(i);
    for (const auto& l : spec.loads)
        sol.s_generation[spec.bus_index(l.bus)] += Complex(l.p_pu, l.q_pu);
    sol.iterations = it;
    sol.mismatch_history = std::move(history);
    (void)slack;
    return sol;
}

/// Per-device steady-state operating point (system pu, generator sign).
/// Scheduled active power is honoured; the bus surplus (slack balancing
/// power and the reactive output) is shared in proportion to device rating.
struct DeviceOperatingPoint {
    Complex s_sys;   // apparent power injected into the bus, system pu
    Complex v_bus;   // bus voltage phasor, system pu
};

inline std::vector<DeviceOperatingPoint> device_operating_points(
    const SystemSpec& spec, const PowerFlowSolution& pf) {
    const int n = static_cast<int>(spec.buses.size());
    std::vector<double> rating_sum(n, 0.0), p_sched_sum(n, 0.0);
    for (const auto& g : spec.sgs) {
        rating_sum[spec.bus_index(g.bus)] += g.rating_mva;
        p_sched_sum[spec.bus_index(g.bus)] += g.p_mw / spec.base.s_mva;
    }
    for (const auto& g : spec.gfors) {
        rating_sum[spec.bus_index(g.bus)] += g.rating_mva;
        p_sched_sum[spec.bus_index(g.bus)] += g.p_mw / spec.base.s_mva;
    }
    std::vector<DeviceOperatingPoint> out;
    auto point = [&](const std::string& bus, double rating_mva, double p_mw) {
        const int b = spec.bus_index(bus);
        const double share = rating_mva / rating_sum[b];
        const double p_extra = (pf.s_generation[b].real() - p_sched_sum[b]) * share;
        DeviceOperatingPoint op;
        op.v_bus = pf.v(b);
        op.s_sys = Complex(p_mw / spec.base.s_mva + p_extra,
                           pf.s_generation[b].imag() * share);
        return op;
    };
    for (const auto& g : spec.sgs) out.push_back(point(g.bus, g.rating_mva, g.p_mw));
    for (const auto& g : spec.gfors) out.push_back(point(g.bus, g.rating_mva, g.p_mw));
    return out;
}

}  // namespace gridpod
