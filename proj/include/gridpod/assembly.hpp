#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridpod/gfor.hpp"
#include "gridpod/network.hpp"
#include "gridpod/sg.hpp"

// Assembly of the complete dynamic model: every network branch is an RL
// current state and every bus a (possibly parasitic) capacitance state, all
// in one synchronously rotating frame, so the closed system is a plain ODE
// x' = f(x, u) with no algebraic loop. Device injections depend on device
// states only; bus voltages follow algebraically from the capacitor states
// and the accumulated injections.
//
// Network states are system pu; device states device pu. The input vector u
// holds the quantities a study may move at run time: one multiplicative
// scale per load and the device references.

namespace gridpod {

struct AssembleOptions {
    // Extra rotation applied to the power flow solution before devices are
    // initialised. The model is invariant to it; useful for frame tests.
    double reference_angle_rad = 0.0;
    PowerFlowOptions pf;
};

class AssembledSystem {
public:
    struct Branch {
        int f = -1, t = -1;
        double r = 0, x = 0, tap = 1;
        int x0 = 0;  // state offset of (i_q, i_d)
    };
    struct Load {
        int bus = -1;
        Complex y0;   // admittance at the solved voltage, system pu
        int u_scale = 0;
    };
    struct SgDev {
        std::string name;
        int bus = -1;
        double s_dev_to_sys = 1.0;  // multiply device-pu power/current by this
        SgDerived d;
        int x0 = 0;
        int u_vref = 0, u_pref = 0;
    };
    struct GforDev {
        std::string name;
        int bus = -1;
        double s_dev_to_sys = 1.0;
        GforDerived d;
        int x0 = 0;
        int u_pref = 0, u_qref = 0, u_vref = 0, u_dp = 0, u_dq = 0;
    };

    SystemSpec spec;
    double omega_b = 0.0;
    int n_bus = 0;
    std::vector<BusShunt> shunts;
    std::vector<Branch> branches;
    std::vector<Load> loads;
    std::vector<SgDev> sgs;
    std::vector<GforDev> gfors;

    int nx = 0, nu = 0;
    Eigen::VectorXd x0, u0;
    PowerFlowSolution pf;
    std::vector<std::string> state_names, input_names, output_names;

    int n_states() const { return nx; }
    int n_inputs() const { return nu; }
    int n_outputs() const { return static_cast<int>(output_names.size()); }

    int state_index(const std::string& name) const {
        for (size_t i = 0; i < state_names.size(); ++i)
            if (state_names[i] == name) return static_cast<int>(i);
        return -1;
    }
    int input_index(const std::string& name) const {
        for (size_t i = 0; i < input_names.size(); ++i)
            if (input_names[i] == name) return static_cast<int>(i);
        return -1;
    }
    int output_index(const std::string& name) const {
        for (size_t i = 0; i < output_names.size(); ++i)
            if (output_names[i] == name) return static_cast<int>(i);
        return -1;
    }

    struct NetworkState {
        std::vector<Complex> inj_dev, inj_br, vbus, i_ext;
        std::vector<Complex> y_static;
    };

    void resize_ws(NetworkState& ws) const {
        ws.inj_dev.assign(n_bus, Complex());
        ws.inj_br.assign(n_bus, Complex());
        ws.vbus.assign(n_bus, Complex());
        ws.i_ext.assign(n_bus, Complex());
        ws.y_static.assign(n_bus, Complex());
    }

    /// Bus voltages and grid-side currents from the current state.
    void compute_network(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         NetworkState& ws) const {
        resize_ws(ws);
        for (const auto& l : loads) ws.y_static[l.bus] += l.y0 * u(l.u_scale);
        for (int b = 0; b < n_bus; ++b) ws.y_static[b] += Complex(shunts[b].g, 0.0);
        for (const auto& br : branches) {
            const Complex i(x(br.x0), x(br.x0 + 1));
            ws.inj_br[br.f] -= i / br.tap;
            ws.inj_br[br.t] += i;
        }
        for (const auto& g : sgs) {
            const auto e = detail::sg_electrical(g.d, std::span<const double>(x.data() + g.x0, g.d.nx));
            const Complex i_dev = to_network_frame(qd(e.iq, e.id), x(g.x0 + g.d.i_delta));
            ws.inj_dev[g.bus] += i_dev * g.s_dev_to_sys;
        }
        for (const auto& g : gfors) {
            const Complex il = qd(x(g.x0 + g.d.i_iq), x(g.x0 + g.d.i_id));
            const Complex i_dev = to_network_frame(il, x(g.x0 + g.d.i_theta));
            ws.inj_dev[g.bus] += i_dev * g.s_dev_to_sys;
        }
        for (int b = 0; b < n_bus; ++b) {
            const Complex vc(x(2 * b), x(2 * b + 1));
            const Complex inj = ws.inj_dev[b] + ws.inj_br[b];
            const double rd = shunts[b].r_damp;
            ws.vbus[b] = (vc + rd * inj) / (1.0 + rd * ws.y_static[b]);
            // Current leaving the bus toward branches and static elements;
            // what a device on this bus measures as its grid-side current.
            ws.i_ext[b] = -ws.inj_br[b] + ws.y_static[b] * ws.vbus[b];
        }
    }

    void derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     Eigen::VectorXd& dx, NetworkState& ws) const {
        dx.resize(nx);
        compute_network(x, u, ws);
        for (int b = 0; b < n_bus; ++b) {
            const Complex vc(x(2 * b), x(2 * b + 1));
            const Complex i_cap = ws.inj_dev[b] + ws.inj_br[b] - ws.y_static[b] * ws.vbus[b];
            const Complex dvc = (i_cap - Complex(0.0, shunts[b].b) * vc) * (omega_b / shunts[b].b);
            dx(2 * b) = dvc.real();
            dx(2 * b + 1) = dvc.imag();
        }
        for (const auto& br : branches) {
            const Complex i(x(br.x0), x(br.x0 + 1));
            const Complex di =
                (ws.vbus[br.f] / br.tap - ws.vbus[br.t] - Complex(br.r, br.x) * i) * (omega_b / br.x);
            dx(br.x0) = di.real();
            dx(br.x0 + 1) = di.imag();
        }
        for (const auto& g : sgs) {
            sg_derivatives(g.d, std::span<const double>(x.data() + g.x0, g.d.nx),
                           ws.vbus[g.bus], u(g.u_vref), u(g.u_pref),
                           std::span<double>(dx.data() + g.x0, g.d.nx));
        }
        for (const auto& g : gfors) {
            GforRefs refs;
            refs.p_ref = u(g.u_pref);
            refs.q_ref = u(g.u_qref);
            refs.v_ref = u(g.u_vref);
            refs.dp_ext = u(g.u_dp);
            refs.dq_ext = u(g.u_dq);
            gfor_derivatives(g.d, std::span<const double>(x.data() + g.x0, g.d.nx),
                             ws.vbus[g.bus], ws.i_ext[g.bus] / g.s_dev_to_sys, refs,
                             std::span<double>(dx.data() + g.x0, g.d.nx));
        }
    }

    void derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     Eigen::VectorXd& dx) const {
        thread_local NetworkState ws;
        derivatives(x, u, dx, ws);
    }

    void outputs(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                 Eigen::VectorXd& y) const {
        thread_local NetworkState ws;
        y.resize(n_outputs());
        compute_network(x, u, ws);
        int k = 0;
        for (const auto& g : sgs) {
            const auto o = sg_outputs(g.d, std::span<const double>(x.data() + g.x0, g.d.nx),
                                      ws.vbus[g.bus]);
            y(k++) = x(g.x0 + g.d.i_omega);
            y(k++) = x(g.x0 + g.d.i_delta);
            y(k++) = o.p;
            y(k++) = o.q;
            y(k++) = o.iq;
            y(k++) = o.id;
            y(k++) = o.efd;
            y(k++) = o.pmech;
            y(k++) = o.vt;
        }
        for (const auto& g : gfors) {
            GforRefs refs;
            refs.p_ref = u(g.u_pref);
            refs.q_ref = u(g.u_qref);
            refs.v_ref = u(g.u_vref);
            refs.dp_ext = u(g.u_dp);
            refs.dq_ext = u(g.u_dq);
            const auto o = gfor_outputs(g.d, std::span<const double>(x.data() + g.x0, g.d.nx),
                                        ws.vbus[g.bus], ws.i_ext[g.bus] / g.s_dev_to_sys, refs);
            y(k++) = o.freq;
            y(k++) = o.p;
            y(k++) = o.q;
            y(k++) = o.theta;
            y(k++) = o.iq;
            y(k++) = o.id;
            y(k++) = o.pod_p_out;
            y(k++) = o.pod_q_out;
        }
        for (int b = 0; b < n_bus; ++b) y(k++) = std::abs(ws.vbus[b]);
        // Active power balance: generation, static consumption, series loss.
        double p_gen = 0, p_load = 0, p_loss = 0;
        for (int b = 0; b < n_bus; ++b) {
            p_gen += (ws.vbus[b] * std::conj(ws.inj_dev[b])).real();
            Complex y_load;
            for (const auto& l : loads)
                if (l.bus == b) y_load += l.y0 * u(l.u_scale);
            p_load += (std::norm(ws.vbus[b]) * std::conj(y_load)).real();
            p_loss += std::norm(ws.vbus[b]) * shunts[b].g;
            const Complex i_cap = ws.inj_dev[b] + ws.inj_br[b] - ws.y_static[b] * ws.vbus[b];
            p_loss += std::norm(i_cap) * shunts[b].r_damp;
        }
        for (const auto& br : branches) {
            const Complex i(x(br.x0), x(br.x0 + 1));
            p_loss += std::norm(i) * br.r;
        }
        y(k++) = p_gen;
        y(k++) = p_load;
        y(k++) = p_loss;
    }

    /// Infinity norm of f(x0, u0); near machine precision by construction.
    double equilibrium_residual() const {
        Eigen::VectorXd dx;
        derivatives(x0, u0, dx);
        return dx.cwiseAbs().maxCoeff();
    }
};

using Model = std::shared_ptr<const AssembledSystem>;

inline Model assemble(const SystemSpec& spec, const AssembleOptions& opt = {}) {
    validate(spec);
    auto sys = std::make_shared<AssembledSystem>();
    AssembledSystem& a = *sys;
    a.spec = spec;
    a.omega_b = spec.base.omega_rad_s();
    a.n_bus = static_cast<int>(spec.buses.size());
    a.shunts = effective_bus_shunts(spec);
    for (int b = 0; b < a.n_bus; ++b)
        if (a.shunts[b].b <= 0.0)
            throw Error("bus '" + spec.buses[b].id +
                        "' has no capacitance; raise options.bus_b_min_pu");

    a.pf = solve_powerflow(spec, opt.pf);
    if (opt.reference_angle_rad != 0.0)
        a.pf.v *= std::polar(1.0, opt.reference_angle_rad);

    // --- state layout: buses, branches, devices -------------------------
    int off = 2 * a.n_bus;
    for (int b = 0; b < a.n_bus; ++b) {
        a.state_names.push_back("bus" + spec.buses[b].id + ".v_q");
        a.state_names.push_back("bus" + spec.buses[b].id + ".v_d");
    }
    for (const auto& brs : spec.branches) {
        AssembledSystem::Branch br;
        br.f = spec.bus_index(brs.from);
        br.t = spec.bus_index(brs.to);
        br.r = brs.r_pu;
        br.x = brs.x_pu;
        br.tap = brs.tap;
        br.x0 = off;
        off += 2;
        a.branches.push_back(br);
        a.state_names.push_back("branch" + brs.from + "-" + brs.to + ".i_q");
        a.state_names.push_back("branch" + brs.from + "-" + brs.to + ".i_d");
    }

    int uoff = 0;
    for (const auto& ls : spec.loads) {
        AssembledSystem::Load l;
        l.bus = spec.bus_index(ls.bus);
        l.u_scale = uoff++;
        a.loads.push_back(l);
        a.input_names.push_back("load_scale." + ls.bus + "#" +
                                std::to_string(a.loads.size() - 1));
    }
    for (const auto& gs : spec.sgs) {
        AssembledSystem::SgDev g;
        g.name = gs.name;
        g.bus = spec.bus_index(gs.bus);
        g.s_dev_to_sys = gs.rating_mva / spec.base.s_mva;
        g.d = sg_derive(gs.machine, gs.exciter, gs.governor, a.omega_b, "sg '" + gs.name + "'");
        g.x0 = off;
        off += g.d.nx;
        g.u_vref = uoff++;
        g.u_pref = uoff++;
        sg_state_names(g.d, gs.name, a.state_names);
        a.input_names.push_back(gs.name + ".v_ref");
        a.input_names.push_back(gs.name + ".p_ref");
        a.sgs.push_back(std::move(g));
    }
    for (const auto& gs : spec.gfors) {
        AssembledSystem::GforDev g;
        g.name = gs.name;
        g.bus = spec.bus_index(gs.bus);
        g.s_dev_to_sys = gs.rating_mva / spec.base.s_mva;
        g.d = gfor_derive(gs.params, gs.pod_p, gs.pod_q, a.omega_b, "gfor '" + gs.name + "'");
        g.x0 = off;
        off += g.d.nx;
        g.u_pref = uoff++;
        g.u_qref = uoff++;
        g.u_vref = uoff++;
        g.u_dp = uoff++;
        g.u_dq = uoff++;
        gfor_state_names(g.d, gs.name, a.state_names);
        a.input_names.push_back(gs.name + ".p_ref");
        a.input_names.push_back(gs.name + ".q_ref");
        a.input_names.push_back(gs.name + ".v_ref");
        a.input_names.push_back(gs.name + ".pod_p_in");
        a.input_names.push_back(gs.name + ".pod_q_in");
        a.gfors.push_back(std::move(g));
    }
    a.nx = off;
    a.nu = uoff;

    for (const auto& g : a.sgs)
        for (const char* s : {".freq_pu", ".delta_rad", ".P_pu", ".Q_pu", ".i_q_pu",
                              ".i_d_pu", ".efd_pu", ".pmech_pu", ".vt_pu"})
            a.output_names.push_back(g.name + s);
    for (const auto& g : a.gfors)
        for (const char* s : {".freq_pu", ".P_pu", ".Q_pu", ".theta_rad", ".i_q_pu",
                              ".i_d_pu", ".pod_p_out_pu", ".pod_q_out_pu"})
            a.output_names.push_back(g.name + s);
    for (int b = 0; b < a.n_bus; ++b)
        a.output_names.push_back("bus" + spec.buses[b].id + ".v_pu");
    a.output_names.push_back("sys.p_gen_pu");
    a.output_names.push_back("sys.p_load_pu");
    a.output_names.push_back("sys.p_loss_pu");

    // --- initial condition ----------------------------------------------
    a.x0 = Eigen::VectorXd::Zero(a.nx);
    a.u0 = Eigen::VectorXd::Ones(a.nu);

    // Load admittances at the solved voltages, so the PQ power flow and the
    // impedance-load dynamic model share one operating point.
    for (size_t i = 0; i < spec.loads.size(); ++i) {
        const auto& ls = spec.loads[i];
        a.loads[i].y0 = load_to_admittance(ls.p_pu, ls.q_pu, a.pf.v(a.loads[i].bus));
        a.u0(a.loads[i].u_scale) = 1.0;
    }

    // Branch currents, then bus capacitor states behind their damping.
    std::vector<Complex> inj_br(a.n_bus);
    for (auto& br : a.branches) {
        const Complex i = (a.pf.v(br.f) / br.tap - a.pf.v(br.t)) / Complex(br.r, br.x);
        a.x0(br.x0) = i.real();
        a.x0(br.x0 + 1) = i.imag();
        inj_br[br.f] -= i / br.tap;
        inj_br[br.t] += i;
    }
    for (int b = 0; b < a.n_bus; ++b) {
        const Complex v = a.pf.v(b);
        const Complex i_cap = a.shunts[b].capacitive_admittance() * v;
        const Complex vc = v - a.shunts[b].r_damp * i_cap;
        a.x0(2 * b) = vc.real();
        a.x0(2 * b + 1) = vc.imag();
    }

    const auto ops = device_operating_points(spec, a.pf);
    size_t op_i = 0;
    for (auto& g : a.sgs) {
        const auto& op = ops[op_i++];
        const Complex s_dev = op.s_sys / g.s_dev_to_sys;
        const auto init = sg_init_from_powerflow(g.d, op.v_bus, s_dev, "sg '" + g.name + "'");
        for (int i = 0; i < g.d.nx; ++i) a.x0(g.x0 + i) = init.x[i];
        a.u0(g.u_vref) = init.v_ref;
        a.u0(g.u_pref) = init.p_ref;
    }
    for (auto& g : a.gfors) {
        const auto& op = ops[op_i++];
        // Exact grid-side current at the device bus from the solved network.
        Complex y_static(a.shunts[g.bus].g, 0.0);
        for (const auto& l : a.loads)
            if (l.bus == g.bus) y_static += l.y0;
        const Complex i_ext_sys = -inj_br[g.bus] + y_static * op.v_bus;
        const Complex i_l_dev = std::conj(op.s_sys / op.v_bus) / g.s_dev_to_sys;
        const auto init = gfor_init(g.d, op.v_bus, i_l_dev, i_ext_sys / g.s_dev_to_sys,
                                    "gfor '" + g.name + "'");
        for (int i = 0; i < g.d.nx; ++i) a.x0(g.x0 + i) = init.x[i];
        a.u0(g.u_pref) = init.refs.p_ref;
        a.u0(g.u_qref) = init.refs.q_ref;
        a.u0(g.u_vref) = init.refs.v_ref;
        a.u0(g.u_dp) = 0.0;
        a.u0(g.u_dq) = 0.0;
    }

    const double res = a.equilibrium_residual();
    if (!std::isfinite(res) || res > 1e-6)
        throw Error("assembled model failed to reach equilibrium (residual " +
                    std::to_string(res) + ")");
    return sys;
}

}  // namespace gridpod
