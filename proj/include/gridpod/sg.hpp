#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridpod/spec.hpp"

// Synchronous generator: flux-linkage machine model (field winding, one
// d-axis and two q-axis damper windings), static exciter with a lead/lag
// regulator, and a steam-turbine governor with a tapped reheat chain.
//
// The unit transformer is merged in series with the stator (same current,
// leakage and resistance add), so the device terminal is the grid-side bus.
// All quantities are per unit on the device rating; time in seconds. The
// stator current is positive out of the machine.

namespace gridpod {

struct SgDerived {
    SgMachineParams m;
    Ac4aParams exc;
    Ieeeg1Params gov;
    double omega_b = 0.0;

    double rs_t = 0.0, xl_t = 0.0;  // stator + transformer
    double xmd = 0.0, xmq = 0.0;
    double xd_t = 0.0, xq_t = 0.0;
    double xlf = 0.0, rfd = 0.0, xlkd = 0.0, rkd = 0.0;
    double xlkq1 = 0.0, rkq1 = 0.0, xlkq2 = 0.0, rkq2 = 0.0;
    Eigen::Matrix3d d_flux_to_cur;  // [psi_d, psi_f, psi_kd] -> [i_d, i_f, i_kd]
    Eigen::Matrix3d q_flux_to_cur;  // [psi_q, psi_kq1, psi_kq2] -> [i_q, i_kq1, i_kq2]

    bool gov_has_ll = false;
    struct GovStage { double t; double k_tap; bool has_state; };
    std::vector<GovStage> gov_stages;
    double gov_k_total = 0.0;

    int nx = 0;
    // state offsets
    int i_psi_q = 0, i_psi_d = 1, i_psi_f = 2, i_psi_kd = 3, i_psi_kq1 = 4,
        i_psi_kq2 = 5, i_delta = 6, i_omega = 7, i_exc_ll = 8, i_exc_vr = 9;
    int i_gov_ll = -1, i_gate = -1;
    std::vector<int> i_stage;  // offset per stage with a state, -1 otherwise
};

inline SgDerived sg_derive(const SgMachineParams& m, const Ac4aParams& exc,
                           const Ieeeg1Params& gov, double omega_b,
                           const std::string& ctx = "sg") {
    SgDerived d;
    d.m = m;
    d.exc = exc;
    d.gov = gov;
    d.omega_b = omega_b;
    d.rs_t = m.rs + m.r_tr;
    d.xl_t = m.xl + m.x_tr;
    d.xmd = m.xd - m.xl;
    d.xmq = m.xq - m.xl;
    d.xd_t = d.xl_t + d.xmd;
    d.xq_t = d.xl_t + d.xmq;

    // Rotor leakages and resistances from the standard transient and
    // subtransient data, referred to the stator.
    auto branch_leakage = [&](double x_from_transient, double x_l, double x_m,
                              const char* axis) {
        const double num = x_m * (x_from_transient - x_l);
        const double den = x_m - (x_from_transient - x_l);
        if (den <= 0) throw Error(ctx + std::string(": inconsistent ") + axis + "-axis reactances");
        return num / den;
    };
    d.xlf = branch_leakage(m.xdp, m.xl, d.xmd, "d");
    d.rfd = (d.xmd + d.xlf) / (omega_b * m.td0p);
    {
        const double den = 1.0 / (m.xdpp - m.xl) - 1.0 / d.xmd - 1.0 / d.xlf;
        if (den <= 0) throw Error(ctx + ": inconsistent d-axis subtransient reactance");
        d.xlkd = 1.0 / den;
        const double xpar = 1.0 / (1.0 / d.xmd + 1.0 / d.xlf);
        d.rkd = (d.xlkd + xpar) / (omega_b * m.td0pp);
    }
    d.xlkq1 = branch_leakage(m.xqp, m.xl, d.xmq, "q");
    d.rkq1 = (d.xmq + d.xlkq1) / (omega_b * m.tq0p);
    {
        const double den = 1.0 / (m.xqpp - m.xl) - 1.0 / d.xmq - 1.0 / d.xlkq1;
        if (den <= 0) throw Error(ctx + ": inconsistent q-axis subtransient reactance");
        d.xlkq2 = 1.0 / den;
        const double xpar = 1.0 / (1.0 / d.xmq + 1.0 / d.xlkq1);
        d.rkq2 = (d.xlkq2 + xpar) / (omega_b * m.tq0pp);
    }

    Eigen::Matrix3d md, mq;
    md << -d.xd_t, d.xmd, d.xmd,
          -d.xmd, d.xlf + d.xmd, d.xmd,
          -d.xmd, d.xmd, d.xlkd + d.xmd;
    mq << -d.xq_t, d.xmq, d.xmq,
          -d.xmq, d.xlkq1 + d.xmq, d.xmq,
          -d.xmq, d.xmq, d.xlkq2 + d.xmq;
    d.d_flux_to_cur = md.inverse();
    d.q_flux_to_cur = mq.inverse();

    if (gov.t1 == 0.0 && gov.t2 != 0.0)
        throw Error(ctx + ": governor lead/lag with t1 = 0 and t2 > 0 is improper");
    d.gov_has_ll = gov.t1 > 0.0;
    const double taps[4][2] = {{gov.k1, gov.k2}, {gov.k3, gov.k4},
                               {gov.k5, gov.k6}, {gov.k7, gov.k8}};
    const double ts[4] = {gov.t4, gov.t5, gov.t6, gov.t7};
    for (int i = 0; i < 4; ++i) {
        SgDerived::GovStage st;
        st.t = ts[i];
        st.k_tap = taps[i][0] + taps[i][1];
        st.has_state = st.t > 0.0;
        d.gov_stages.push_back(st);
        d.gov_k_total += st.k_tap;
    }
    if (d.gov_k_total <= 0.0) throw Error(ctx + ": governor tap gains sum to zero");

    int off = 10;
    if (d.gov_has_ll) d.i_gov_ll = off++;
    d.i_gate = off++;
    for (auto& st : d.gov_stages) d.i_stage.push_back(st.has_state ? off++ : -1);
    d.nx = off;
    return d;
}

inline void sg_state_names(const SgDerived& d, const std::string& prefix,
                           std::vector<std::string>& out) {
    out.push_back(prefix + ".psi_q");
    out.push_back(prefix + ".psi_d");
    out.push_back(prefix + ".psi_f");
    out.push_back(prefix + ".psi_kd");
    out.push_back(prefix + ".psi_kq1");
    out.push_back(prefix + ".psi_kq2");
    out.push_back(prefix + ".delta");
    out.push_back(prefix + ".omega");
    out.push_back(prefix + ".exc_ll");
    out.push_back(prefix + ".exc_vr");
    if (d.gov_has_ll) out.push_back(prefix + ".gov_ll");
    out.push_back(prefix + ".gov_gate");
    static const char* stage_names[4] = {".gov_st1", ".gov_st2", ".gov_st3", ".gov_st4"};
    for (size_t i = 0; i < d.gov_stages.size(); ++i)
        if (d.gov_stages[i].has_state) out.push_back(prefix + stage_names[i]);
}

namespace detail {

struct SgElectrical {
    double iq, id;      // stator current, out of the machine
    double ifd, ikd, ikq1, ikq2;
    double te;          // electrical torque output
};

inline SgElectrical sg_electrical(const SgDerived& d, std::span<const double> x) {
    SgElectrical e;
    Eigen::Vector3d fq(x[d.i_psi_q], x[d.i_psi_kq1], x[d.i_psi_kq2]);
    Eigen::Vector3d fd(x[d.i_psi_d], x[d.i_psi_f], x[d.i_psi_kd]);
    Eigen::Vector3d iq3 = d.q_flux_to_cur * fq;
    Eigen::Vector3d id3 = d.d_flux_to_cur * fd;
    e.iq = iq3(0);
    e.ikq1 = iq3(1);
    e.ikq2 = iq3(2);
    e.id = id3(0);
    e.ifd = id3(1);
    e.ikd = id3(2);
    e.te = x[d.i_psi_d] * e.iq - x[d.i_psi_q] * e.id;
    return e;
}

inline double sg_pmech(const SgDerived& d, std::span<const double> x) {
    double in = x[d.i_gate];
    double pm = 0.0;
    for (size_t i = 0; i < d.gov_stages.size(); ++i) {
        const auto& st = d.gov_stages[i];
        const double out = st.has_state ? x[d.i_stage[i]] : in;
        pm += st.k_tap * out;
        in = out;
    }
    return pm;
}

}  // namespace detail

/// Evaluate the state derivatives. `v_bus` is the terminal bus voltage in
/// device pu in the network synchronous frame. Returns the injected current
/// (device pu, network frame).
inline Complex sg_derivatives(const SgDerived& d, std::span<const double> x,
                              Complex v_bus, double v_ref, double p_ref,
                              std::span<double> dx) {
    const double delta = x[d.i_delta];
    const double omega = x[d.i_omega];
    const Complex v_loc = to_device_frame(v_bus, delta);
    const double vq = q_of(v_loc), vd = d_of(v_loc);

    const auto e = detail::sg_electrical(d, x);

    dx[d.i_psi_q] = d.omega_b * (vq + d.rs_t * e.iq - omega * x[d.i_psi_d]);
    dx[d.i_psi_d] = d.omega_b * (vd + d.rs_t * e.id + omega * x[d.i_psi_q]);

    const double efd = clamp(x[d.i_exc_vr], d.exc.vr_min, d.exc.vr_max);
    const double vfd = d.rfd * efd / d.xmd;
    dx[d.i_psi_f] = d.omega_b * (vfd - d.rfd * e.ifd);
    dx[d.i_psi_kd] = -d.omega_b * d.rkd * e.ikd;
    dx[d.i_psi_kq1] = -d.omega_b * d.rkq1 * e.ikq1;
    dx[d.i_psi_kq2] = -d.omega_b * d.rkq2 * e.ikq2;

    // Exciter: lead/lag on the voltage error, first-order regulator, ceiling.
    const double verr = v_ref - std::abs(v_bus);
    const double tc_tb = d.exc.tc / d.exc.tb;
    dx[d.i_exc_ll] = (verr - x[d.i_exc_ll]) / d.exc.tb;
    const double y_ll = tc_tb * verr + (1.0 - tc_tb) * x[d.i_exc_ll];
    dx[d.i_exc_vr] = (d.exc.ka * y_ll - x[d.i_exc_vr]) / d.exc.ta;

    // Governor: droop on speed deviation, gate servo, tapped turbine stages.
    const double dw = omega - 1.0;
    double dw_f = dw;
    if (d.gov_has_ll) {
        dx[d.i_gov_ll] = (dw - x[d.i_gov_ll]) / d.gov.t1;
        const double a = d.gov.t2 / d.gov.t1;
        dw_f = a * dw + (1.0 - a) * x[d.i_gov_ll];
    }
    const double gv_cmd = p_ref - dw_f / d.gov.r;
    dx[d.i_gate] = (gv_cmd - x[d.i_gate]) / d.gov.t3;
    {
        double in = x[d.i_gate];
        for (size_t i = 0; i < d.gov_stages.size(); ++i) {
            const auto& st = d.gov_stages[i];
            if (st.has_state) {
                dx[d.i_stage[i]] = (in - x[d.i_stage[i]]) / st.t;
                in = x[d.i_stage[i]];
            }
        }
    }

    const double pmech = detail::sg_pmech(d, x);
    const double tm = pmech / omega;
    dx[d.i_delta] = d.omega_b * (omega - 1.0);
    dx[d.i_omega] = (tm - e.te - d.m.d_pu * dw) / (2.0 * d.m.h_s);

    return to_network_frame(qd(e.iq, e.id), delta);
}

struct SgInit {
    std::vector<double> x;
    double v_ref = 0.0;
    double p_ref = 0.0;
};

/// Exact equilibrium from a solved operating point: terminal voltage phasor
/// and generated power, both in device pu.
inline SgInit sg_init_from_powerflow(const SgDerived& d, Complex v_bus, Complex s_dev,
                                     const std::string& ctx = "sg") {
    if (std::abs(s_dev) > 1.0 + 1e-9)
        throw Error(ctx + ": operating point exceeds the device rating (|S| = " +
                    std::to_string(std::abs(s_dev)) + " pu)");
    const Complex i_net = std::conj(s_dev / v_bus);
    const double delta = std::arg(v_bus + Complex(d.rs_t, d.xq_t) * i_net);
    const Complex v_loc = to_device_frame(v_bus, delta);
    const Complex i_loc = to_device_frame(i_net, delta);
    const double vq = q_of(v_loc), vd = d_of(v_loc);
    const double iq = q_of(i_loc), id = d_of(i_loc);

    const double psi_d = vq + d.rs_t * iq;
    const double psi_q = -(vd + d.rs_t * id);
    const double ifd = (psi_d + d.xd_t * id) / d.xmd;
    const double efd = d.xmd * ifd;
    if (efd > d.exc.vr_max || efd < d.exc.vr_min)
        throw Error(ctx + ": infeasible operating point, required field voltage " +
                    std::to_string(efd) + " pu is outside the exciter ceiling");

    SgInit r;
    r.x.assign(d.nx, 0.0);
    r.x[d.i_psi_q] = psi_q;
    r.x[d.i_psi_d] = psi_d;
    r.x[d.i_psi_f] = -d.xmd * id + (d.xlf + d.xmd) * ifd;
    r.x[d.i_psi_kd] = -d.xmd * id + d.xmd * ifd;
    r.x[d.i_psi_kq1] = -d.xmq * iq;
    r.x[d.i_psi_kq2] = -d.xmq * iq;
    r.x[d.i_delta] = delta;
    r.x[d.i_omega] = 1.0;

    r.x[d.i_exc_vr] = efd;
    r.x[d.i_exc_ll] = efd / d.exc.ka;
    r.v_ref = std::abs(v_bus) + efd / d.exc.ka;

    const double te = psi_d * iq - psi_q * id;
    const double gate = te / d.gov_k_total;  // pmech = te at omega = 1
    if (d.gov_has_ll) r.x[d.i_gov_ll] = 0.0;
    r.x[d.i_gate] = gate;
    for (size_t i = 0; i < d.gov_stages.size(); ++i)
        if (d.gov_stages[i].has_state) r.x[d.i_stage[i]] = gate;
    r.p_ref = gate;
    return r;
}

struct SgOutputs {
    double p, q;          // device pu, generator sign
    double iq, id;        // stator current components, machine frame
    double efd, pmech;
    double vt;            // terminal bus voltage magnitude
};

inline SgOutputs sg_outputs(const SgDerived& d, std::span<const double> x, Complex v_bus) {
    const auto e = detail::sg_electrical(d, x);
    const Complex i_net = to_network_frame(qd(e.iq, e.id), x[d.i_delta]);
    const Complex s = v_bus * std::conj(i_net);
    SgOutputs o;
    o.p = s.real();
    o.q = s.imag();
    o.iq = e.iq;
    o.id = e.id;
    o.efd = clamp(x[d.i_exc_vr], d.exc.vr_min, d.exc.vr_max);
    o.pmech = detail::sg_pmech(d, x);
    o.vt = std::abs(v_bus);
    return o;
}

}  // namespace gridpod
