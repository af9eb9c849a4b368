#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridpod/pod.hpp"
#include "gridpod/spec.hpp"

// Grid-forming converter, averaged model in its own rotating frame:
//  * frequency droop on filtered active power sets the frame speed,
//  * voltage droop on filtered reactive power sets the AC voltage reference,
//  * cascaded voltage and current PI loops with measurement feed-forward and
//    reactance decoupling drive an RL output filter,
//  * optional damping controllers modulate the active and reactive power
//    references; their input is the frequency deviation of the converter.
//    The active channel enters inverted (high frequency backs the power
//    off, the way primary frequency response does); the reactive channel
//    raises the voltage reference so that voltage-sensitive consumption
//    brakes the swing.
//
// The filter capacitor lives on the network side (the device bus carries it
// as a shunt), so the converter state is the RL filter current plus the
// controller states. Per unit on the device rating, time in seconds.
// Converter current is positive toward the bus.

namespace gridpod {

struct GforDerived {
    GforParams p;
    double omega_b = 0.0;
    double kp_cc = 0.0, ki_cc = 0.0;   // current loop PI
    double kp_v = 0.0, ki_v = 0.0;     // voltage loop PI
    std::optional<PodRealization> pod_p, pod_q;

    int nx = 0;
    int i_iq = 0, i_id = 1, i_cc_q = 2, i_cc_d = 3, i_vac_q = 4, i_vac_d = 5,
        i_vff_q = 6, i_vff_d = 7, i_iff_q = 8, i_iff_d = 9, i_pf = 10, i_qf = 11,
        i_theta = 12;
    int i_pod_p = -1, i_pod_q = -1;
};

inline GforDerived gfor_derive(const GforParams& p,
                               const std::optional<PodParams>& pod_p,
                               const std::optional<PodParams>& pod_q,
                               double omega_b, const std::string& ctx = "gfor") {
    GforDerived d;
    d.p = p;
    d.omega_b = omega_b;
    const double l_c = p.x_c / omega_b;  // pu-seconds
    const double c_c = p.b_c / omega_b;
    d.kp_cc = l_c / p.tau_cc;
    d.ki_cc = p.r_c / p.tau_cc;
    const double omega_n = 4.0 / (p.tau_vac * p.xi_vac);
    d.kp_v = 2.0 * p.xi_vac * omega_n * c_c * (p.kp_vac_x100 ? 100.0 : 1.0);
    d.ki_v = omega_n * omega_n * c_c;

    int off = 13;
    if (pod_p) {
        d.pod_p = make_pod(*pod_p, ctx + " pod_p", -1.0);
        d.i_pod_p = off;
        off += pod_state_count(*d.pod_p);
    }
    if (pod_q) {
        d.pod_q = make_pod(*pod_q, ctx + " pod_q", +1.0);
        d.i_pod_q = off;
        off += pod_state_count(*d.pod_q);
    }
    d.nx = off;
    return d;
}

inline void gfor_state_names(const GforDerived& d, const std::string& prefix,
                             std::vector<std::string>& out) {
    const char* base[] = {".i_q", ".i_d", ".cc_int_q", ".cc_int_d", ".vac_int_q",
                          ".vac_int_d", ".vff_q", ".vff_d", ".iff_q", ".iff_d",
                          ".p_filt", ".q_filt", ".theta"};
    for (const char* n : base) out.push_back(prefix + n);
    if (d.pod_p) pod_state_names(*d.pod_p, prefix + ".pod_p", out);
    if (d.pod_q) pod_state_names(*d.pod_q, prefix + ".pod_q", out);
}

struct GforRefs {
    double p_ref = 0.0;   // active power setpoint, device pu
    double q_ref = 0.0;
    double v_ref = 1.0;   // AC voltage droop origin
    double dp_ext = 0.0;  // exogenous additions at the damping summing points
    double dq_ext = 0.0;
};

/// Evaluate the state derivatives. `v_bus` is the device bus voltage in
/// device pu (network frame); `i_ext` is the current flowing from the bus
/// into the rest of the network (grid side of the filter capacitor), device
/// pu, used by the power measurements. Returns the injected filter current
/// in the network frame.
inline Complex gfor_derivatives(const GforDerived& d, std::span<const double> x,
                                Complex v_bus, Complex i_ext, const GforRefs& refs,
                                std::span<double> dx) {
    const double theta = x[d.i_theta];

    double dp_pod = refs.dp_ext, dq_pod = refs.dq_ext;
    if (d.pod_p) dp_pod += pod_output(*d.pod_p, x.subspan(d.i_pod_p));
    if (d.pod_q) dq_pod += pod_output(*d.pod_q, x.subspan(d.i_pod_q));

    const double omega = 1.0 + d.p.r_f * (refs.p_ref + dp_pod - x[d.i_pf]);
    const double vref_mag = refs.v_ref + d.p.r_v * (refs.q_ref + dq_pod - x[d.i_qf]);
    const double dw = omega - 1.0;

    const Complex v_loc = to_device_frame(v_bus, theta);
    const Complex ig_loc = to_device_frame(i_ext, theta);
    const Complex il_loc = qd(x[d.i_iq], x[d.i_id]);

    const Complex s_meas = v_loc * std::conj(ig_loc);
    dx[d.i_pf] = (s_meas.real() - x[d.i_pf]) / d.p.tau_p;
    dx[d.i_qf] = (s_meas.imag() - x[d.i_qf]) / d.p.tau_q;

    const Complex vff = qd(x[d.i_vff_q], x[d.i_vff_d]);
    const Complex iff = qd(x[d.i_iff_q], x[d.i_iff_d]);
    const Complex dvff = (v_loc - vff) / d.p.tau_ff;
    const Complex diff = (ig_loc - iff) / d.p.tau_ff;
    dx[d.i_vff_q] = q_of(dvff);
    dx[d.i_vff_d] = d_of(dvff);
    dx[d.i_iff_q] = q_of(diff);
    dx[d.i_iff_d] = d_of(diff);

    // Voltage loop: PI on the voltage error plus grid current and capacitor
    // current feed-forward, clamped per axis.
    const Complex verr = qd(vref_mag, 0.0) - v_loc;
    const Complex zeta_v = qd(x[d.i_vac_q], x[d.i_vac_d]);
    Complex i_ref = d.kp_v * verr + zeta_v + iff + Complex(0.0, omega * d.p.b_c) * vff;
    dx[d.i_vac_q] = q_of(d.ki_v * verr);
    dx[d.i_vac_d] = d_of(d.ki_v * verr);
    i_ref = qd(clamp(q_of(i_ref), -d.p.i_max, d.p.i_max),
               clamp(d_of(i_ref), -d.p.i_max, d.p.i_max));

    // Current loop: PI plus voltage feed-forward and reactance decoupling.
    const Complex ierr = i_ref - il_loc;
    const Complex zeta_c = qd(x[d.i_cc_q], x[d.i_cc_d]);
    const Complex vcmd =
        d.kp_cc * ierr + zeta_c + vff + Complex(0.0, omega * d.p.x_c) * il_loc;
    dx[d.i_cc_q] = q_of(d.ki_cc * ierr);
    dx[d.i_cc_d] = d_of(d.ki_cc * ierr);

    const Complex dil =
        (vcmd - v_loc - Complex(d.p.r_c, omega * d.p.x_c) * il_loc) * (d.omega_b / d.p.x_c);
    dx[d.i_iq] = q_of(dil);
    dx[d.i_id] = d_of(dil);

    dx[d.i_theta] = d.omega_b * (omega - 1.0);

    if (d.pod_p) pod_derivatives(*d.pod_p, x.subspan(d.i_pod_p), dw, dx.subspan(d.i_pod_p));
    if (d.pod_q) pod_derivatives(*d.pod_q, x.subspan(d.i_pod_q), dw, dx.subspan(d.i_pod_q));

    return to_network_frame(il_loc, theta);
}

struct GforInit {
    std::vector<double> x;
    GforRefs refs;
};

/// Exact equilibrium from the solved terminal conditions: bus voltage,
/// filter inductor current and grid-side current, all device pu in the
/// network frame.
inline GforInit gfor_init(const GforDerived& d, Complex v_bus, Complex i_l,
                          Complex i_ext, const std::string& ctx = "gfor") {
    const double theta = std::arg(v_bus);
    const Complex v_loc = to_device_frame(v_bus, theta);
    const Complex il_loc = to_device_frame(i_l, theta);
    const Complex ig_loc = to_device_frame(i_ext, theta);

    if (std::abs(q_of(il_loc)) > d.p.i_max)
        throw Error(ctx + ": operating point exceeds the q-axis current limit (|i_q| = " +
                    std::to_string(std::abs(q_of(il_loc))) + " > " + std::to_string(d.p.i_max) + ")");
    if (std::abs(d_of(il_loc)) > d.p.i_max)
        throw Error(ctx + ": operating point exceeds the d-axis current limit (|i_d| = " +
                    std::to_string(std::abs(d_of(il_loc))) + " > " + std::to_string(d.p.i_max) + ")");

    GforInit r;
    r.x.assign(d.nx, 0.0);
    r.x[d.i_iq] = q_of(il_loc);
    r.x[d.i_id] = d_of(il_loc);
    r.x[d.i_theta] = theta;
    r.x[d.i_vff_q] = q_of(v_loc);
    r.x[d.i_vff_d] = d_of(v_loc);
    r.x[d.i_iff_q] = q_of(ig_loc);
    r.x[d.i_iff_d] = d_of(ig_loc);

    const Complex s_meas = v_loc * std::conj(ig_loc);
    r.x[d.i_pf] = s_meas.real();
    r.x[d.i_qf] = s_meas.imag();

    // Integrators absorb the residuals of their feed-forward terms so every
    // derivative is exactly zero at t = 0.
    const Complex zeta_v = il_loc - ig_loc - Complex(0.0, d.p.b_c) * v_loc;
    r.x[d.i_vac_q] = q_of(zeta_v);
    r.x[d.i_vac_d] = d_of(zeta_v);
    const Complex vcmd = v_loc + Complex(d.p.r_c, d.p.x_c) * il_loc;
    const Complex zeta_c = vcmd - v_loc - Complex(0.0, d.p.x_c) * il_loc;
    r.x[d.i_cc_q] = q_of(zeta_c);
    r.x[d.i_cc_d] = d_of(zeta_c);

    if (d.pod_p) pod_init(*d.pod_p, 0.0, std::span<double>(r.x).subspan(d.i_pod_p));
    if (d.pod_q) pod_init(*d.pod_q, 0.0, std::span<double>(r.x).subspan(d.i_pod_q));

    r.refs.p_ref = s_meas.real();
    r.refs.q_ref = s_meas.imag();
    r.refs.v_ref = std::abs(v_bus);
    return r;
}

/// Standalone variant: derives the grid-side current from the device's own
/// filter capacitor with auto damping. The assembled model passes the exact
/// network current instead.
inline GforInit gfor_init_from_powerflow(const GforDerived& d, Complex v_bus,
                                         Complex s_dev, const std::string& ctx = "gfor") {
    const Complex i_l = std::conj(s_dev / v_bus);
    const double r_damp = 1.0 / (30.0 * d.p.b_c);
    const Complex y_cap = Complex(0.0, d.p.b_c) / Complex(1.0, d.p.b_c * r_damp);
    const Complex i_ext = i_l - y_cap * v_bus;
    return gfor_init(d, v_bus, i_l, i_ext, ctx);
}

struct GforOutputs {
    double p, q;          // grid-side measured power, device pu
    double freq;          // droop frequency, pu
    double theta;
    double iq, id;        // filter current, converter frame
    double pod_p_out, pod_q_out;
};

inline GforOutputs gfor_outputs(const GforDerived& d, std::span<const double> x,
                                Complex v_bus, Complex i_ext, const GforRefs& refs) {
    GforOutputs o;
    const double theta = x[d.i_theta];
    const Complex v_loc = to_device_frame(v_bus, theta);
    const Complex ig_loc = to_device_frame(i_ext, theta);
    const Complex s_meas = v_loc * std::conj(ig_loc);
    o.p = s_meas.real();
    o.q = s_meas.imag();
    o.pod_p_out = d.pod_p ? pod_output(*d.pod_p, x.subspan(d.i_pod_p)) : 0.0;
    o.pod_q_out = d.pod_q ? pod_output(*d.pod_q, x.subspan(d.i_pod_q)) : 0.0;
    o.freq = 1.0 + d.p.r_f * (refs.p_ref + refs.dp_ext + o.pod_p_out - x[d.i_pf]);
    o.theta = theta;
    o.iq = x[d.i_iq];
    o.id = x[d.i_id];
    return o;
}

}  // namespace gridpod
