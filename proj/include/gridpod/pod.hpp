#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridpod/spec.hpp"

// Damping controller block: washout, low-pass, N identical lead/lag stages,
// gain and a symmetric hard output clamp. The realisation keeps the block
// feed-through-free from the device's point of view: the output is a pure
// function of the block states, the input enters the derivatives only.

namespace gridpod {

struct PodRealization {
    PodParams p;
    double sign = 1.0;         // direction the output takes into its summing node
    bool has_leadlag = false;  // t_s1 = t_s2 = 0 encodes a pass-through stage
    double alpha = 0.0;        // t_s1 / t_s2 feed-through of one stage
};

inline PodRealization make_pod(const PodParams& p, const std::string& ctx = "pod",
                               double sign = 1.0) {
    validate_pod(p, ctx);
    PodRealization r;
    r.p = p;
    r.sign = sign;
    r.has_leadlag = p.t_s2 > 0.0;
    r.alpha = r.has_leadlag ? p.t_s1 / p.t_s2 : 0.0;
    return r;
}

inline int pod_state_count(const PodRealization& r) {
    return 2 + (r.has_leadlag ? r.p.n_s : 0);
}

inline void pod_state_names(const PodRealization& r, const std::string& prefix,
                            std::vector<std::string>& out) {
    out.push_back(prefix + ".washout");
    out.push_back(prefix + ".lowpass");
    if (r.has_leadlag)
        for (int i = 0; i < r.p.n_s; ++i)
            out.push_back(prefix + ".leadlag" + std::to_string(i + 1));
}

/// Block output before the clamp. State layout: [washout, lowpass, ll_1..ll_N].
inline double pod_output_linear(const PodRealization& r, std::span<const double> x) {
    double y = x[1];
    if (r.has_leadlag)
        for (int i = 0; i < r.p.n_s; ++i)
            y = r.alpha * y + (1.0 - r.alpha) * x[2 + i];
    return r.sign * r.p.k * y;
}

inline double pod_output(const PodRealization& r, std::span<const double> x) {
    return clamp(pod_output_linear(r, x), -r.p.limit, r.p.limit);
}

/// Writes the state derivatives for input u and returns the clamped output.
inline double pod_derivatives(const PodRealization& r, std::span<const double> x,
                              double u, std::span<double> dx) {
    const double y_w = u - x[0];  // washout output
    dx[0] = y_w / r.p.t_w;
    dx[1] = (y_w - x[1]) / r.p.t_f;
    if (r.has_leadlag) {
        double stage_in = x[1];
        for (int i = 0; i < r.p.n_s; ++i) {
            dx[2 + i] = (stage_in - x[2 + i]) / r.p.t_s2;
            stage_in = r.alpha * stage_in + (1.0 - r.alpha) * x[2 + i];
        }
    }
    return pod_output(r, x);
}

/// Steady state for a constant input: washout charged, everything else zero,
/// output exactly zero.
inline void pod_init(const PodRealization& r, double u0, std::span<double> x) {
    x[0] = u0;
    for (int i = 1; i < pod_state_count(r); ++i) x[i] = 0.0;
}

/// Transfer function sign * K * (T_w s)/(1+T_w s) * 1/(1+T_f s) *
/// ((1+T_s1 s)/(1+T_s2 s))^N evaluated at s = j*omega (clamp ignored).
inline Complex pod_frequency_response(const PodParams& p, double omega, double sign = 1.0) {
    const Complex s(0.0, omega);
    Complex h = sign * p.k * (p.t_w * s) / (1.0 + p.t_w * s) / (1.0 + p.t_f * s);
    if (p.t_s2 > 0.0) {
        const Complex stage = (1.0 + p.t_s1 * s) / (1.0 + p.t_s2 * s);
        for (int i = 0; i < p.n_s; ++i) h *= stage;
    }
    return h;
}

}  // namespace gridpod
