#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridpod/modal.hpp"

// Damping controller design by eigenvalue sensitivity:
//  1. locate the poorly damped electromechanical mode,
//  2. estimate the mode sensitivity to the controller gain with the
//     compensation stages bypassed, by a finite-difference gain probe,
//  3. size the lead/lag stages so the compensated sensitivity points the
//     eigenvalue toward more damping,
//  4. probe again with the stages installed and scale the gain to reach the
//     desired damping ratio, clamped to the allowed gain range,
//  5. verify on the final closed loop.

namespace gridpod {

enum class PodChannel { P, Q };

inline const char* pod_channel_name(PodChannel c) { return c == PodChannel::P ? "P" : "Q"; }

struct DesignOptions {
    PodChannel channel = PodChannel::P;
    std::string gfor_name;            // empty: the single converter in the spec
    double dzeta = 0.10;              // damping ratio increment over the base
    std::optional<double> zeta_target;  // absolute target, overrides dzeta
    double k_min = 200.0, k_max = 400.0;
    int n_s = 2;
    double t_f = 0.1, t_w = 5.0;
    double limit = 0.2;
    double dk_probe = 1.0;
    double probe_agreement = 0.05;
    int max_probe_halvings = 8;
    double min_alignment = 0.5;
    TargetModeRule target;
    LinearizeOptions lin;
};

struct SensitivityEstimate {
    Complex s;        // d(lambda)/d(gain)
    double dk = 0.0;  // probe gain actually used
    int halvings = 0;
};

struct DesignReport {
    std::string gfor_name;
    std::string channel;
    Complex lambda0;
    double f0_hz = 0, zeta0 = 0;
    double zeta_desired = 0;
    Complex lambda_desired;
    SensitivityEstimate s_nc;     // compensation stages bypassed
    std::string branch;           // "lead" or "lag"
    double phi_nc_rad = 0, phi_stage_rad = 0, a = 1.0;
    double t_s1 = 0, t_s2 = 0;
    int n_s = 0;
    double t_f = 0, t_w = 0, limit = 0;
    Complex s_comp;               // with stages installed
    double k_raw = 0, k = 0;
    bool k_clamped = false;
    Complex lambda_achieved;
    double zeta_achieved = 0, f_achieved_hz = 0;
    double final_alignment = 0;
    bool improved = false;

    json to_json() const {
        auto cx = [](Complex z) {
            return json{{"re", z.real()}, {"im", z.imag()},
                        {"mag", std::abs(z)}, {"arg_deg", std::arg(z) * 180.0 / kPi}};
        };
        json j;
        j["gfor"] = gfor_name;
        j["channel"] = channel;
        j["base_mode"] = {{"lambda", cx(lambda0)}, {"f_hz", f0_hz}, {"zeta", zeta0}};
        j["target"] = {{"zeta", zeta_desired}, {"lambda", cx(lambda_desired)}};
        j["sensitivity_nc"] = {{"value", cx(s_nc.s)}, {"dk", s_nc.dk},
                               {"halvings", s_nc.halvings}};
        j["compensation"] = {{"branch", branch},
                             {"phi_nc_rad", phi_nc_rad},
                             {"phi_stage_rad", phi_stage_rad},
                             {"a", a},
                             {"t_s1", t_s1},
                             {"t_s2", t_s2},
                             {"n_s", n_s}};
        j["sensitivity_comp"] = cx(s_comp);
        j["gain"] = {{"raw", k_raw}, {"value", k}, {"clamped", k_clamped}};
        j["pod"] = PodParams{k, t_f, t_w, t_s1, t_s2, n_s, limit};
        j["achieved"] = {{"lambda", cx(lambda_achieved)},
                         {"zeta", zeta_achieved},
                         {"f_hz", f_achieved_hz},
                         {"alignment", final_alignment},
                         {"improved", improved}};
        return j;
    }
};

// ---------------------------------------------------------------------------
// Pieces

/// Desired eigenvalue: real part scaled to the target damping ratio at the
/// base mode frequency, imaginary part kept.
inline Complex target_eigenvalue(Complex lambda0, double zeta_d) {
    const double w0 = std::abs(lambda0.imag());
    if (w0 <= 0.0) throw Error("target_eigenvalue: base mode is not oscillatory");
    return Complex(-zeta_d * w0, w0);
}

struct CompensationResult {
    double a = 1.0;
    double phi_stage = 0.0;
    bool lead = false;
};

/// Lead/lag ratio turning the measured sensitivity phase into a pure
/// damping direction, split over n_s identical stages.
inline CompensationResult compensation_ratio(double phi_nc_rad, int n_s) {
    if (n_s < 1) throw Error("compensation_ratio: n_s must be at least 1");
    CompensationResult r;
    r.lead = phi_nc_rad >= 0.0;
    r.phi_stage = r.lead ? (kPi - phi_nc_rad) / n_s : (kPi + phi_nc_rad) / n_s;
    if (r.phi_stage >= kPi / 2.0 - 1e-9)
        throw Error("compensation_ratio: required " + std::to_string(r.phi_stage) +
                    " rad per stage is degenerate (>= pi/2, a pure differentiator); "
                    "increase n_s");
    if (r.phi_stage < 0.0)
        throw Error("compensation_ratio: negative stage phase; sensitivity phase " +
                    std::to_string(phi_nc_rad) + " rad is outside the workable range");
    const double s = std::sin(r.phi_stage);
    r.a = r.lead ? (1.0 - s) / (1.0 + s) : (1.0 + s) / (1.0 - s);
    return r;
}

/// Stage time constants centred at the mode frequency (rad/s).
inline std::pair<double, double> leadlag_times(double a, double omega0) {
    if (omega0 <= 0.0) throw Error("leadlag_times: mode frequency must be positive");
    if (a <= 0.0) throw Error("leadlag_times: ratio must be positive");
    const double t_s1 = 1.0 / (omega0 * std::sqrt(a));
    return {t_s1, a * t_s1};
}

/// Gain moving the mode from lambda0 to lambda_d along the measured
/// sensitivity, clamped to [k_min, k_max].
inline double compute_gain(Complex lambda0, Complex lambda_d, Complex s_comp,
                           double k_min, double k_max, double* k_raw = nullptr,
                           bool* clamped = nullptr) {
    const double mag = std::abs(s_comp);
    if (mag < 1e-12)
        throw Error("compute_gain: mode is insensitive to this channel (|S| ~ 0); "
                    "the controller cannot move it");
    const double raw = std::abs(lambda_d - lambda0) / mag;
    if (k_raw) *k_raw = raw;
    const double k = clamp(raw, k_min, k_max);
    if (clamped) *clamped = (k != raw);
    return k;
}

// ---------------------------------------------------------------------------
// System-level probing

namespace detail {

struct ModeRef {
    Complex lambda;
    Eigen::VectorXcd shape;
    std::vector<std::string> names;
};

struct Analysis {
    ModeSet modes;
    int target = -1;
    ModeRef ref() const {
        ModeRef r;
        r.lambda = modes.modes[target].lambda;
        r.shape = modes.modes[target].shape;
        r.names = modes.state_names;
        return r;
    }
};

inline Analysis analyze_spec(const SystemSpec& spec, const TargetModeRule& rule,
                             const LinearizeOptions& lin) {
    Analysis an;
    an.modes = eigen_analysis(linearize(assemble(spec), lin));
    an.target = select_target_mode(an.modes, rule);
    return an;
}

/// Re-identify the reference mode in a modified system by eigenvector
/// alignment over the shared state labels.
inline std::pair<Mode, double> locate_mode(const SystemSpec& spec, const ModeRef& ref,
                                           const LinearizeOptions& lin,
                                           double min_alignment) {
    const ModeSet ms = eigen_analysis(linearize(assemble(spec), lin));
    int best = -1;
    double best_mac = -1.0;
    for (size_t i = 0; i < ms.modes.size(); ++i) {
        if (!ms.modes[i].is_pair) continue;
        const double mac =
            mode_alignment(ref.shape, ref.names, ms.modes[i].shape, ms.state_names);
        if (mac > best_mac) { best_mac = mac; best = static_cast<int>(i); }
    }
    if (best < 0 || best_mac < min_alignment)
        throw Error("lost track of the target mode after a model change (best alignment " +
                    std::to_string(best_mac) + ")");
    return {ms.modes[best], best_mac};
}

inline int find_gfor(const SystemSpec& spec, const std::string& name) {
    if (spec.gfors.empty()) throw Error("design: the spec has no grid-forming converter");
    if (name.empty()) {
        if (spec.gfors.size() > 1)
            throw Error("design: several converters present, name one explicitly");
        return 0;
    }
    for (size_t i = 0; i < spec.gfors.size(); ++i)
        if (spec.gfors[i].name == name) return static_cast<int>(i);
    throw Error("design: no converter named '" + name + "'");
}

inline SystemSpec with_pod(const SystemSpec& spec, int gfor_idx, PodChannel ch,
                           const std::optional<PodParams>& p) {
    SystemSpec s = spec;
    if (ch == PodChannel::P)
        s.gfors[gfor_idx].pod_p = p;
    else
        s.gfors[gfor_idx].pod_q = p;
    return s;
}

}  // namespace detail

/// Finite-difference estimate of d(lambda)/d(gain) for a controller with the
/// given filter settings; t_s1 = t_s2 = 0 probes the uncompensated channel.
inline SensitivityEstimate estimate_sensitivity(const SystemSpec& spec, int gfor_idx,
                                                PodChannel ch, const PodParams& probe_shape,
                                                Complex lambda0, const detail::ModeRef& ref,
                                                const DesignOptions& opt) {
    SensitivityEstimate est;
    double dk = opt.dk_probe;
    std::optional<Complex> prev;
    for (int h = 0; h <= opt.max_probe_halvings; ++h) {
        PodParams p = probe_shape;
        p.k = dk;
        const SystemSpec probed = detail::with_pod(spec, gfor_idx, ch, p);
        const auto [mode, mac] = detail::locate_mode(probed, ref, opt.lin, opt.min_alignment);
        const Complex s = (mode.lambda - lambda0) / dk;
        if (prev && std::abs(s - *prev) <= opt.probe_agreement * std::abs(s)) {
            est.s = s;
            est.dk = dk;
            est.halvings = h;
            return est;
        }
        prev = s;
        dk *= 0.5;
    }
    throw Error("sensitivity probe did not settle within " +
                std::to_string(opt.max_probe_halvings) + " gain halvings");
}

struct DesignResult {
    PodParams params;
    DesignReport report;
};

inline DesignResult design_pod(const SystemSpec& spec_in, const DesignOptions& opt = {}) {
    const int gi = detail::find_gfor(spec_in, opt.gfor_name);
    // Design starts from the channel switched off; the other channel stays
    // as the caller provided it.
    const SystemSpec spec = detail::with_pod(spec_in, gi, opt.channel, std::nullopt);

    DesignReport rep;
    rep.gfor_name = spec.gfors[gi].name;
    rep.channel = pod_channel_name(opt.channel);
    rep.n_s = opt.n_s;
    rep.t_f = opt.t_f;
    rep.t_w = opt.t_w;
    rep.limit = opt.limit;

    const auto base = detail::analyze_spec(spec, opt.target, opt.lin);
    const Mode& m0 = base.modes.modes[base.target];
    rep.lambda0 = m0.lambda;
    rep.f0_hz = m0.f_hz;
    rep.zeta0 = m0.zeta;
    rep.zeta_desired = opt.zeta_target ? *opt.zeta_target : m0.zeta + opt.dzeta;
    rep.lambda_desired = target_eigenvalue(m0.lambda, rep.zeta_desired);
    const auto ref = base.ref();

    PodParams shape;
    shape.t_f = opt.t_f;
    shape.t_w = opt.t_w;
    shape.t_s1 = 0.0;
    shape.t_s2 = 0.0;
    shape.n_s = opt.n_s;
    shape.limit = opt.limit;
    rep.s_nc = estimate_sensitivity(spec, gi, opt.channel, shape, m0.lambda, ref, opt);

    rep.phi_nc_rad = std::arg(rep.s_nc.s);
    const auto comp = compensation_ratio(rep.phi_nc_rad, opt.n_s);
    rep.branch = comp.lead ? "lead" : "lag";
    rep.phi_stage_rad = comp.phi_stage;
    rep.a = comp.a;
    const double w0 = std::abs(m0.lambda.imag());
    std::tie(rep.t_s1, rep.t_s2) = leadlag_times(comp.a, w0);

    shape.t_s1 = rep.t_s1;
    shape.t_s2 = rep.t_s2;
    {
        PodParams p = shape;
        p.k = rep.s_nc.dk;
        const SystemSpec probed = detail::with_pod(spec, gi, opt.channel, p);
        const auto [mode, mac] = detail::locate_mode(probed, ref, opt.lin, opt.min_alignment);
        rep.s_comp = (mode.lambda - m0.lambda) / rep.s_nc.dk;
    }

    rep.k = compute_gain(m0.lambda, rep.lambda_desired, rep.s_comp, opt.k_min, opt.k_max,
                         &rep.k_raw, &rep.k_clamped);

    PodParams final_params = shape;
    final_params.k = rep.k;
    const SystemSpec closed = detail::with_pod(spec, gi, opt.channel, final_params);
    const auto [mode, mac] = detail::locate_mode(closed, ref, opt.lin, opt.min_alignment);
    rep.lambda_achieved = mode.lambda;
    rep.zeta_achieved = mode.zeta;
    rep.f_achieved_hz = mode.f_hz;
    rep.final_alignment = mac;
    rep.improved = mode.zeta > m0.zeta;

    return {final_params, rep};
}

}  // namespace gridpod
