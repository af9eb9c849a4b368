#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridpod/common.hpp"

// System description consumed by the power flow, assembly and design layers.
//
// Conventions:
//  * network-level quantities (branches, bus shunts, loads) are per unit on
//    the common system base declared in `base`;
//  * device parameter blocks (machine, converter, their controllers, POD)
//    are per unit on the owning device rating;
//  * generation dispatch is given in MW / MVAr to keep it base-agnostic.

namespace gridpod {

using nlohmann::json;

enum class BusKind { Slack, PV, PQ };

struct BusSpec {
    std::string id;
    BusKind kind = BusKind::PQ;
    double v_set_pu = 1.0;     // magnitude setpoint for slack / PV buses
    double b_shunt_pu = 0.0;   // shunt susceptance, capacitive positive
    double g_shunt_pu = 0.0;   // shunt conductance
    // Series damping resistance of the shunt capacitor. Negative means
    // "auto": 1 / (shunt_damping_scale * B). Zero disables damping.
    double r_damp_pu = -1.0;
};

struct BranchSpec {
    std::string from, to;
    double r_pu = 0.0;
    double x_pu = 0.0;
    double b_pu = 0.0;   // total line charging, split half per end
    double tap = 1.0;    // off-nominal turns ratio on the `from` side
};

struct LoadSpec {
    std::string bus;
    double p_pu = 0.0;
    double q_pu = 0.0;   // inductive positive
};

/// Washout + low-pass + repeated lead/lag + gain + output clamp.
struct PodParams {
    double k = 0.0;
    double t_f = 0.1;    // low-pass time constant [s]
    double t_w = 5.0;    // washout time constant [s]
    double t_s1 = 0.0;   // lead/lag numerator time constant [s]
    double t_s2 = 0.0;   // lead/lag denominator time constant [s]
    int n_s = 2;         // number of identical lead/lag stages
    double limit = 0.2;  // symmetric output clamp [pu of device rating]
};

/// Standard-parameter synchronous machine data (device pu, seconds).
struct SgMachineParams {
    double rs = 0.0025;
    double xl = 0.2;
    double xd = 1.8, xdp = 0.3, xdpp = 0.25;
    double xq = 1.7, xqp = 0.55, xqpp = 0.25;
    double td0p = 8.0, td0pp = 0.03;
    double tq0p = 0.4, tq0pp = 0.05;
    double h_s = 4.0;      // inertia constant [s]
    double d_pu = 0.0;     // speed-deviation damping torque coefficient
    double r_tr = 0.002;   // unit transformer, merged in series with the stator
    double x_tr = 0.1;
    double r_snb = 0.0;    // optional terminal snubber resistance, 0 = off
};

struct Ac4aParams {
    double ka = 200.0;
    double ta = 0.015;
    double tb = 10.0;
    double tc = 1.0;
    double vr_max = 10.0;
    double vr_min = -10.0;
};

struct Ieeeg1Params {
    double r = 0.05;   // droop on device base
    double t1 = 0.0, t2 = 0.0;              // speed-error lead/lag
    double t3 = 0.1;                        // gate servo
    double t4 = 0.3, t5 = 7.0, t6 = 0.6, t7 = 0.0;
    double k1 = 0.3, k2 = 0.4, k3 = 0.0, k4 = 0.0;
    double k5 = 0.3, k6 = 0.0, k7 = 0.0, k8 = 0.0;
};

struct SgEntry {
    std::string name;
    std::string bus;
    double rating_mva = 1500.0;
    double p_mw = 0.0;        // dispatch target; ignored at the slack bus
    SgMachineParams machine;
    Ac4aParams exciter;
    Ieeeg1Params governor;
};

/// Grid-forming converter data (device pu, seconds).
struct GforParams {
    double r_c = 0.005;       // filter resistance
    double x_c = 0.15;        // filter reactance
    double b_c = 0.15;        // filter capacitor susceptance (on its own bus)
    double tau_cc = 1e-3;     // current-loop time constant
    double i_max = 1.1;       // per-axis current reference clamp
    double tau_vac = 50e-3;   // voltage-loop settling time
    double xi_vac = 0.707;    // voltage-loop damping factor
    // The reference dataset's proportional gain carries a x100 factor; keep
    // it as the default and allow the textbook tuning via this switch.
    bool kp_vac_x100 = true;
    double tau_ff = 1e-4;     // feed-forward measurement filters
    double r_f = 0.05;        // frequency droop  (omega = 1 + r_f (p* - p))
    double tau_p = 0.1;
    double r_v = 0.067;       // voltage droop    (V* = v_set + r_v (q* - q))
    double tau_q = 0.1;
    double x_tr = 0.15;       // step-up transformer (materialised as a branch
    double r_tr = 0.0;        //   by the benchmark builders)
};

struct GforEntry {
    std::string name;
    std::string bus;
    double rating_mva = 1500.0;
    double p_mw = 0.0;
    GforParams params;
    std::optional<PodParams> pod_p;  // active-power damping channel
    std::optional<PodParams> pod_q;  // reactive-power damping channel
};

struct ModelOptions {
    // Every bus in the dynamic model carries a capacitance state; buses whose
    // physical shunt is below this floor get a damped parasitic capacitor.
    double bus_b_min_pu = 0.05;
    double shunt_damping_scale = 30.0;  // auto r_damp = 1/(scale*B)
};

struct SystemSpec {
    SystemBase base;
    double kv = 230.0;
    ModelOptions options;
    std::vector<BusSpec> buses;
    std::vector<BranchSpec> branches;
    std::vector<LoadSpec> loads;
    std::vector<SgEntry> sgs;
    std::vector<GforEntry> gfors;

    int bus_index(const std::string& id) const {
        for (size_t i = 0; i < buses.size(); ++i)
            if (buses[i].id == id) return static_cast<int>(i);
        return -1;
    }
};

// ---------------------------------------------------------------------------
// JSON round trip

namespace detail {

template <typename T>
T jget(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

inline std::string jreq_str(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw Error(std::string(ctx) + ": missing required string field '" + key + "'");
    return it->get<std::string>();
}

}  // namespace detail

inline void to_json(json& j, const PodParams& p) {
    j = json{{"k", p.k},     {"t_f", p.t_f},   {"t_w", p.t_w}, {"t_s1", p.t_s1},
             {"t_s2", p.t_s2}, {"n_s", p.n_s}, {"limit", p.limit}};
}
inline void from_json(const json& j, PodParams& p) {
    using detail::jget;
    PodParams d;
    p.k = jget(j, "k", d.k);
    p.t_f = jget(j, "t_f", d.t_f);
    p.t_w = jget(j, "t_w", d.t_w);
    p.t_s1 = jget(j, "t_s1", d.t_s1);
    p.t_s2 = jget(j, "t_s2", d.t_s2);
    p.n_s = jget(j, "n_s", d.n_s);
    p.limit = jget(j, "limit", d.limit);
}

inline void to_json(json& j, const SgMachineParams& m) {
    j = json{{"rs", m.rs},       {"xl", m.xl},     {"xd", m.xd},   {"xdp", m.xdp},
             {"xdpp", m.xdpp},   {"xq", m.xq},     {"xqp", m.xqp}, {"xqpp", m.xqpp},
             {"td0p", m.td0p},   {"td0pp", m.td0pp}, {"tq0p", m.tq0p},
             {"tq0pp", m.tq0pp}, {"h_s", m.h_s},   {"d_pu", m.d_pu},
             {"r_tr", m.r_tr},   {"x_tr", m.x_tr}, {"r_snb", m.r_snb}};
}
inline void from_json(const json& j, SgMachineParams& m) {
    using detail::jget;
    SgMachineParams d;
    m.rs = jget(j, "rs", d.rs);
    m.xl = jget(j, "xl", d.xl);
    m.xd = jget(j, "xd", d.xd);
    m.xdp = jget(j, "xdp", d.xdp);
    m.xdpp = jget(j, "xdpp", d.xdpp);
    m.xq = jget(j, "xq", d.xq);
    m.xqp = jget(j, "xqp", d.xqp);
    m.xqpp = jget(j, "xqpp", d.xqpp);
    m.td0p = jget(j, "td0p", d.td0p);
    m.td0pp = jget(j, "td0pp", d.td0pp);
    m.tq0p = jget(j, "tq0p", d.tq0p);
    m.tq0pp = jget(j, "tq0pp", d.tq0pp);
    m.h_s = jget(j, "h_s", d.h_s);
    m.d_pu = jget(j, "d_pu", d.d_pu);
    m.r_tr = jget(j, "r_tr", d.r_tr);
    m.x_tr = jget(j, "x_tr", d.x_tr);
    m.r_snb = jget(j, "r_snb", d.r_snb);
}

inline void to_json(json& j, const Ac4aParams& e) {
    j = json{{"ka", e.ka}, {"ta", e.ta}, {"tb", e.tb},
             {"tc", e.tc}, {"vr_max", e.vr_max}, {"vr_min", e.vr_min}};
}
inline void from_json(const json& j, Ac4aParams& e) {
    using detail::jget;
    Ac4aParams d;
    e.ka = jget(j, "ka", d.ka);
    e.ta = jget(j, "ta", d.ta);
    e.tb = jget(j, "tb", d.tb);
    e.tc = jget(j, "tc", d.tc);
    e.vr_max = jget(j, "vr_max", d.vr_max);
    e.vr_min = jget(j, "vr_min", d.vr_min);
}

inline void to_json(json& j, const Ieeeg1Params& g) {
    j = json{{"r", g.r},   {"t1", g.t1}, {"t2", g.t2}, {"t3", g.t3},
             {"t4", g.t4}, {"t5", g.t5}, {"t6", g.t6}, {"t7", g.t7},
             {"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}, {"k4", g.k4},
             {"k5", g.k5}, {"k6", g.k6}, {"k7", g.k7}, {"k8", g.k8}};
}
inline void from_json(const json& j, Ieeeg1Params& g) {
    using detail::jget;
    Ieeeg1Params d;
    g.r = jget(j, "r", d.r);
    g.t1 = jget(j, "t1", d.t1);
    g.t2 = jget(j, "t2", d.t2);
    g.t3 = jget(j, "t3", d.t3);
    g.t4 = jget(j, "t4", d.t4);
    g.t5 = jget(j, "t5", d.t5);
    g.t6 = jget(j, "t6", d.t6);
    g.t7 = jget(j, "t7", d.t7);
    g.k1 = jget(j, "k1", d.k1);
    g.k2 = jget(j, "k2", d.k2);
    g.k3 = jget(j, "k3", d.k3);
    g.k4 = jget(j, "k4", d.k4);
    g.k5 = jget(j, "k5", d.k5);
    g.k6 = jget(j, "k6", d.k6);
    g.k7 = jget(j, "k7", d.k7);
    g.k8 = jget(j, "k8", d.k8);
}

inline void to_json(json& j, const GforParams& p) {
    j = json{{"r_c", p.r_c},        {"x_c", p.x_c},   {"b_c", p.b_c},
             {"tau_cc", p.tau_cc},  {"i_max", p.i_max},
             {"tau_vac", p.tau_vac}, {"xi_vac", p.xi_vac},
             {"kp_vac_x100", p.kp_vac_x100}, {"tau_ff", p.tau_ff},
             {"r_f", p.r_f},        {"tau_p", p.tau_p},
             {"r_v", p.r_v},        {"tau_q", p.tau_q},
             {"x_tr", p.x_tr},      {"r_tr", p.r_tr}};
}
inline void from_json(const json& j, GforParams& p) {
    using detail::jget;
    GforParams d;
    p.r_c = jget(j, "r_c", d.r_c);
    p.x_c = jget(j, "x_c", d.x_c);
    p.b_c = jget(j, "b_c", d.b_c);
    p.tau_cc = jget(j, "tau_cc", d.tau_cc);
    p.i_max = jget(j, "i_max", d.i_max);
    p.tau_vac = jget(j, "tau_vac", d.tau_vac);
    p.xi_vac = jget(j, "xi_vac", d.xi_vac);
    p.kp_vac_x100 = jget(j, "kp_vac_x100", d.kp_vac_x100);
    p.tau_ff = jget(j, "tau_ff", d.tau_ff);
    p.r_f = jget(j, "r_f", d.r_f);
    p.tau_p = jget(j, "tau_p", d.tau_p);
    p.r_v = jget(j, "r_v", d.r_v);
    p.tau_q = jget(j, "tau_q", d.tau_q);
    p.x_tr = jget(j, "x_tr", d.x_tr);
    p.r_tr = jget(j, "r_tr", d.r_tr);
}

inline void to_json(json& j, const SystemSpec& s) {
    j = json::object();
    j["base"] = {{"s_mva", s.base.s_mva}, {"f_hz", s.base.f_hz}};
    j["kv"] = s.kv;
    j["options"] = {{"bus_b_min_pu", s.options.bus_b_min_pu},
                    {"shunt_damping_scale", s.options.shunt_damping_scale}};
    j["buses"] = json::array();
    for (const auto& b : s.buses) {
        const char* kind = b.kind == BusKind::Slack ? "slack"
                         : b.kind == BusKind::PV    ? "pv"
                                                    : "pq";
        j["buses"].push_back({{"id", b.id},
                              {"kind", kind},
                              {"v_set_pu", b.v_set_pu},
                              {"b_shunt_pu", b.b_shunt_pu},
                              {"g_shunt_pu", b.g_shunt_pu},
                              {"r_damp_pu", b.r_damp_pu}});
    }
    j["branches"] = json::array();
    for (const auto& br : s.branches)
        j["branches"].push_back({{"from", br.from},
                                 {"to", br.to},
                                 {"r_pu", br.r_pu},
                                 {"x_pu", br.x_pu},
                                 {"b_pu", br.b_pu},
                                 {"tap", br.tap}});
    j["loads"] = json::array();
    for (const auto& l : s.loads)
        j["loads"].push_back({{"bus", l.bus}, {"p_pu", l.p_pu}, {"q_pu", l.q_pu}});
    j["sg"] = json::array();
    for (const auto& g : s.sgs) {
        json e{{"name", g.name},
               {"bus", g.bus},
               {"rating_mva", g.rating_mva},
               {"p_mw", g.p_mw},
               {"machine", g.machine},
               {"exciter", g.exciter},
               {"governor", g.governor}};
        j["sg"].push_back(std::move(e));
    }
    j["gfor"] = json::array();
    for (const auto& g : s.gfors) {
        json e{{"name", g.name},
               {"bus", g.bus},
               {"rating_mva", g.rating_mva},
               {"p_mw", g.p_mw},
               {"params", g.params}};
        if (g.pod_p) e["pod_p"] = *g.pod_p;
        if (g.pod_q) e["pod_q"] = *g.pod_q;
        j["gfor"].push_back(std::move(e));
    }
}

inline void from_json(const json& j, SystemSpec& s) {
    using detail::jget;
    s = SystemSpec{};
    if (j.contains("base")) {
        s.base.s_mva = jget(j["base"], "s_mva", 100.0);
        s.base.f_hz = jget(j["base"], "f_hz", 50.0);
    }
    s.kv = jget(j, "kv", 230.0);
    if (j.contains("options")) {
        s.options.bus_b_min_pu = jget(j["options"], "bus_b_min_pu", s.options.bus_b_min_pu);
        s.options.shunt_damping_scale =
            jget(j["options"], "shunt_damping_scale", s.options.shunt_damping_scale);
    }
    for (const auto& jb : jget(j, "buses", json::array())) {
        BusSpec b;
        b.id = detail::jreq_str(jb, "id", "bus");
        std::string kind = jget<std::string>(jb, "kind", "pq");
        if (kind == "slack") b.kind = BusKind::Slack;
        else if (kind == "pv") b.kind = BusKind::PV;
        else if (kind == "pq") b.kind = BusKind::PQ;
        else throw Error("bus '" + b.id + "': unknown kind '" + kind + "'");
        b.v_set_pu = jget(jb, "v_set_pu", 1.0);
        b.b_shunt_pu = jget(jb, "b_shunt_pu", 0.0);
        b.g_shunt_pu = jget(jb, "g_shunt_pu", 0.0);
        b.r_damp_pu = jget(jb, "r_damp_pu", -1.0);
        s.buses.push_back(std::move(b));
    }
    for (const auto& jb : jget(j, "branches", json::array())) {
        BranchSpec br;
        br.from = detail::jreq_str(jb, "from", "branch");
        br.to = detail::jreq_str(jb, "to", "branch");
        br.r_pu = jget(jb, "r_pu", 0.0);
        br.x_pu = jget(jb, "x_pu", 0.0);
        br.b_pu = jget(jb, "b_pu", 0.0);
        br.tap = jget(jb, "tap", 1.0);
        s.branches.push_back(std::move(br));
    }
    for (const auto& jl : jget(j, "loads", json::array())) {
        LoadSpec l;
        l.bus = detail::jreq_str(jl, "bus", "load");
        l.p_pu = jget(jl, "p_pu", 0.0);
        l.q_pu = jget(jl, "q_pu", 0.0);
        s.loads.push_back(std::move(l));
    }
    for (const auto& jg : jget(j, "sg", json::array())) {
        SgEntry g;
        g.name = detail::jreq_str(jg, "name", "sg");
        g.bus = detail::jreq_str(jg, "bus", "sg");
        g.rating_mva = jget(jg, "rating_mva", 1500.0);
        g.p_mw = jget(jg, "p_mw", 0.0);
        if (jg.contains("machine")) g.machine = jg["machine"].get<SgMachineParams>();
        if (jg.contains("exciter")) g.exciter = jg["exciter"].get<Ac4aParams>();
        if (jg.contains("governor")) g.governor = jg["governor"].get<Ieeeg1Params>();
        s.sgs.push_back(std::move(g));
    }
    for (const auto& jg : jget(j, "gfor", json::array())) {
        GforEntry g;
        g.name = detail::jreq_str(jg, "name", "gfor");
        g.bus = detail::jreq_str(jg, "bus", "gfor");
        g.rating_mva = jget(jg, "rating_mva", 1500.0);
        g.p_mw = jget(jg, "p_mw", 0.0);
        if (jg.contains("params")) g.params = jg["params"].get<GforParams>();
        if (jg.contains("pod_p")) g.pod_p = jg["pod_p"].get<PodParams>();
        if (jg.contains("pod_q")) g.pod_q = jg["pod_q"].get<PodParams>();
        s.gfors.push_back(std::move(g));
    }
}

inline SystemSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("failed to parse '" + path + "': " + e.what());
    }
    return j.get<SystemSpec>();
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Validation

inline void validate_pod(const PodParams& p, const std::string& ctx) {
    if (p.t_f <= 0 || p.t_w <= 0)
        throw Error(ctx + ": filter and washout time constants must be positive");
    if (p.t_s1 < 0 || p.t_s2 < 0)
        throw Error(ctx + ": lead/lag time constants must be non-negative");
    if (p.t_s2 == 0.0 && p.t_s1 > 0.0)
        throw Error(ctx + ": lead/lag with t_s2 = 0 and t_s1 > 0 is improper");
    if (p.n_s < 1) throw Error(ctx + ": n_s must be at least 1");
    if (p.limit <= 0) throw Error(ctx + ": output limit must be positive");
    if (p.k < 0) throw Error(ctx + ": gain must be non-negative");
}

inline void validate(const SystemSpec& s) {
    if (s.base.s_mva <= 0 || s.base.f_hz <= 0) throw Error("invalid system base");
    if (s.buses.empty()) throw Error("spec has no buses");
    std::set<std::string> ids;
    int n_slack = 0;
    for (const auto& b : s.buses) {
        if (!ids.insert(b.id).second) throw Error("duplicate bus id '" + b.id + "'");
        if (b.kind == BusKind::Slack) ++n_slack;
        if (b.kind != BusKind::PQ && b.v_set_pu <= 0)
            throw Error("bus '" + b.id + "': voltage setpoint must be positive");
        if (b.b_shunt_pu < 0) throw Error("bus '" + b.id + "': negative shunt susceptance");
    }
    if (n_slack != 1) throw Error("spec must declare exactly one slack bus");
    for (const auto& br : s.branches) {
        if (s.bus_index(br.from) < 0 || s.bus_index(br.to) < 0)
            throw Error("branch " + br.from + "-" + br.to + ": unknown endpoint");
        if (br.from == br.to) throw Error("branch " + br.from + "-" + br.to + " is a self loop");
        if (br.x_pu <= 0) throw Error("branch " + br.from + "-" + br.to + ": x must be positive");
        if (br.r_pu < 0 || br.b_pu < 0 || br.tap <= 0)
            throw Error("branch " + br.from + "-" + br.to + ": invalid parameters");
    }
    for (const auto& l : s.loads)
        if (s.bus_index(l.bus) < 0) throw Error("load at unknown bus '" + l.bus + "'");
    std::set<std::string> names;
    for (const auto& g : s.sgs) {
        const std::string ctx = "sg '" + g.name + "'";
        if (!names.insert(g.name).second) throw Error("duplicate device name '" + g.name + "'");
        if (s.bus_index(g.bus) < 0) throw Error(ctx + ": unknown bus '" + g.bus + "'");
        if (g.rating_mva <= 0) throw Error(ctx + ": rating must be positive");
        if (std::abs(g.p_mw) > g.rating_mva)
            throw Error(ctx + ": dispatch exceeds the rating");
        const auto& m = g.machine;
        if (m.h_s <= 0) throw Error(ctx + ": inertia must be positive");
        if (!(m.xd > m.xdp && m.xdp > m.xdpp && m.xdpp > m.xl && m.xl > 0))
            throw Error(ctx + ": d-axis reactances must satisfy xd > xdp > xdpp > xl > 0");
        if (!(m.xq > m.xqp && m.xqp > m.xqpp && m.xqpp > m.xl))
            throw Error(ctx + ": q-axis reactances must satisfy xq > xqp > xqpp > xl");
        if (m.td0p <= 0 || m.td0pp <= 0 || m.tq0p <= 0 || m.tq0pp <= 0)
            throw Error(ctx + ": open-circuit time constants must be positive");
        if (g.exciter.ta <= 0 || g.exciter.tb <= 0 || g.exciter.ka <= 0)
            throw Error(ctx + ": invalid exciter parameters");
        if (g.governor.t3 <= 0 || g.governor.r <= 0)
            throw Error(ctx + ": invalid governor parameters");
    }
    for (const auto& g : s.gfors) {
        const std::string ctx = "gfor '" + g.name + "'";
        if (!names.insert(g.name).second) throw Error("duplicate device name '" + g.name + "'");
        if (s.bus_index(g.bus) < 0) throw Error(ctx + ": unknown bus '" + g.bus + "'");
        if (g.rating_mva <= 0) throw Error(ctx + ": rating must be positive");
        if (std::abs(g.p_mw) > g.rating_mva)
            throw Error(ctx + ": dispatch exceeds the rating");
        const auto& p = g.params;
        if (p.x_c <= 0 || p.b_c <= 0 || p.r_c < 0)
            throw Error(ctx + ": invalid filter parameters");
        if (p.tau_cc <= 0 || p.tau_vac <= 0 || p.tau_ff <= 0 || p.tau_p <= 0 || p.tau_q <= 0)
            throw Error(ctx + ": control time constants must be positive");
        if (p.r_f <= 0 || p.r_v <= 0) throw Error(ctx + ": droop gains must be positive");
        if (p.i_max <= 0) throw Error(ctx + ": current limit must be positive");
        if (g.pod_p) validate_pod(*g.pod_p, ctx + " pod_p");
        if (g.pod_q) validate_pod(*g.pod_q, ctx + " pod_q");
    }
    if (s.sgs.empty() && s.gfors.empty())
        throw Error("spec declares no devices; the dynamic model would have no source");
    // The slack balancing power must be realised by an actual device there.
    for (const auto& b : s.buses) {
        if (b.kind != BusKind::Slack) continue;
        bool has_dev = false;
        for (const auto& g : s.sgs) has_dev |= (g.bus == b.id);
        for (const auto& g : s.gfors) has_dev |= (g.bus == b.id);
        if (!has_dev)
            throw Error("slack bus '" + b.id + "' hosts no device; the dynamic model would have no balancing source");
    }
}

}  // namespace gridpod
