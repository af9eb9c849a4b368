#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gridpod/design.hpp"
#include "gridpod/modal.hpp"
#include "gridpod/simulate.hpp"

// Benchmark builders and batch studies: a two-machine interconnection with an
// optional grid-forming converter, generation splitting between a machine and
// a converter, scenario matrices toggling the damping channels, and parameter
// sweeps with mode tracking.

namespace gridpod {

/// Size a damping channel on the given system with the standard procedure but
/// no gain clamp, so the controller strength matches the system's actual mode
/// sensitivity instead of a tuning carried over from some other model.
inline PodParams size_scenario_pod(const SystemSpec& spec, PodChannel channel) {
    DesignOptions d;
    d.channel = channel;
    d.k_min = 0.0;
    d.k_max = 1e9;
    return design_pod(spec, d).params;
}

struct TwoAreaOptions {
    double x_line_pu = 0.1;        // interconnection reactance, system pu
    bool with_gfor = true;
    std::optional<PodParams> pod_p;
    std::optional<PodParams> pod_q;
    std::string gfor_bus = "2";    // network bus fed by the converter transformer
    double sg1_mva = 1500.0, sg2_mva = 5000.0, gfor_mva = 1500.0;
    double p_sg1_mw = 1350.0, p_gfor_mw = 1350.0;
    double load3_pu = 26.0;        // receiving-area load, system pu
    double line_flow_pu = 1.0;     // sending-end transfer target on the tie line
    double v_set = 1.0;
    double h1_s = 4.0, h2_s = 4.0;
    double load_pf_q_over_p = 0.0; // reactive fraction of the loads
    bool calibrate_flow = true;
};

/// Sending-end active power of the branch from..to (first match).
inline double measure_line_flow(const SystemSpec& spec, const std::string& from,
                                const std::string& to) {
    const PowerFlowSolution pf = solve_powerflow(spec);
    for (const auto& br : spec.branches) {
        if (br.from != from || br.to != to) continue;
        const Complex vf = pf.v(spec.bus_index(br.from));
        const Complex vt = pf.v(spec.bus_index(br.to));
        const Complex i = (vf / br.tap - vt) / Complex(br.r_pu, br.x_pu);
        return ((vf / br.tap) * std::conj(i)).real();
    }
    throw Error("no branch " + from + "-" + to + " in the spec");
}

inline SystemSpec build_two_area(const TwoAreaOptions& o = {}) {
    if (o.x_line_pu <= 0.0 || o.x_line_pu >= 10.0)
        throw Error("two-area builder: line reactance must lie in (0, 10) pu");
    SystemSpec s;
    s.base = SystemBase{100.0, 50.0};
    s.kv = 230.0;

    BusSpec b2;
    b2.id = "2";
    b2.kind = BusKind::PV;
    b2.v_set_pu = o.v_set;
    BusSpec b3;
    b3.id = "3";
    b3.kind = BusKind::Slack;
    b3.v_set_pu = o.v_set;
    s.buses = {b2, b3};

    BranchSpec line;
    line.from = "2";
    line.to = "3";
    line.x_pu = o.x_line_pu;
    s.branches = {line};

    SgEntry sg1;
    sg1.name = "SG1";
    sg1.bus = "2";
    sg1.rating_mva = o.sg1_mva;
    sg1.p_mw = o.p_sg1_mw;
    sg1.machine.h_s = o.h1_s;
    SgEntry sg2;
    sg2.name = "SG2";
    sg2.bus = "3";
    sg2.rating_mva = o.sg2_mva;
    sg2.p_mw = (o.load3_pu - o.line_flow_pu) * s.base.s_mva;
    sg2.machine.h_s = o.h2_s;
    s.sgs = {sg1, sg2};

    if (o.with_gfor) {
        GforEntry g;
        g.name = "GFOR" + o.gfor_bus;
        g.bus = "5";
        g.rating_mva = o.gfor_mva;
        g.p_mw = o.p_gfor_mw;
        g.pod_p = o.pod_p;
        g.pod_q = o.pod_q;

        BusSpec b5;
        b5.id = "5";
        b5.kind = BusKind::PV;
        b5.v_set_pu = o.v_set;
        // The converter filter capacitor is this bus's shunt; auto damping
        // reproduces the converter's own damped-capacitor branch.
        b5.b_shunt_pu = y_dev_to_sys(g.params.b_c, o.gfor_mva, s.base.s_mva);
        s.buses.push_back(b5);

        BranchSpec tr;
        tr.from = "5";
        tr.to = o.gfor_bus;
        tr.r_pu = z_dev_to_sys(g.params.r_tr, o.gfor_mva, s.base.s_mva);
        tr.x_pu = z_dev_to_sys(g.params.x_tr, o.gfor_mva, s.base.s_mva);
        s.branches.push_back(tr);
        s.gfors.push_back(std::move(g));
        if (s.bus_index(o.gfor_bus) < 0)
            throw Error("two-area builder: unknown converter connection bus '" + o.gfor_bus + "'");
    }

    auto with_q = [&](double p) { return LoadSpec{"", p, p * o.load_pf_q_over_p}; };
    const double gen2 = (o.p_sg1_mw + (o.with_gfor && o.gfor_bus == "2" ? o.p_gfor_mw : 0.0)) /
                        s.base.s_mva;
    LoadSpec l2 = with_q(gen2 - o.line_flow_pu);
    l2.bus = "2";
    LoadSpec l3 = with_q(o.load3_pu);
    l3.bus = "3";
    s.loads = {l2, l3};

    if (o.calibrate_flow) {
        // Shunt losses shift the transfer slightly off the construction
        // value; trim the sending-area load onto the target.
        for (int it = 0; it < 6; ++it) {
            const double flow = measure_line_flow(s, "2", "3");
            const double err = o.line_flow_pu - flow;
            if (std::abs(err) < 1e-11) break;
            s.loads[0].p_pu -= err;
            s.loads[0].q_pu = s.loads[0].p_pu * o.load_pf_q_over_p;
        }
    }
    validate(s);
    return s;
}

/// Replace a machine by a machine + converter pair producing the same bus
/// injection: the converter takes `alpha` of the rating and dispatch, the
/// machine keeps the rest. alpha = 1 removes the machine entirely.
inline SystemSpec split_generation_unit(const SystemSpec& spec, const std::string& sg_name,
                                        double alpha, const GforParams& gp = {},
                                        const std::optional<PodParams>& pod_p = {},
                                        const std::optional<PodParams>& pod_q = {}) {
    if (alpha < 0.0 || alpha > 1.0) throw Error("split: alpha must be within [0, 1]");
    SystemSpec s = spec;
    int gi = -1;
    for (size_t i = 0; i < s.sgs.size(); ++i)
        if (s.sgs[i].name == sg_name) gi = static_cast<int>(i);
    if (gi < 0) throw Error("split: no machine named '" + sg_name + "'");
    if (alpha == 0.0) return s;

    SgEntry& sg = s.sgs[gi];
    GforEntry g;
    g.name = sg_name + "_GFM";
    g.rating_mva = alpha * sg.rating_mva;
    g.p_mw = alpha * sg.p_mw;
    g.params = gp;
    g.pod_p = pod_p;
    g.pod_q = pod_q;
    g.bus = sg.bus + "_gfm";

    BusSpec cap_bus;
    cap_bus.id = g.bus;
    cap_bus.kind = BusKind::PV;
    cap_bus.v_set_pu = 1.0;
    for (const auto& b : s.buses)
        if (b.id == sg.bus) cap_bus.v_set_pu = b.v_set_pu;
    cap_bus.b_shunt_pu = y_dev_to_sys(gp.b_c, g.rating_mva, s.base.s_mva);
    s.buses.push_back(cap_bus);

    BranchSpec tr;
    tr.from = g.bus;
    tr.to = sg.bus;
    tr.r_pu = z_dev_to_sys(gp.r_tr, g.rating_mva, s.base.s_mva);
    tr.x_pu = z_dev_to_sys(gp.x_tr, g.rating_mva, s.base.s_mva);
    s.branches.push_back(tr);
    s.gfors.push_back(std::move(g));

    if (alpha == 1.0) {
        const std::string host = sg.bus;
        s.sgs.erase(s.sgs.begin() + gi);
        // Full replacement at the slack bus: the balancing role moves to the
        // converter bus, since no device is left at the original one.
        bool host_has_dev = false;
        for (const auto& m : s.sgs) host_has_dev |= (m.bus == host);
        for (const auto& c : s.gfors) host_has_dev |= (c.bus == host);
        for (auto& b : s.buses) {
            if (b.id != host || b.kind != BusKind::Slack || host_has_dev) continue;
            b.kind = BusKind::PQ;
            for (auto& nb : s.buses)
                if (nb.id == host + "_gfm") nb.kind = BusKind::Slack;
        }
    } else {
        sg.rating_mva *= (1.0 - alpha);
        sg.p_mw *= (1.0 - alpha);
    }
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// Scenario matrices

struct ScenarioDef {
    std::string name;
    bool gfor = true;
    bool pod_p = false;
    bool pod_q = false;
    std::vector<LoadSpec> load_overrides;  // replace the loads at these buses
};

struct ScenarioMatrix {
    SystemSpec base;  // fully equipped system; scenarios only switch parts off
    std::vector<ScenarioDef> scenarios;
};

inline SystemSpec apply_scenario(const SystemSpec& base, const ScenarioDef& def) {
    SystemSpec s = base;
    if (!def.pod_p)
        for (auto& g : s.gfors) g.pod_p.reset();
    if (!def.pod_q)
        for (auto& g : s.gfors) g.pod_q.reset();
    if (!def.gfor) {
        std::vector<std::string> dropped_buses;
        for (const auto& g : s.gfors) {
            bool shared = false;
            for (const auto& l : s.loads) shared |= (l.bus == g.bus);
            for (const auto& m : s.sgs) shared |= (m.bus == g.bus);
            if (!shared) dropped_buses.push_back(g.bus);
        }
        s.gfors.clear();
        for (const auto& id : dropped_buses) {
            std::erase_if(s.branches,
                          [&](const BranchSpec& b) { return b.from == id || b.to == id; });
            std::erase_if(s.buses, [&](const BusSpec& b) { return b.id == id; });
        }
    }
    for (const auto& ov : def.load_overrides) {
        std::erase_if(s.loads, [&](const LoadSpec& l) { return l.bus == ov.bus; });
        if (ov.p_pu != 0.0 || ov.q_pu != 0.0) s.loads.push_back(ov);
    }
    validate(s);
    return s;
}

/// The canonical five-scenario study: no converter, converter without
/// damping, and the three damping-channel combinations. Channels without
/// caller-supplied settings are sized on the undamped system itself. The
/// sending-area load of the no-converter case is recalibrated to keep the
/// tie-line transfer identical.
inline ScenarioMatrix two_area_matrix(TwoAreaOptions o = {},
                                      std::optional<PodParams> pod_p = std::nullopt,
                                      std::optional<PodParams> pod_q = std::nullopt) {
    o.with_gfor = true;
    o.pod_p.reset();
    o.pod_q.reset();
    if (!pod_p || !pod_q) {
        const SystemSpec undamped = build_two_area(o);
        if (!pod_p) pod_p = size_scenario_pod(undamped, PodChannel::P);
        if (!pod_q) pod_q = size_scenario_pod(undamped, PodChannel::Q);
    }
    o.pod_p = pod_p;
    o.pod_q = pod_q;
    ScenarioMatrix m;
    m.base = build_two_area(o);

    TwoAreaOptions o_base = o;
    o_base.with_gfor = false;
    o_base.pod_p.reset();
    o_base.pod_q.reset();
    const SystemSpec no_gfor = build_two_area(o_base);
    std::vector<LoadSpec> base_loads;
    for (const auto& l : no_gfor.loads)
        if (l.bus == "2") base_loads.push_back(l);

    m.scenarios.push_back({"base", false, false, false, base_loads});
    m.scenarios.push_back({"gfor", true, false, false, {}});
    m.scenarios.push_back({"gfor-pod-p", true, true, false, {}});
    m.scenarios.push_back({"gfor-pod-q", true, false, true, {}});
    m.scenarios.push_back({"gfor-pod-pq", true, true, true, {}});
    return m;
}

inline void to_json(json& j, const ScenarioDef& d) {
    j = json{{"name", d.name}, {"gfor", d.gfor}, {"pod_p", d.pod_p}, {"pod_q", d.pod_q}};
    j["load_overrides"] = json::array();
    for (const auto& l : d.load_overrides)
        j["load_overrides"].push_back({{"bus", l.bus}, {"p_pu", l.p_pu}, {"q_pu", l.q_pu}});
}

inline void from_json(const json& j, ScenarioDef& d) {
    using detail::jget;
    d.name = detail::jreq_str(j, "name", "scenario");
    d.gfor = jget(j, "gfor", true);
    d.pod_p = jget(j, "pod_p", false);
    d.pod_q = jget(j, "pod_q", false);
    d.load_overrides.clear();
    for (const auto& jl : jget(j, "load_overrides", json::array())) {
        LoadSpec l;
        l.bus = detail::jreq_str(jl, "bus", "load override");
        l.p_pu = jget(jl, "p_pu", 0.0);
        l.q_pu = jget(jl, "q_pu", 0.0);
        d.load_overrides.push_back(std::move(l));
    }
}

inline void to_json(json& j, const ScenarioMatrix& m) {
    j = json{{"base", m.base}, {"scenarios", m.scenarios}};
}

inline void from_json(const json& j, ScenarioMatrix& m) {
    if (!j.contains("base") || !j.contains("scenarios"))
        throw Error("scenario matrix needs 'base' and 'scenarios'");
    m.base = j["base"].get<SystemSpec>();
    m.scenarios = j["scenarios"].get<std::vector<ScenarioDef>>();
}

inline ScenarioMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open matrix file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("failed to parse '" + path + "': " + e.what());
    }
    return j.get<ScenarioMatrix>();
}

struct ScenarioResult {
    std::string name;
    bool ok = false;
    std::string error;
    SystemSpec spec;
    Complex lambda;
    double f_hz = 0, zeta = 0;
    int n_states = 0;
    std::vector<std::pair<std::string, double>> participations;
    TimeSeries sim;  // filled when the matrix run asks for a time-domain study
};

/// Disturbance replayed on every scenario of a matrix run.
struct ScenarioStudy {
    std::vector<Event> events;
    SimOptions opt;
};

/// Run the modal pipeline over every scenario, concurrently; failures are
/// recorded per scenario and do not stop the batch. The same selection rule
/// is applied to every scenario so the rows stay comparable. When a study is
/// given, its disturbance is simulated on each scenario and attached.
inline std::vector<ScenarioResult> run_scenarios(const ScenarioMatrix& m,
                                                 const TargetModeRule& rule = {},
                                                 const LinearizeOptions& lin = {},
                                                 const std::optional<ScenarioStudy>& study = {}) {
    std::vector<ScenarioResult> out(m.scenarios.size());
    detail::parallel_for_indexed(static_cast<int>(m.scenarios.size()), [&](int i) {
        ScenarioResult& r = out[i];
        r.name = m.scenarios[i].name;
        try {
            r.spec = apply_scenario(m.base, m.scenarios[i]);
            const Model model = assemble(r.spec);
            const LinearModel lm = linearize(model, lin);
            const ModeSet ms = eigen_analysis(lm);
            const int ti = select_target_mode(ms, rule);
            const Mode& mode = ms.modes[ti];
            r.lambda = mode.lambda;
            r.f_hz = mode.f_hz;
            r.zeta = mode.zeta;
            r.n_states = static_cast<int>(lm.state_names.size());
            r.participations = top_participations(ms, mode, 5);
            if (study) r.sim = simulate(model, study->events, study->opt);
            r.ok = true;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

/// Paths of the form kind:key:field, e.g. "branch:2-3:x", "load:2:p",
/// "bus:5:vset", "sg:SG1:h", "gfor:GFOR2:rf".
inline void apply_param_path(SystemSpec& s, const std::string& path, double value) {
    const auto c1 = path.find(':');
    const auto c2 = path.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw Error("parameter path '" + path + "' is not of the form kind:key:field");
    const std::string kind = path.substr(0, c1);
    const std::string key = path.substr(c1 + 1, c2 - c1 - 1);
    const std::string field = path.substr(c2 + 1);

    if (kind == "branch") {
        const auto dash = key.find('-');
        if (dash == std::string::npos) throw Error("branch key must be from-to");
        const std::string f = key.substr(0, dash), t = key.substr(dash + 1);
        for (auto& br : s.branches) {
            if (!((br.from == f && br.to == t) || (br.from == t && br.to == f))) continue;
            if (field == "x") br.x_pu = value;
            else if (field == "r") br.r_pu = value;
            else if (field == "b") br.b_pu = value;
            else if (field == "tap") br.tap = value;
            else throw Error("unknown branch field '" + field + "'");
            return;
        }
        throw Error("no branch '" + key + "'");
    }
    if (kind == "load") {
        for (auto& l : s.loads) {
            if (l.bus != key) continue;
            if (field == "p") l.p_pu = value;
            else if (field == "q") l.q_pu = value;
            else throw Error("unknown load field '" + field + "'");
            return;
        }
        throw Error("no load at bus '" + key + "'");
    }
    if (kind == "bus") {
        for (auto& b : s.buses) {
            if (b.id != key) continue;
            if (field == "vset") b.v_set_pu = value;
            else if (field == "b") b.b_shunt_pu = value;
            else if (field == "g") b.g_shunt_pu = value;
            else throw Error("unknown bus field '" + field + "'");
            return;
        }
        throw Error("no bus '" + key + "'");
    }
    if (kind == "sg") {
        for (auto& g : s.sgs) {
            if (g.name != key) continue;
            if (field == "h") g.machine.h_s = value;
            else if (field == "d") g.machine.d_pu = value;
            else if (field == "p_mw") g.p_mw = value;
            else throw Error("unknown sg field '" + field + "'");
            return;
        }
        throw Error("no machine named '" + key + "'");
    }
    if (kind == "gfor") {
        for (auto& g : s.gfors) {
            if (g.name != key) continue;
            if (field == "rf") g.params.r_f = value;
            else if (field == "rv") g.params.r_v = value;
            else if (field == "p_mw") g.p_mw = value;
            else if (field == "k_pod_p" && g.pod_p) g.pod_p->k = value;
            else if (field == "k_pod_q" && g.pod_q) g.pod_q->k = value;
            else throw Error("unknown or inapplicable gfor field '" + field + "'");
            return;
        }
        throw Error("no converter named '" + key + "'");
    }
    throw Error("unknown parameter kind '" + kind + "'");
}

struct SweepSpec {
    std::string param_path;
    double lo = 0.0, hi = 1.0;
    int n = 2;  // inclusive grid points
};

struct SweepPoint {
    double value = 0.0;
    bool ok = false;
    std::string error;
    ModeSet modes;
};

struct SweepResult {
    SweepSpec def;
    std::vector<SweepPoint> points;
    SweepTracks tracks;                // over the successful points
    std::vector<int> tracked_points;   // sweep index per tracking column
};

inline SweepResult run_sweep(const SystemSpec& spec, const SweepSpec& def,
                             const LinearizeOptions& lin = {}, double min_alignment = 0.7) {
    if (def.n < 1) throw Error("sweep needs a non-empty grid");
    if (def.n > 1 && def.lo == def.hi)
        throw Error("sweep grid must be strictly monotone (lo != hi)");
    SweepResult res;
    res.def = def;
    res.points.resize(def.n);
    detail::parallel_for_indexed(def.n, [&](int i) {
        SweepPoint& pt = res.points[i];
        pt.value = def.n == 1 ? def.lo : def.lo + (def.hi - def.lo) * i / (def.n - 1);
        try {
            SystemSpec s = spec;
            apply_param_path(s, def.param_path, pt.value);
            pt.modes = eigen_analysis(linearize(assemble(s), lin));
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
    });
    std::vector<ModeSet> good;
    for (int i = 0; i < def.n; ++i) {
        if (!res.points[i].ok) continue;
        good.push_back(res.points[i].modes);
        res.tracked_points.push_back(i);
    }
    res.tracks = track_modes(good, min_alignment);
    return res;
}

struct TrackedModePoint {
    double value = 0.0;
    bool present = false;
    Complex lambda;
    double f_hz = 0.0, zeta = 0.0;
};

/// Follow the electromechanical target mode across a finished sweep. The mode
/// is selected once, at the successful grid point nearest anchor_value, and
/// its trajectory is read off the sweep's tracking table; every other point
/// therefore reports the same physical mode. Points where the sweep failed or
/// the track lost the mode stay absent.
inline std::vector<TrackedModePoint> tracked_target_mode(const SweepResult& res,
                                                         double anchor_value,
                                                         const TargetModeRule& rule = {}) {
    std::vector<TrackedModePoint> out(res.points.size());
    std::vector<int> col(res.points.size(), -1);
    for (size_t c = 0; c < res.tracked_points.size(); ++c)
        col[res.tracked_points[c]] = static_cast<int>(c);
    int anchor = -1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < res.points.size(); ++i) {
        out[i].value = res.points[i].value;
        if (!res.points[i].ok) continue;
        const double d = std::abs(res.points[i].value - anchor_value);
        if (d < best) {
            best = d;
            anchor = static_cast<int>(i);
        }
    }
    if (anchor < 0) return out;
    const int sel = select_target_mode(res.points[anchor].modes, rule);
    const ModeTrajectory* traj = nullptr;
    for (const auto& t : res.tracks.trajectories)
        if (t.mode_index[col[anchor]] == sel) traj = &t;
    if (!traj) return out;
    for (size_t i = 0; i < res.points.size(); ++i) {
        if (!res.points[i].ok || col[i] < 0) continue;
        const int mi = traj->mode_index[col[i]];
        if (mi < 0) continue;
        const Mode& m = res.points[i].modes.modes[mi];
        out[i] = {res.points[i].value, true, m.lambda, m.f_hz, m.zeta};
    }
    return out;
}

}  // namespace gridpod
