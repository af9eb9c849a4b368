// Command line front end: power flow, modal analysis, time-domain runs,
// parameter sweeps, damping controller design, scenario comparison and
// benchmark builders.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gridpod/gridpod.hpp"

namespace {

using namespace gridpod;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

Event parse_event(const std::string& text) {
    // load:bus=2,factor=1.01,t=1   |   ref:device=GFOR2,channel=p_ref,delta=0.05,t=1
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error("event '" + text + "': missing kind prefix");
    const std::string kind = text.substr(0, colon);
    Event ev;
    for (const auto& kv : split(text.substr(colon + 1), ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error("event '" + text + "': expected key=value");
        const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "t") ev.t = std::stod(v);
        else if (k == "bus") ev.bus = v;
        else if (k == "factor") ev.factor = std::stod(v);
        else if (k == "device") ev.device = v;
        else if (k == "channel") ev.channel = v;
        else if (k == "delta") ev.delta = std::stod(v);
        else throw Error("event '" + text + "': unknown key '" + k + "'");
    }
    if (kind == "load") {
        ev.kind = Event::Kind::LoadScale;
        if (ev.bus.empty()) throw Error("event '" + text + "': load events need bus=");
    } else if (kind == "ref") {
        ev.kind = Event::Kind::ReferenceStep;
        if (ev.device.empty() || ev.channel.empty())
            throw Error("event '" + text + "': ref events need device= and channel=");
    } else {
        throw Error("event '" + text + "': unknown kind '" + kind + "'");
    }
    return ev;
}

SweepSpec parse_grid(const std::string& param, const std::string& grid) {
    const auto parts = split(grid, ':');
    if (parts.size() != 3) throw Error("grid must be lo:hi:n");
    SweepSpec sw;
    sw.param_path = param;
    sw.lo = std::stod(parts[0]);
    sw.hi = std::stod(parts[1]);
    sw.n = std::stoi(parts[2]);
    return sw;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"power system dynamics and damping controller toolkit"};
    app.require_subcommand(1);

    // ---- pf ----------------------------------------------------------
    std::string pf_spec, pf_out = "pf.csv";
    auto* pf_cmd = app.add_subcommand("pf", "solve the power flow and write a bus report");
    pf_cmd->add_option("spec", pf_spec, "system spec (json)")->required();
    pf_cmd->add_option("--out", pf_out, "output csv");

    // ---- modes -------------------------------------------------------
    std::string md_spec, md_out = "modes.csv";
    auto* md_cmd = app.add_subcommand("modes", "linearise and write the mode table");
    md_cmd->add_option("spec", md_spec)->required();
    md_cmd->add_option("--out", md_out, "output csv");

    // ---- sim ---------------------------------------------------------
    std::string sim_spec, sim_out = "timeseries.csv", sim_channels, sim_method = "rk4";
    std::vector<std::string> sim_events;
    double sim_dt = 50e-6, sim_T = 20.0, sim_odt = 1e-3;
    auto* sim_cmd = app.add_subcommand("sim", "integrate the nonlinear model");
    sim_cmd->add_option("spec", sim_spec)->required();
    sim_cmd->add_option("--event", sim_events,
                        "load:bus=..,factor=..,t=..  or  ref:device=..,channel=..,delta=..,t=..");
    sim_cmd->add_option("--dt", sim_dt, "integration step [s]");
    sim_cmd->add_option("--T", sim_T, "end time [s]");
    sim_cmd->add_option("--output-dt", sim_odt, "sampling period [s]");
    sim_cmd->add_option("--method", sim_method, "rk4 | trap");
    sim_cmd->add_option("--channels", sim_channels, "comma separated channel filter");
    sim_cmd->add_option("--out", sim_out, "output csv");

    // ---- sweep -------------------------------------------------------
    std::string sw_spec, sw_param, sw_grid, sw_out = "sweep.csv";
    auto* sw_cmd = app.add_subcommand("sweep", "parameter sweep with mode tracking");
    sw_cmd->add_option("spec", sw_spec)->required();
    sw_cmd->add_option("--param", sw_param, "path kind:key:field, e.g. branch:2-3:x")->required();
    sw_cmd->add_option("--grid", sw_grid, "lo:hi:n inclusive")->required();
    sw_cmd->add_option("--out", sw_out, "output csv");

    // ---- design ------------------------------------------------------
    std::string dg_spec, dg_channel = "P", dg_gfor, dg_out = "design.json", dg_apply;
    double dg_dzeta = 0.10, dg_zeta = -1.0, dg_kmin = 200, dg_kmax = 400;
    double dg_tf = 0.1, dg_tw = 5.0, dg_limit = 0.2;
    int dg_ns = 2;
    auto* dg_cmd = app.add_subcommand("design", "size a damping controller channel");
    dg_cmd->add_option("spec", dg_spec)->required();
    dg_cmd->add_option("--channel", dg_channel, "P | Q");
    dg_cmd->add_option("--gfor", dg_gfor, "converter name (default: the only one)");
    dg_cmd->add_option("--dzeta", dg_dzeta, "damping ratio increment over the base");
    dg_cmd->add_option("--zeta", dg_zeta, "absolute damping ratio target (overrides --dzeta)");
    dg_cmd->add_option("--kmin", dg_kmin);
    dg_cmd->add_option("--kmax", dg_kmax);
    dg_cmd->add_option("--ns", dg_ns, "number of lead/lag stages");
    dg_cmd->add_option("--tf", dg_tf, "low-pass time constant [s]");
    dg_cmd->add_option("--tw", dg_tw, "washout time constant [s]");
    dg_cmd->add_option("--limit", dg_limit, "output clamp [device pu]");
    dg_cmd->add_option("--out", dg_out, "design report (json)");
    dg_cmd->add_option("--apply", dg_apply, "also write the spec with the channel installed");

    // ---- compare -----------------------------------------------------
    std::string cp_matrix, cp_out = "compare.csv";
    auto* cp_cmd = app.add_subcommand("compare", "run a scenario matrix");
    cp_cmd->add_option("matrix", cp_matrix, "scenario matrix (json)")->required();
    cp_cmd->add_option("--out", cp_out, "output csv");

    // ---- build -------------------------------------------------------
    std::string bd_kind = "two-area", bd_out = "spec.json", bd_in, bd_sg = "SG1", bd_gbus = "2";
    double bd_xl = 0.1, bd_alpha = 0.25, bd_h1 = 4.0, bd_h2 = 4.0;
    bool bd_no_gfor = false, bd_pod_p = false, bd_pod_q = false;
    auto* bd_cmd = app.add_subcommand("build", "emit benchmark specs and matrices");
    bd_cmd->add_option("kind", bd_kind, "two-area | matrix | split");
    bd_cmd->add_option("--xl", bd_xl, "tie line reactance, system pu");
    bd_cmd->add_flag("--no-gfor", bd_no_gfor, "two-area without the converter");
    bd_cmd->add_flag("--pod-p", bd_pod_p, "size and install the P damping channel");
    bd_cmd->add_flag("--pod-q", bd_pod_q, "size and install the Q damping channel");
    bd_cmd->add_option("--gfor-bus", bd_gbus, "converter connection bus");
    bd_cmd->add_option("--h1", bd_h1, "inertia of machine 1 [s]");
    bd_cmd->add_option("--h2", bd_h2, "inertia of machine 2 [s]");
    bd_cmd->add_option("--in", bd_in, "input spec (split)");
    bd_cmd->add_option("--sg", bd_sg, "machine to split");
    bd_cmd->add_option("--alpha", bd_alpha, "converter share of the split unit");
    bd_cmd->add_option("--out", bd_out, "output json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pf_cmd) {
            const SystemSpec spec = load_spec(pf_spec);
            const PowerFlowSolution pf = solve_powerflow(spec);
            write_pf_csv(spec, pf, pf_out);
            std::cout << "converged in " << pf.iterations << " iterations, report: " << pf_out
                      << "\n";
        } else if (*md_cmd) {
            const SystemSpec spec = load_spec(md_spec);
            const ModeSet ms = eigen_analysis(linearize(assemble(spec)));
            write_modes_csv(ms, md_out);
            std::cout << ms.modes.size() << " modes, report: " << md_out << "\n";
        } else if (*sim_cmd) {
            const SystemSpec spec = load_spec(sim_spec);
            std::vector<Event> events;
            for (const auto& e : sim_events) events.push_back(parse_event(e));
            SimOptions opt;
            opt.dt = sim_dt;
            opt.t_end = sim_T;
            opt.output_dt = sim_odt;
            if (sim_method == "trap") opt.method = IntegrationMethod::Trapezoidal;
            else if (sim_method != "rk4") throw Error("unknown method '" + sim_method + "'");
            const TimeSeries ts = simulate(assemble(spec), events, opt);
            std::vector<std::string> only;
            if (!sim_channels.empty()) only = split(sim_channels, ',');
            write_timeseries_csv(ts, sim_out, only);
            std::cout << ts.t.size() << " samples, report: " << sim_out << "\n";
        } else if (*sw_cmd) {
            const SystemSpec spec = load_spec(sw_spec);
            const SweepResult res = run_sweep(spec, parse_grid(sw_param, sw_grid));
            write_sweep_csv(res, sw_out);
            int failed = 0;
            for (const auto& p : res.points) failed += p.ok ? 0 : 1;
            std::cout << res.points.size() << " points (" << failed
                      << " failed), report: " << sw_out << "\n";
            if (failed > 0) return 2;
        } else if (*dg_cmd) {
            const SystemSpec spec = load_spec(dg_spec);
            DesignOptions opt;
            if (dg_channel == "P") opt.channel = PodChannel::P;
            else if (dg_channel == "Q") opt.channel = PodChannel::Q;
            else throw Error("channel must be P or Q");
            opt.gfor_name = dg_gfor;
            opt.dzeta = dg_dzeta;
            if (dg_zeta >= 0.0) opt.zeta_target = dg_zeta;
            opt.k_min = dg_kmin;
            opt.k_max = dg_kmax;
            opt.n_s = dg_ns;
            opt.t_f = dg_tf;
            opt.t_w = dg_tw;
            opt.limit = dg_limit;
            const DesignResult res = design_pod(spec, opt);
            save_json(res.report.to_json(), dg_out);
            if (!dg_apply.empty()) {
                SystemSpec applied = spec;
                const int gi = gridpod::detail::find_gfor(spec, dg_gfor);
                if (opt.channel == PodChannel::P) applied.gfors[gi].pod_p = res.params;
                else applied.gfors[gi].pod_q = res.params;
                save_json(json(applied), dg_apply);
            }
            std::cout << "channel " << dg_channel << ": K = " << fmt(res.params.k, 6)
                      << ", t_s1 = " << fmt(res.params.t_s1, 6)
                      << ", t_s2 = " << fmt(res.params.t_s2, 6) << ", achieved zeta = "
                      << fmt(res.report.zeta_achieved, 6) << ", report: " << dg_out << "\n";
        } else if (*cp_cmd) {
            const ScenarioMatrix m = load_matrix(cp_matrix);
            const auto rows = run_scenarios(m);
            write_compare_csv(rows, cp_out);
            int failed = 0;
            for (const auto& r : rows) failed += r.ok ? 0 : 1;
            std::cout << rows.size() << " scenarios (" << failed
                      << " failed), report: " << cp_out << "\n";
            if (failed > 0) return 2;
        } else if (*bd_cmd) {
            if (bd_kind == "two-area") {
                TwoAreaOptions o;
                o.x_line_pu = bd_xl;
                o.with_gfor = !bd_no_gfor;
                o.gfor_bus = bd_gbus;
                o.h1_s = bd_h1;
                o.h2_s = bd_h2;
                SystemSpec spec = build_two_area(o);
                if (bd_pod_p || bd_pod_q) {
                    // Channels are sized independently on the undamped system,
                    // then both enabled.
                    const int gi = gridpod::detail::find_gfor(spec, "");
                    std::optional<PodParams> pp, pq;
                    if (bd_pod_p) pp = size_scenario_pod(spec, PodChannel::P);
                    if (bd_pod_q) pq = size_scenario_pod(spec, PodChannel::Q);
                    spec.gfors[gi].pod_p = pp;
                    spec.gfors[gi].pod_q = pq;
                }
                save_json(json(spec), bd_out);
            } else if (bd_kind == "matrix") {
                TwoAreaOptions o;
                o.x_line_pu = bd_xl;
                o.gfor_bus = bd_gbus;
                o.h1_s = bd_h1;
                o.h2_s = bd_h2;
                save_json(json(two_area_matrix(o)), bd_out);
            } else if (bd_kind == "split") {
                if (bd_in.empty()) throw Error("build split needs --in <spec>");
                const SystemSpec spec = load_spec(bd_in);
                save_json(json(split_generation_unit(spec, bd_sg, bd_alpha)), bd_out);
            } else {
                throw Error("unknown build kind '" + bd_kind + "'");
            }
            std::cout << "wrote " << bd_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
