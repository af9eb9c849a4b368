#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gridpod/scenarios.hpp"
#include "gridpod/simulate.hpp"

// Deterministic text reports. All floating point goes through one fixed
// formatter so identical runs produce byte-identical files.

namespace gridpod {

inline std::string fmt(double v, int sig = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", sig, v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    return out;
}

inline void write_timeseries_csv(const TimeSeries& ts, const std::string& path,
                                 const std::vector<std::string>& only = {}) {
    std::vector<int> cols;
    if (only.empty()) {
        for (size_t i = 0; i < ts.channels.size(); ++i) cols.push_back(static_cast<int>(i));
    } else {
        for (const auto& name : only) {
            const int c = ts.channel_index(name);
            if (c < 0) throw Error("unknown channel '" + name + "'");
            cols.push_back(c);
        }
    }
    auto out = open_out(path);
    out << "t_s";
    for (int c : cols) out << "," << ts.channels[c];
    out << "\n";
    for (size_t r = 0; r < ts.t.size(); ++r) {
        out << fmt(ts.t[r]);
        for (int c : cols) out << "," << fmt(ts.data(static_cast<int>(r), c));
        out << "\n";
    }
}

inline void write_modes_csv(const ModeSet& ms, const std::string& path) {
    auto out = open_out(path);
    out << "mode_id,re_1_s,im_rad_s,f_hz,damping_pct,p1,p2,p3,p4,p5\n";
    for (size_t i = 0; i < ms.modes.size(); ++i) {
        const Mode& m = ms.modes[i];
        out << i << "," << fmt(m.lambda.real()) << "," << fmt(m.lambda.imag()) << ","
            << fmt(m.f_hz) << "," << fmt(100.0 * m.zeta);
        const auto parts = top_participations(ms, m, 5);
        for (int k = 0; k < 5; ++k) {
            out << ",";
            if (k < static_cast<int>(parts.size()))
                out << parts[k].first << ":" << fmt(parts[k].second, 6);
        }
        out << "\n";
    }
}

inline void write_pf_csv(const SystemSpec& spec, const PowerFlowSolution& pf,
                         const std::string& path) {
    auto out = open_out(path);
    out << "bus,v_pu,angle_deg,p_pu,q_pu\n";
    for (size_t b = 0; b < spec.buses.size(); ++b) {
        out << spec.buses[b].id << "," << fmt(pf.vmag(static_cast<int>(b))) << ","
            << fmt(pf.vang(static_cast<int>(b)) * 180.0 / kPi) << ","
            << fmt(pf.s_injection[b].real()) << "," << fmt(pf.s_injection[b].imag()) << "\n";
    }
}

inline void write_sweep_csv(const SweepResult& res, const std::string& path) {
    auto out = open_out(path);
    out << "point,param_value,status,trajectory,re_1_s,im_rad_s,f_hz,damping_pct,events\n";
    // Map sweep point -> column in the tracked subsequence.
    std::vector<int> col_of_point(res.points.size(), -1);
    for (size_t c = 0; c < res.tracked_points.size(); ++c)
        col_of_point[res.tracked_points[c]] = static_cast<int>(c);
    for (size_t p = 0; p < res.points.size(); ++p) {
        const auto& pt = res.points[p];
        if (!pt.ok) {
            out << p << "," << fmt(pt.value) << ",failed,,,,,," << pt.error << "\n";
            continue;
        }
        const int col = col_of_point[p];
        for (const auto& tr : res.tracks.trajectories) {
            const int mi = tr.mode_index[col];
            if (mi < 0) continue;
            const Mode& m = pt.modes.modes[mi];
            out << p << "," << fmt(pt.value) << ",ok," << tr.id << ","
                << fmt(m.lambda.real()) << "," << fmt(m.lambda.imag()) << ","
                << fmt(m.f_hz) << "," << fmt(100.0 * m.zeta) << ",";
            for (const auto& ev : tr.events)
                if (res.tracked_points[ev.point] == static_cast<int>(p)) out << ev.what << ";";
            out << "\n";
        }
    }
}

inline void write_compare_csv(const std::vector<ScenarioResult>& rows,
                              const std::string& path) {
    auto out = open_out(path);
    out << "scenario,status,n_states,re_1_s,im_rad_s,f_hz,damping_pct,"
           "p1,p2,p3,p4,p5,error\n";
    for (const auto& r : rows) {
        out << r.name << ",";
        if (!r.ok) {
            out << "failed,,,,,,,,,,," << r.error << "\n";
            continue;
        }
        out << "ok," << r.n_states << "," << fmt(r.lambda.real()) << ","
            << fmt(r.lambda.imag()) << "," << fmt(r.f_hz) << "," << fmt(100.0 * r.zeta);
        for (int k = 0; k < 5; ++k) {
            out << ",";
            if (k < static_cast<int>(r.participations.size()))
                out << r.participations[k].first << ":" << fmt(r.participations[k].second, 6);
        }
        out << ",\n";
    }
}

}  // namespace gridpod
