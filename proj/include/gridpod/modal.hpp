#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridpod/common.hpp"
#include "gridpod/linearize.hpp"

// Modal analysis: eigensolution, participation factors, mode matching by
// eigenvector alignment and mode tracking across parameter sweeps.

namespace gridpod {

struct Mode {
    Complex lambda;
    double f_hz = 0.0;
    double zeta = 0.0;          // damping ratio, fraction
    Eigen::VectorXcd shape;     // right eigenvector, normalised
    Eigen::VectorXd participation;  // normalised to sum 1; empty if flagged
    bool is_pair = false;       // complex pair, stored once with im > 0
};

struct ModeSet {
    std::vector<Mode> modes;        // sorted by frequency, then by real part
    Eigen::VectorXcd eigenvalues;   // full spectrum
    std::vector<std::string> state_names;
    bool spectrum_ok = true;        // eigenvector basis well conditioned
    double reconstruction_err = 0.0;
};

/// Alignment of two mode shapes on the intersection of their state label
/// sets; 1 means identical direction. Falls back to the common labels so
/// systems that differ by added controller states remain comparable.
inline double mode_alignment(const Eigen::VectorXcd& a, const std::vector<std::string>& names_a,
                             const Eigen::VectorXcd& b, const std::vector<std::string>& names_b) {
    std::map<std::string, int> bidx;
    for (size_t i = 0; i < names_b.size(); ++i) bidx[names_b[i]] = static_cast<int>(i);
    Complex dot = 0.0;
    double na = 0.0, nb = 0.0;
    for (size_t i = 0; i < names_a.size(); ++i) {
        auto it = bidx.find(names_a[i]);
        if (it == bidx.end()) continue;
        dot += a(i) * std::conj(b(it->second));
        na += std::norm(a(i));
        nb += std::norm(b(it->second));
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(dot) / std::sqrt(na * nb);
}

inline ModeSet eigen_analysis(const Eigen::MatrixXd& a,
                              const std::vector<std::string>& state_names) {
    const int n = static_cast<int>(a.rows());
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw Error("eigensolver failed to converge");
    const Eigen::VectorXcd lam = es.eigenvalues();
    const Eigen::MatrixXcd v = es.eigenvectors();

    ModeSet ms;
    ms.eigenvalues = lam;
    ms.state_names = state_names;

    // Left eigenvectors from the inverse of the right basis; if the basis is
    // close to defective, participations are not meaningful and are skipped.
    Eigen::MatrixXcd w;
    bool have_w = false;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(v);
    if (lu.isInvertible()) {
        w = lu.inverse();
        const double err =
            (v * lam.asDiagonal() * w - a.cast<Complex>()).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        ms.reconstruction_err = err / scale;
        have_w = ms.reconstruction_err < 1e-8;
    }
    ms.spectrum_ok = have_w;

    for (int i = 0; i < n; ++i) {
        if (lam(i).imag() < 0.0) continue;  // conjugate twin kept once
        Mode m;
        m.lambda = lam(i);
        m.is_pair = lam(i).imag() > 0.0;
        m.f_hz = frequency_hz(m.lambda);
        m.zeta = damping_ratio(m.lambda);
        m.shape = v.col(i);
        // Deterministic orientation: largest component real positive.
        int imax = 0;
        double best = -1.0;
        for (int j = 0; j < n; ++j)
            if (std::abs(m.shape(j)) > best) { best = std::abs(m.shape(j)); imax = j; }
        if (best > 0.0) m.shape /= m.shape(imax) / std::abs(m.shape(imax));
        m.shape.normalize();
        if (have_w) {
            m.participation.resize(n);
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                m.participation(j) = std::abs(v(j, i) * w(i, j));
                sum += m.participation(j);
            }
            if (sum > 0.0) m.participation /= sum;
        }
        ms.modes.push_back(std::move(m));
    }
    std::sort(ms.modes.begin(), ms.modes.end(), [](const Mode& l, const Mode& r) {
        if (l.f_hz != r.f_hz) return l.f_hz < r.f_hz;
        if (l.lambda.real() != r.lambda.real()) return l.lambda.real() < r.lambda.real();
        return l.lambda.imag() < r.lambda.imag();
    });
    return ms;
}

inline ModeSet eigen_analysis(const LinearModel& lm) {
    return eigen_analysis(lm.a, lm.state_names);
}

/// Participation entries of one mode sorted descending, as (state, value).
inline std::vector<std::pair<std::string, double>> top_participations(
    const ModeSet& ms, const Mode& m, int count = 5) {
    std::vector<std::pair<std::string, double>> out;
    if (m.participation.size() == 0) return out;
    std::vector<int> idx(m.participation.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(), [&](int l, int r) {
        return m.participation(l) > m.participation(r);
    });
    for (int i = 0; i < count && i < static_cast<int>(idx.size()); ++i)
        out.emplace_back(ms.state_names[idx[i]], m.participation(idx[i]));
    return out;
}

struct TargetModeRule {
    double f_min_hz = 0.1;
    double f_max_hz = 2.0;
    // Minimum summed participation of machine speed states; keeps the
    // selection on the electromechanical mode rather than control modes.
    double min_speed_participation = 0.2;
};

/// Lowest-damped oscillatory mode in the band with enough rotor speed
/// content. Returns the index into ms.modes.
inline int select_target_mode(const ModeSet& ms, const TargetModeRule& rule = {}) {
    int best = -1;
    for (size_t i = 0; i < ms.modes.size(); ++i) {
        const Mode& m = ms.modes[i];
        if (!m.is_pair || m.f_hz < rule.f_min_hz || m.f_hz > rule.f_max_hz) continue;
        if (m.participation.size() > 0 && rule.min_speed_participation > 0.0) {
            double speed_part = 0.0;
            for (int j = 0; j < m.participation.size(); ++j) {
                const std::string& n = ms.state_names[j];
                if (n.size() >= 6 && n.compare(n.size() - 6, 6, ".omega") == 0)
                    speed_part += m.participation(j);
            }
            if (speed_part < rule.min_speed_participation) continue;
        }
        if (best < 0 || m.zeta < ms.modes[best].zeta) best = static_cast<int>(i);
    }
    if (best < 0)
        throw Error("no oscillatory mode found in [" + std::to_string(rule.f_min_hz) + ", " +
                    std::to_string(rule.f_max_hz) + "] Hz with speed participation >= " +
                    std::to_string(rule.min_speed_participation));
    return best;
}

// ---------------------------------------------------------------------------
// Mode tracking across a parameter sweep

struct TrackEvent {
    int point = 0;
    std::string what;  // "lost" | "new"
};

struct ModeTrajectory {
    int id = 0;
    std::vector<int> mode_index;  // index into the point's ModeSet, -1 if absent
    std::vector<TrackEvent> events;
};

struct SweepTracks {
    std::vector<ModeTrajectory> trajectories;
    double min_alignment = 0.7;
};

/// Greedy one-to-one matching between consecutive points by eigenvector
/// alignment (ties broken by eigenvalue distance). Modes that fail to match
/// start new trajectories; trajectories that lose their mode record it.
inline SweepTracks track_modes(const std::vector<ModeSet>& points,
                               double min_alignment = 0.7) {
    SweepTracks tr;
    tr.min_alignment = min_alignment;
    if (points.empty()) return tr;

    struct Live { int traj; Eigen::VectorXcd shape; Complex lambda; };
    std::vector<Live> live;
    for (size_t m = 0; m < points[0].modes.size(); ++m) {
        ModeTrajectory t;
        t.id = static_cast<int>(tr.trajectories.size());
        t.mode_index.assign(points.size(), -1);
        t.mode_index[0] = static_cast<int>(m);
        live.push_back({t.id, points[0].modes[m].shape, points[0].modes[m].lambda});
        tr.trajectories.push_back(std::move(t));
    }

    for (size_t p = 1; p < points.size(); ++p) {
        const auto& ms = points[p];
        struct Cand { double mac; double dist; int live_i; int mode_i; };
        std::vector<Cand> cands;
        for (size_t li = 0; li < live.size(); ++li)
            for (size_t mi = 0; mi < ms.modes.size(); ++mi) {
                const double mac = mode_alignment(live[li].shape, points[p - 1].state_names,
                                                  ms.modes[mi].shape, ms.state_names);
                if (mac >= min_alignment)
                    cands.push_back({mac, std::abs(ms.modes[mi].lambda - live[li].lambda),
                                     static_cast<int>(li), static_cast<int>(mi)});
            }
        std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
            if (l.mac != r.mac) return l.mac > r.mac;
            if (l.dist != r.dist) return l.dist < r.dist;
            if (l.live_i != r.live_i) return l.live_i < r.live_i;
            return l.mode_i < r.mode_i;
        });
        std::vector<bool> live_used(live.size(), false), mode_used(ms.modes.size(), false);
        std::vector<Live> next_live;
        for (const auto& c : cands) {
            if (live_used[c.live_i] || mode_used[c.mode_i]) continue;
            live_used[c.live_i] = mode_used[c.mode_i] = true;
            const int tid = live[c.live_i].traj;
            tr.trajectories[tid].mode_index[p] = c.mode_i;
            next_live.push_back({tid, ms.modes[c.mode_i].shape, ms.modes[c.mode_i].lambda});
        }
        for (size_t li = 0; li < live.size(); ++li)
            if (!live_used[li])
                tr.trajectories[live[li].traj].events.push_back(
                    {static_cast<int>(p), "lost"});
        for (size_t mi = 0; mi < ms.modes.size(); ++mi) {
            if (mode_used[mi]) continue;
            ModeTrajectory t;
            t.id = static_cast<int>(tr.trajectories.size());
            t.mode_index.assign(points.size(), -1);
            t.mode_index[p] = static_cast<int>(mi);
            t.events.push_back({static_cast<int>(p), "new"});
            next_live.push_back({t.id, ms.modes[mi].shape, ms.modes[mi].lambda});
            tr.trajectories.push_back(std::move(t));
        }
        live = std::move(next_live);
    }
    return tr;
}

}  // namespace gridpod
