#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gridpod/scenarios.hpp"
#include "gridpod/simulate.hpp"

using namespace gridpod;

TEST_CASE("the two-area builder produces the documented layout", "[scenarios]") {
    const auto s = build_two_area();

    REQUIRE(s.buses.size() == 3);
    CHECK(s.bus_index("2") >= 0);
    CHECK(s.bus_index("3") >= 0);
    CHECK(s.bus_index("5") >= 0);

    REQUIRE(s.sgs.size() == 2);
    CHECK(s.sgs[0].name == "SG1");
    CHECK(s.sgs[0].bus == "2");
    CHECK(s.sgs[0].rating_mva == 1500.0);
    CHECK(s.sgs[0].p_mw == 1350.0);
    CHECK(s.sgs[1].name == "SG2");
    CHECK(s.sgs[1].bus == "3");
    CHECK(s.sgs[1].rating_mva == 5000.0);

    REQUIRE(s.gfors.size() == 1);
    CHECK(s.gfors[0].name == "GFOR2");
    CHECK(s.gfors[0].bus == "5");
    CHECK(s.gfors[0].rating_mva == 1500.0);
    CHECK(s.gfors[0].p_mw == 1350.0);

    // Converter transformer rebased onto the 100 MVA system base.
    bool found_tr = false;
    for (const auto& br : s.branches)
        if (br.from == "5" && br.to == "2") {
            found_tr = true;
            CHECK(br.x_pu == Catch::Approx(0.15 * 100.0 / 1500.0).epsilon(1e-12));
        }
    CHECK(found_tr);

    // Filter capacitor lives on the converter bus as a system-base shunt.
    for (const auto& b : s.buses)
        if (b.id == "5")
            CHECK(b.b_shunt_pu == Catch::Approx(0.15 * 1500.0 / 100.0).epsilon(1e-12));

    REQUIRE(s.loads.size() == 2);
    CHECK(s.loads[1].bus == "3");
    CHECK(s.loads[1].p_pu == 26.0);
}

TEST_CASE("the tie-line transfer is calibrated onto its target", "[scenarios]") {
    SECTION("with the converter") {
        const auto s = build_two_area();
        CHECK(measure_line_flow(s, "2", "3") == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("without the converter") {
        TwoAreaOptions o;
        o.with_gfor = false;
        const auto s = build_two_area(o);
        CHECK(s.gfors.empty());
        CHECK(s.buses.size() == 2);
        CHECK(measure_line_flow(s, "2", "3") == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("a different transfer target") {
        TwoAreaOptions o;
        o.line_flow_pu = 2.5;
        const auto s = build_two_area(o);
        CHECK(measure_line_flow(s, "2", "3") == Catch::Approx(2.5).margin(1e-9));
    }
}

TEST_CASE("the builder rejects line reactances outside the workable range",
          "[scenarios]") {
    for (double x : {0.0, -0.1, 10.0, 42.0}) {
        TwoAreaOptions o;
        o.x_line_pu = x;
        CAPTURE(x);
        CHECK_THROWS_AS(build_two_area(o), Error);
    }
    for (double x : {0.01, 0.3, 0.6}) {
        TwoAreaOptions o;
        o.x_line_pu = x;
        CAPTURE(x);
        CHECK_NOTHROW(build_two_area(o));
    }
    // Large reactances are in range but only carry a reduced transfer.
    {
        TwoAreaOptions o;
        o.x_line_pu = 5.0;
        o.line_flow_pu = 0.1;
        CHECK_NOTHROW(build_two_area(o));
    }
}

TEST_CASE("splitting a machine conserves ratings, dispatch and the power flow",
          "[scenarios]") {
    const auto orig = build_two_area();

    SECTION("partial split") {
        const auto s = split_generation_unit(orig, "SG1", 0.25);
        REQUIRE(s.gfors.size() == 2);
        const auto& gfm = s.gfors[1];
        CHECK(gfm.name == "SG1_GFM");
        CHECK(gfm.rating_mva == Catch::Approx(0.25 * 1500.0));
        CHECK(gfm.p_mw == Catch::Approx(0.25 * 1350.0));
        CHECK(s.sgs[0].rating_mva == Catch::Approx(0.75 * 1500.0));
        CHECK(s.sgs[0].p_mw == Catch::Approx(0.75 * 1350.0));
        CHECK(s.bus_index("2_gfm") >= 0);

        // The only new physical element is the converter's damped filter
        // capacitor at a voltage-pinned bus, so the generation total and the
        // tie flow shift by exactly its parasitic loss.
        const double b_cap = 0.15 * (0.25 * 1500.0) / 100.0;
        const double r_damp = 1.0 / (30.0 * b_cap);
        const double cap_loss =
            (Complex(0.0, b_cap) / Complex(1.0, b_cap * r_damp)).real();

        CHECK(measure_line_flow(s, "2", "3") ==
              Catch::Approx(measure_line_flow(orig, "2", "3") - cap_loss).margin(1e-6));

        const auto m0 = assemble(orig);
        const auto m1 = assemble(s);
        Eigen::VectorXd y0(m0->n_outputs()), y1(m1->n_outputs());
        m0->outputs(m0->x0, m0->u0, y0);
        m1->outputs(m1->x0, m1->u0, y1);
        const double pg0 = y0(m0->output_index("sys.p_gen_pu"));
        const double pg1 = y1(m1->output_index("sys.p_gen_pu"));
        CHECK(pg1 - pg0 == Catch::Approx(cap_loss).margin(1e-6));

        // The split model still starts at rest.
        Eigen::VectorXd dx(m1->nx);
        AssembledSystem::NetworkState ws;
        m1->derivatives(m1->x0, m1->u0, dx, ws);
        CHECK(dx.cwiseAbs().maxCoeff() < 1e-8);
    }

    SECTION("full replacement moves the balancing role with the device") {
        const auto s = split_generation_unit(orig, "SG2", 1.0);
        CHECK(s.sgs.size() == 1);
        bool slack_moved = false;
        for (const auto& b : s.buses) {
            if (b.id == "3_gfm") slack_moved = (b.kind == BusKind::Slack);
            if (b.id == "3") CHECK(b.kind == BusKind::PQ);
        }
        CHECK(slack_moved);
        CHECK_NOTHROW(assemble(s));
    }

    SECTION("alpha zero is the identity") {
        const auto s = split_generation_unit(orig, "SG1", 0.0);
        CHECK(json(s) == json(orig));
    }

    SECTION("bad arguments") {
        CHECK_THROWS_AS(split_generation_unit(orig, "SG1", -0.1), Error);
        CHECK_THROWS_AS(split_generation_unit(orig, "SG1", 1.1), Error);
        CHECK_THROWS_AS(split_generation_unit(orig, "NOPE", 0.5), Error);
    }
}

TEST_CASE("the scenario matrix only toggles equipment", "[scenarios]") {
    const auto mx = two_area_matrix();
    REQUIRE(mx.scenarios.size() == 5);

    // The base spec is fully equipped: both channels sized and present.
    REQUIRE(mx.base.gfors.size() == 1);
    REQUIRE(mx.base.gfors[0].pod_p.has_value());
    REQUIRE(mx.base.gfors[0].pod_q.has_value());
    CHECK(mx.base.gfors[0].pod_p->k > 0.0);
    CHECK(mx.base.gfors[0].pod_q->k > 0.0);

    const auto find = [&](const std::string& n) -> const ScenarioDef& {
        for (const auto& d : mx.scenarios)
            if (d.name == n) return d;
        FAIL("missing scenario " + n);
        return mx.scenarios[0];
    };

    CHECK_FALSE(find("base").gfor);
    CHECK(find("gfor").gfor);
    CHECK_FALSE(find("gfor").pod_p);
    CHECK_FALSE(find("gfor").pod_q);
    CHECK(find("gfor-pod-p").pod_p);
    CHECK_FALSE(find("gfor-pod-p").pod_q);
    CHECK_FALSE(find("gfor-pod-q").pod_p);
    CHECK(find("gfor-pod-q").pod_q);
    CHECK(find("gfor-pod-pq").pod_p);
    CHECK(find("gfor-pod-pq").pod_q);

    // Applying a pod scenario keeps the sized parameters; the pod-less one
    // strips them without touching anything else.
    const auto sp = apply_scenario(mx.base, find("gfor-pod-p"));
    REQUIRE(sp.gfors.size() == 1);
    CHECK(sp.gfors[0].pod_p.has_value());
    CHECK_FALSE(sp.gfors[0].pod_q.has_value());
    CHECK(json(sp.gfors[0].params) == json(mx.base.gfors[0].params));

    const auto sg = apply_scenario(mx.base, find("gfor"));
    CHECK_FALSE(sg.gfors[0].pod_p.has_value());

    const auto sb = apply_scenario(mx.base, find("base"));
    CHECK(sb.gfors.empty());
    // The converter bus and transformer leave with it.
    CHECK(sb.bus_index("5") < 0);
}

TEST_CASE("the scenario runner reports every row and isolates failures",
          "[scenarios]") {
    auto mx = two_area_matrix();

    SECTION("a clean matrix yields five comparable rows") {
        const auto rows = run_scenarios(mx);
        REQUIRE(rows.size() == 5);
        for (const auto& r : rows) {
            CAPTURE(r.name);
            CHECK(r.ok);
            CHECK(r.error.empty());
            CHECK(r.f_hz > 0.3);
            CHECK(r.f_hz < 1.2);
            CHECK(r.n_states > 0);
            CHECK_FALSE(r.participations.empty());
            CHECK(r.sim.t.empty());  // no study requested
        }
        // Runs are deterministic bit for bit.
        const auto again = run_scenarios(mx);
        for (size_t i = 0; i < rows.size(); ++i)
            CHECK(rows[i].lambda == again[i].lambda);
    }

    SECTION("one broken scenario does not poison the batch") {
        ScenarioDef bad;
        bad.name = "broken";
        bad.gfor = true;
        bad.load_overrides.push_back({"99", 1.0, 0.0});
        mx.scenarios.push_back(bad);
        const auto rows = run_scenarios(mx);
        REQUIRE(rows.size() == 6);
        int ok = 0;
        for (const auto& r : rows)
            if (r.ok) ++ok;
        CHECK(ok == 5);
        CHECK_FALSE(rows[5].ok);
        CHECK_FALSE(rows[5].error.empty());
    }

    SECTION("an attached study simulates the same disturbance everywhere") {
        ScenarioStudy st;
        Event e;
        e.kind = Event::Kind::LoadScale;
        e.t = 0.1;
        e.bus = "2";
        e.factor = 1.001;
        st.events.push_back(e);
        st.opt.t_end = 0.3;
        st.opt.output_dt = 5e-3;
        const auto rows = run_scenarios(mx, {}, {}, st);
        for (const auto& r : rows) {
            CAPTURE(r.name);
            REQUIRE(r.ok);
            CHECK_FALSE(r.sim.t.empty());
            CHECK(r.sim.t.back() == Catch::Approx(0.3).margin(1e-3));
            // Channel sets differ with the equipment on purpose.
            const bool has_gfor = !r.spec.gfors.empty();
            CHECK((r.sim.channel_index("GFOR2.P_pu") >= 0) == has_gfor);
        }
    }
}

TEST_CASE("parameter paths address every supported kind", "[scenarios]") {
    auto mx = two_area_matrix();

    SECTION("all kinds land on their fields") {
        auto s = mx.base;
        apply_param_path(s, "branch:2-3:x", 0.37);
        CHECK(s.branches[0].x_pu == 0.37);
        // The reversed orientation addresses the same branch.
        apply_param_path(s, "branch:3-2:x", 0.42);
        CHECK(s.branches[0].x_pu == 0.42);
        apply_param_path(s, "load:3:p", 25.5);
        double p3 = 0.0;
        for (const auto& l : s.loads)
            if (l.bus == "3") p3 = l.p_pu;
        CHECK(p3 == 25.5);
        apply_param_path(s, "bus:5:vset", 1.02);
        for (const auto& b : s.buses)
            if (b.id == "5") CHECK(b.v_set_pu == 1.02);
        apply_param_path(s, "sg:SG1:h", 3.5);
        CHECK(s.sgs[0].machine.h_s == 3.5);
        apply_param_path(s, "gfor:GFOR2:rf", 0.04);
        CHECK(s.gfors[0].params.r_f == 0.04);
        apply_param_path(s, "gfor:GFOR2:k_pod_p", 55.0);
        CHECK(s.gfors[0].pod_p->k == 55.0);
    }

    SECTION("malformed or unknown paths are rejected") {
        auto s = mx.base;
        CHECK_THROWS_AS(apply_param_path(s, "nonsense", 1.0), Error);
        CHECK_THROWS_AS(apply_param_path(s, "branch:2-3:zzz", 1.0), Error);
        CHECK_THROWS_AS(apply_param_path(s, "branch:1-9:x", 1.0), Error);
        CHECK_THROWS_AS(apply_param_path(s, "load:7:p", 1.0), Error);
        CHECK_THROWS_AS(apply_param_path(s, "teapot:2:x", 1.0), Error);
        CHECK_THROWS_AS(apply_param_path(s, "sg:NOPE:h", 1.0), Error);
    }
}

TEST_CASE("a singleton sweep equals a single modes run", "[scenarios]") {
    TwoAreaOptions o;
    o.with_gfor = false;
    const auto spec = build_two_area(o);

    SweepSpec def;
    def.param_path = "branch:2-3:x";
    def.lo = 0.1;
    def.hi = 0.7;
    def.n = 1;
    const auto res = run_sweep(spec, def);
    REQUIRE(res.points.size() == 1);
    REQUIRE(res.points[0].ok);
    CHECK(res.points[0].value == 0.1);

    auto direct = spec;
    apply_param_path(direct, "branch:2-3:x", 0.1);
    const auto ms = eigen_analysis(linearize(assemble(direct)));
    REQUIRE(res.points[0].modes.eigenvalues.size() == ms.eigenvalues.size());
    for (int i = 0; i < ms.eigenvalues.size(); ++i)
        CHECK(res.points[0].modes.eigenvalues(i) == ms.eigenvalues(i));
}

TEST_CASE("degenerate sweep grids are rejected", "[scenarios]") {
    const auto spec = build_two_area();
    SweepSpec def;
    def.param_path = "branch:2-3:x";
    def.lo = 0.1;
    def.hi = 0.1;
    def.n = 5;
    CHECK_THROWS_AS(run_sweep(spec, def), Error);
    def.n = 0;
    CHECK_THROWS_AS(run_sweep(spec, def), Error);
}

TEST_CASE("sweeps run every point and tolerate per-point failures",
          "[scenarios]") {
    TwoAreaOptions o;
    o.with_gfor = false;
    const auto spec = build_two_area(o);
    SweepSpec def;
    def.param_path = "branch:2-3:x";
    def.lo = -0.05;  // first grid point is invalid, the rest are fine
    def.hi = 0.25;
    def.n = 4;
    const auto res = run_sweep(spec, def);
    REQUIRE(res.points.size() == 4);
    CHECK_FALSE(res.points[0].ok);
    CHECK_FALSE(res.points[0].error.empty());
    for (int i = 1; i < 4; ++i) {
        CAPTURE(i);
        CHECK(res.points[i].ok);
    }
    CHECK(res.tracked_points == std::vector<int>{1, 2, 3});
}

TEST_CASE("the tracked target mode slows down as the tie weakens", "[scenarios]") {
    TwoAreaOptions o;
    o.with_gfor = false;
    const auto spec = build_two_area(o);
    SweepSpec def;
    def.param_path = "branch:2-3:x";
    def.lo = 0.05;
    def.hi = 0.35;
    def.n = 6;
    const auto res = run_sweep(spec, def);
    const auto track = tracked_target_mode(res, 0.1);
    REQUIRE(track.size() == 6);
    for (size_t i = 0; i < track.size(); ++i) {
        CAPTURE(i);
        REQUIRE(track[i].present);
        CHECK(track[i].zeta > -0.05);
        CHECK(track[i].zeta < 0.5);
        if (i > 0) CHECK(track[i].f_hz < track[i - 1].f_hz);
    }
}
