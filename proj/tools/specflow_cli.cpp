// Command-line laboratory for the geometric Lorenz model: orbit simulation,
// return-map analysis, hyperbolicity verification, the holonomy gap
// certificate, gluing-orbit searches and the mixing/specification controls.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "specflow/catmap.hpp"
#include "specflow/errors.hpp"
#include "specflow/flow.hpp"
#include "specflow/hyperbolicity.hpp"
#include "specflow/io.hpp"
#include "specflow/manifolds.hpp"
#include "specflow/return_map.hpp"
#include "specflow/specification.hpp"
#include "specflow/svg.hpp"

namespace fs = std::filesystem;
using namespace specflow;

namespace {

struct Cli {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
};

RunConfig load_config(const Cli& cli) {
    RunConfig cfg = cli.config_path.empty() ? RunConfig{} : RunConfig::from_file(cli.config_path);
    cfg.params.validate();
    if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
    return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void stamp(json& j, const RunConfig& cfg) { j["config_hash"] = cfg.hash(); }

void write_config_copy(const RunConfig& cfg) {
    write_text(cfg.canonical_text(), out_path(cfg, "config.used"));
}

PeriodicPoint pick_periodic(const GeometricLorenzParams& g) {
    const auto pts = find_periodic(g, 2);
    if (pts.empty()) throw Error("no period-2 orbit found");
    return pts.back();  // positive-x representative of the lowest period found
}

int cmd_simulate(const RunConfig& cfg, double x0, double y0, double t_max, double dt) {
    write_config_copy(cfg);
    const Trajectory traj = sample_orbit(cfg.params, sigma_state(x0, y0), t_max, dt);
    write_trajectory_csv(traj, out_path(cfg, "trajectory.csv"));
    write_crossings_csv(traj, out_path(cfg, "crossings.csv"));
    std::printf("simulate: %zu samples, %zu crossings -> %s\n", traj.samples.size(),
                traj.crossings.size(), cfg.out_dir.c_str());
    return 0;
}

int cmd_return_map(const RunConfig& cfg, int max_period) {
    write_config_copy(cfg);
    std::vector<PeriodicPoint> all;
    for (int n = 1; n <= max_period; ++n) {
        const auto pts = find_periodic(cfg.params, n);
        all.insert(all.end(), pts.begin(), pts.end());
    }
    write_periodic_csv(all, out_path(cfg, "periodic_orbits.csv"));
    std::printf("return-map: %zu periodic points up to period %d -> periodic_orbits.csv\n",
                all.size(), max_period);
    return 0;
}

int cmd_verify_hyperbolic(const RunConfig& cfg, int returns) {
    write_config_copy(cfg);
    json j = hyperbolicity_report(cfg.params, returns, {0.378462, 0.11911});
    stamp(j, cfg);
    write_json(j, out_path(cfg, "hyperbolicity.json"));
    std::printf("verify-hyperbolic: lambda_prime=%.6f domination=%.6f sectional_rate=%.6f\n",
                j["lambda_prime"].get<double>(), j["worst_domination_margin"].get<double>(),
                j["sectional_rate"].get<double>());
    return 0;
}

int cmd_manifolds(const RunConfig& cfg) {
    write_config_copy(cfg);
    const auto p = pick_periodic(cfg.params);
    const auto chart = build_holonomy_chart(cfg.params, p, cfg.mu, cfg.mu_u);
    const auto bowen = bowen_ball_in_stable(cfg.params, p, 1e-2, 12, cfg.seed, 1000);
    const auto rm = ReturnMapParams::from(cfg.params);
    const auto depth = preimage_density_depth(rm, p.x_star, 1e-2, 30);

    json j;
    j["periodic"] = {{"x_star", p.x_star},
                     {"y_star", p.y_star},
                     {"period_n", p.period_n},
                     {"flow_period", p.flow_period},
                     {"itinerary", p.itinerary.str()}};
    j["chart"] = {{"mu", chart.mu},
                  {"mu_u", chart.mu_u},
                  {"l_const", chart.l_const},
                  {"kappa_min", chart.kappa_min},
                  {"injectivity_error", chart_injectivity_error(chart, 200)},
                  {"commutation_error", holonomy_commutation_error(chart, 8)},
                  {"holonomy_lipschitz", holonomy_lipschitz(chart, 20)}};
    j["bowen_tracking"] = {{"all_within", bowen.all_within},
                           {"n_tracked", bowen.n_tracked},
                           {"measured_const", bowen.measured_const},
                           {"worst_distance", bowen.worst_distance}};
    j["unstable_tangent_in_center_cone"] = check_tangency_unstable_in_center(cfg.params, p);
    j["preimage_density_depth"] = depth ? json(*depth) : json(nullptr);
    stamp(j, cfg);
    write_json(j, out_path(cfg, "manifolds.json"));
    std::printf("manifolds: chart ok, L=%.3f, density depth=%d\n", chart.l_const,
                depth ? *depth : -1);
    return 0;
}

int cmd_certify_gap(const RunConfig& cfg, double T) {
    write_config_copy(cfg);
    const auto p = pick_periodic(cfg.params);
    const auto chart = build_holonomy_chart(cfg.params, p, cfg.mu, cfg.mu_u);
    const auto cert = compute_gap_certificate(cfg.params, chart, T, cfg.delta_seed, cfg.grid_h);
    json j = gap_certificate_json(cert);
    stamp(j, cfg);
    write_json(j, out_path(cfg, "gap_certificate.json"));

    const auto sp = unstable_separatrix(cfg.params, +1, T, cfg.delta_seed, 0.05);
    const auto sm = unstable_separatrix(cfg.params, -1, T, cfg.delta_seed, 0.05);
    json fig = gap_figure_data(cfg.params, chart, cert, sp, sm);
    stamp(fig, cfg);
    write_json(fig, out_path(cfg, "gap_figure_data.json"));
    // Figures are always rendered from the serialized data, never from
    // in-memory state.
    render_gap_figure(read_json(out_path(cfg, "gap_figure_data.json")),
                      out_path(cfg, "gap_figure.svg"));
    std::printf("certify-gap: T=%g points=%zu clearance=%.5g d_star=%.5g eps=%.5g valid=%d\n", T,
                cert.projected_points.size(), cert.clearance, cert.d_star, cert.eps,
                static_cast<int>(cert.valid));
    return cert.valid ? 0 : 2;
}

int cmd_test_spec(const RunConfig& cfg, const Cli& cli, const std::string& instance_path, double T,
                  double eps_override) {
    write_config_copy(cfg);
    json j;
    if (!instance_path.empty()) {
        const auto inst = instance_from_json(cfg.params, read_json(instance_path));
        const auto res = search_gluing_forward(cfg.params, inst, 1e-2);
        j["kind"] = "forward";
        j["outcome"] =
            res.outcome == ShadowingOutcome::Witness ? "Witness" : "ExhaustedNoWitness";
        j["eps"] = res.eps;
        j["grid_h"] = res.grid_h;
        if (res.outcome == ShadowingOutcome::Witness) {
            j["witness"] = {{"x", res.witness.x}, {"y", res.witness.y}};
            j["witness_deviation"] = res.witness_deviation;
        } else {
            j["best_deviation"] = res.best_deviation;
            j["note"] = "claim limited to the stated grid resolution";
        }
    } else {
        const auto p = pick_periodic(cfg.params);
        const auto chart = build_holonomy_chart(cfg.params, p, cfg.mu, cfg.mu_u);
        const auto cert = compute_gap_certificate(cfg.params, chart, T, cfg.delta_seed, cfg.grid_h);
        ObstructionInstance inst;
        inst.t1 = cfg.t1;
        inst.T = T;
        inst.t2 = cfg.t2;
        inst.eps = eps_override > 0.0 ? eps_override : cert.eps;
        inst.w = cert.w;
        inst.delta_seed = cfg.delta_seed;
        const auto res = search_gluing_lorenz(cfg.params, inst, cfg.grid_h, cli.threads);
        j["kind"] = "obstruction";
        j["T"] = T;
        j["eps"] = inst.eps;
        j["eps_critical"] = cert.eps_critical;
        j["d_star"] = cert.d_star;
        j["grid_h"] = res.grid_h;
        j["candidates"] = res.candidates;
        j["outcome"] =
            res.outcome == ShadowingOutcome::Witness ? "Witness" : "ExhaustedNoWitness";
        j["best_deviation"] = res.best_deviation;
        j["resolution_limited"] = res.resolution_limited_regime;
        j["note"] = res.note;
    }
    stamp(j, cfg);
    write_json(j, out_path(cfg, "shadowing_result.json"));
    std::printf("test-spec: %s\n", j["outcome"].get<std::string>().c_str());
    return 0;
}

int cmd_mixing(const RunConfig& cfg, const std::string& system, int boxes) {
    write_config_copy(cfg);
    MixingReport rep;
    if (system == "lorenz") {
        rep = test_mixing(box_graph_lorenz(cfg.params, boxes, 100), 4 * boxes);
    } else if (system == "catmap") {
        rep = test_mixing(box_graph_catmap(boxes, 100), 4 * boxes * boxes);
    } else if (system == "rotation") {
        rep = test_mixing(box_graph_rotation(boxes, 1, 4, 100), 4 * boxes);
    } else {
        throw InvalidParamsError("unknown system: " + system);
    }
    json j;
    j["system"] = system;
    j["boxes"] = boxes;
    j["mixing"] = rep.mixing;
    j["strongly_connected"] = rep.strongly_connected;
    j["period_gcd"] = rep.period_gcd;
    j["n_visited"] = rep.n_visited;
    stamp(j, cfg);
    write_json(j, out_path(cfg, "mixing_" + system + ".json"));
    std::printf("mixing(%s, %d boxes): %s\n", system.c_str(), boxes,
                rep.mixing ? "true" : "false");
    return 0;
}

int cmd_control_catmap(const RunConfig& cfg, int instances) {
    write_config_copy(cfg);
    json j = cat_control_report(cfg.seed, instances, 0.05, 10, 2048);
    stamp(j, cfg);
    write_json(j, out_path(cfg, "catmap_control.json"));
    std::printf("control-catmap: %d/%d witnesses\n", j["witnesses_found"].get<int>(), instances);
    return j["witnesses_found"].get<int>() == instances ? 0 : 2;
}

std::map<std::string, double> flatten_outcome(const json& summary) {
    std::map<std::string, double> m;
    m["lambda_prime"] = summary.at("lambda_prime").get<double>();
    m["sectional_rate"] = summary.at("sectional_rate").get<double>();
    m["l_const"] = summary.at("l_const").get<double>();
    for (const auto& row : summary.at("obstruction_rows")) {
        char key[64];
        const double T = row.at("T").get<double>();
        std::snprintf(key, sizeof(key), "T%.0f_n_projected", T);
        m[key] = row.at("n_projected").get<double>();
        std::snprintf(key, sizeof(key), "T%.0f_gap_clearance", T);
        m[key] = row.at("gap_clearance").get<double>();
        std::snprintf(key, sizeof(key), "T%.0f_d_star", T);
        m[key] = row.at("d_star").get<double>();
        std::snprintf(key, sizeof(key), "T%.0f_best_deviation", T);
        m[key] = row.at("best_deviation").get<double>();
    }
    return m;
}

int cmd_reproduce_all(const RunConfig& cfg, const Cli& cli, const std::string& baseline_path,
                      const std::string& write_baseline_path) {
    write_config_copy(cfg);
    const auto& g = cfg.params;

    json summary;
    summary["config_hash"] = cfg.hash();

    // Hyperbolic structure.
    json hyp = hyperbolicity_report(g, 10000, {0.378462, 0.11911});
    stamp(hyp, cfg);
    write_json(hyp, out_path(cfg, "hyperbolicity.json"));
    summary["lambda_prime"] = hyp["lambda_prime"];
    summary["worst_domination_margin"] = hyp["worst_domination_margin"];
    summary["sectional_rate"] = hyp["sectional_rate"];

    // Periodic orbits and the chart.
    const auto p = pick_periodic(g);
    {
        std::vector<PeriodicPoint> all;
        for (int n = 1; n <= 4; ++n) {
            const auto pts = find_periodic(g, n);
            all.insert(all.end(), pts.begin(), pts.end());
        }
        write_periodic_csv(all, out_path(cfg, "periodic_orbits.csv"));
    }
    const auto chart = build_holonomy_chart(g, p, cfg.mu, cfg.mu_u);
    const auto bowen = bowen_ball_in_stable(g, p, 1e-2, 12, cfg.seed, 1000);
    summary["l_const"] = chart.l_const;
    summary["bowen_measured_const"] = bowen.measured_const;

    // The obstruction experiment over the T sweep, plus one loose probe.
    const auto out =
        run_obstruction_experiment(g, chart, cfg.t_sweep, cfg.t1, cfg.t2, cfg.delta_seed,
                                   cfg.grid_h, cli.threads, {10.0});
    json obs = obstruction_json(out);
    stamp(obs, cfg);
    write_json(obs, out_path(cfg, "obstruction_experiment.json"));
    write_text(obstruction_table(out), out_path(cfg, "obstruction_table.txt"));
    write_text(obstruction_csv(out), out_path(cfg, "obstruction_table.csv"));

    // Gap certificate artifacts for the last T.
    {
        const auto& cert = out.last_certificate;
        json cj = gap_certificate_json(cert);
        stamp(cj, cfg);
        write_json(cj, out_path(cfg, "gap_certificate.json"));
        const auto sp = unstable_separatrix(g, +1, cert.t_used, cfg.delta_seed, 0.05);
        const auto sm = unstable_separatrix(g, -1, cert.t_used, cfg.delta_seed, 0.05);
        json fig = gap_figure_data(g, chart, cert, sp, sm);
        stamp(fig, cfg);
        write_json(fig, out_path(cfg, "gap_figure_data.json"));
        render_gap_figure(read_json(out_path(cfg, "gap_figure_data.json")),
                          out_path(cfg, "gap_figure.svg"));
    }

    // Mixing results and the positive control.
    const auto mix_lorenz = test_mixing(box_graph_lorenz(g, 1024, 100), 4096);
    const auto mix_rotation = test_mixing(box_graph_rotation(64, 1, 4, 100), 1000);
    json cat = cat_control_report(cfg.seed, 20, 0.05, 10, 2048);
    stamp(cat, cfg);
    write_json(cat, out_path(cfg, "catmap_control.json"));

    const bool lorenz_spec_fails = out.all_exhausted;
    const bool cat_spec_passes = cat["witnesses_found"].get<int>() == 20;
    summary["mixing"] = {{"lorenz", mix_lorenz.mixing}, {"rotation_control", mix_rotation.mixing}};
    summary["specification"] = {{"lorenz", lorenz_spec_fails ? "fail" : "unexpected-witness"},
                                {"catmap_control", cat_spec_passes ? "pass" : "unexpected-fail"}};
    json rows = obs["rows"];
    summary["obstruction_rows"] = rows;
    bool ok = lorenz_spec_fails && cat_spec_passes && mix_lorenz.mixing &&
              !mix_rotation.mixing && out.last_certificate.valid;
    summary["certificates_hold"] = ok;

    const auto measured = flatten_outcome(summary);
    if (!write_baseline_path.empty()) {
        RegressionBaseline base;
        base.config_hash = cfg.hash();
        for (const auto& [name, value] : measured) {
            RegressionBaseline::Entry e;
            e.value = value;
            e.rel_tol = name.find("n_projected") != std::string::npos ? 0.0 : 0.05;
            base.values[name] = e;
        }
        write_json(base.to_json(), write_baseline_path);
        std::printf("baseline written to %s\n", write_baseline_path.c_str());
    }
    if (!baseline_path.empty()) {
        const auto base = RegressionBaseline::from_json(read_json(baseline_path));
        const auto violations = base.compare(measured, cfg.hash());
        summary["baseline_violations"] = violations;
        for (const auto& v : violations) std::printf("baseline violation: %s\n", v.c_str());
        if (!violations.empty()) ok = false;
    }
    write_json(summary, out_path(cfg, "summary.json"));

    std::printf("%s", obstruction_table(out).c_str());
    std::printf("reproduce-all: mixing=%s, specification: lorenz=%s catmap=%s -> %s\n",
                mix_lorenz.mixing ? "true" : "false", lorenz_spec_fails ? "fail" : "WITNESS?",
                cat_spec_passes ? "pass" : "FAIL?", ok ? "ok" : "certificate-failed");
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometric Lorenz specification laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    Cli cli;
    app.add_option("--config", cli.config_path, "key=value config file");
    app.add_option("--out", cli.out_dir, "output directory (overrides config)");
    app.add_option("--threads", cli.threads, "worker threads for grid searches");

    double x0 = 0.35, y0 = 0.1, t_max = 100.0, dt = 0.01;
    auto* sim = app.add_subcommand("simulate", "sample an orbit and its section crossings");
    sim->add_option("--x0", x0);
    sim->add_option("--y0", y0);
    sim->add_option("--t-max", t_max);
    sim->add_option("--dt", dt);

    int max_period = 6;
    auto* rmc = app.add_subcommand("return-map", "catalog periodic orbits of the return map");
    rmc->add_option("--max-period", max_period);

    int returns = 10000;
    auto* ver = app.add_subcommand("verify-hyperbolic", "splitting, cones, sectional expansion");
    ver->add_option("--returns", returns);

    app.add_subcommand("manifolds", "chart, holonomy and stable-set diagnostics");

    double T = 50.0;
    auto* gap = app.add_subcommand("certify-gap", "gap certificate + figure for one T");
    gap->add_option("--T", T);

    std::string instance_path;
    double eps_override = 0.0;
    auto* spec = app.add_subcommand("test-spec", "gluing-orbit search");
    spec->add_option("--instance", instance_path, "JSON instance (forward segments)");
    spec->add_option("--T", T);
    spec->add_option("--eps", eps_override, "override the derived epsilon");

    std::string system = "lorenz";
    int boxes = 1024;
    auto* mix = app.add_subcommand("mixing", "box-graph mixing check");
    mix->add_option("--system", system, "lorenz | catmap | rotation");
    mix->add_option("--boxes", boxes);

    int instances = 20;
    auto* cat = app.add_subcommand("control-catmap", "positive control gluing searches");
    cat->add_option("--instances", instances);

    std::string baseline_path, write_baseline_path;
    auto* rep =
        app.add_subcommand("reproduce-all", "full experiment: obstruction + controls + summary");
    rep->add_option("--baseline", baseline_path, "compare outcomes against a baseline file");
    rep->add_option("--write-baseline", write_baseline_path, "freeze outcomes to a baseline file");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load_config(cli);
        if (sim->parsed()) return cmd_simulate(cfg, x0, y0, t_max, dt);
        if (rmc->parsed()) return cmd_return_map(cfg, max_period);
        if (ver->parsed()) return cmd_verify_hyperbolic(cfg, returns);
        if (app.get_subcommand("manifolds")->parsed()) return cmd_manifolds(cfg);
        if (gap->parsed()) return cmd_certify_gap(cfg, T);
        if (spec->parsed()) return cmd_test_spec(cfg, cli, instance_path, T, eps_override);
        if (mix->parsed()) return cmd_mixing(cfg, system, boxes);
        if (cat->parsed()) return cmd_control_catmap(cfg, instances);
        if (rep->parsed()) return cmd_reproduce_all(cfg, cli, baseline_path, write_baseline_path);
    } catch (const InvalidParamsError& e) {
        std::fprintf(stderr, "error: invalid config: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
