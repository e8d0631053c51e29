// byzsgd CLI: run simulations from a config file, validate configurations,
// and execute the acceptance suites.
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "byzsgd/acceptance.hpp"
#include "byzsgd/config.hpp"
#include "byzsgd/csv.hpp"

namespace fs = std::filesystem;
using namespace byzsgd;

namespace {

std::string point_name(const std::string& parameter, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", value);
    std::string v(buf);
    for (char& c : v)
        if (c == '.' || c == '-') c = '_';
    return "metrics_" + parameter + "_" + v + ".csv";
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int cmd_run(const std::string& config_path, const std::string& out_dir, long seed_override,
            const std::string& mode_override) {
    LoadedConfig cfg = load_config(config_path);
    if (seed_override >= 0) cfg.sim.seed = static_cast<std::uint64_t>(seed_override);
    if (!mode_override.empty()) {
        cfg.sim.topology.mode = mode_override == "sync" ? Mode::sync : Mode::async;
        cfg.sim.topology = validate_topology(cfg.sim.topology);
    }
    fs::create_directories(out_dir);

    std::vector<std::pair<std::string, SimConfig>> points;
    if (cfg.sweep.parameter.empty()) {
        points.emplace_back("metrics.csv", cfg.sim);
    } else {
        for (double v : cfg.sweep.values)
            points.emplace_back(point_name(cfg.sweep.parameter, v),
                                apply_sweep_point(cfg.sim, cfg.sweep.parameter, v));
    }

    for (const auto& [name, sim] : points) {
        const SimResult res = run(sim);
        print_warnings(res.warnings);
        const fs::path out = fs::path(out_dir) / name;
        emit_csv(res.trace, out.string());
        const auto& last = res.trace.back();
        std::printf("%s: %ld steps, final grad_norm %.6g, delta %.6g -> %s\n", name.c_str(),
                    sim.steps, last.grad_norm, last.delta, out.string().c_str());
        if (sim.topology.mode == Mode::sync)
            std::printf("  pulls %ld, false-negative ratio %.4f, forged adopted %ld\n",
                        res.filters.total_pulls, res.filters.false_negative_ratio(),
                        res.filters.adopted_forged);
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const LoadedConfig cfg = load_config(config_path);
    print_warnings(cfg.sim.topology.warnings);
    std::printf("topology ok: n_ps=%d f_ps=%d q_ps=%d n_w=%d f_w=%d q_w=%d d=%d mode=%s T=%d\n",
                cfg.sim.topology.n_ps, cfg.sim.topology.f_ps, cfg.sim.topology.q_ps,
                cfg.sim.topology.n_w, cfg.sim.topology.f_w, cfg.sim.topology.q_w,
                cfg.sim.topology.d, cfg.sim.topology.mode == Mode::sync ? "sync" : "async",
                cfg.sim.topology.gather_period);

    const Task task = cfg.sim.task.build();
    ParamVector theta0(static_cast<std::size_t>(cfg.sim.topology.d), cfg.sim.theta0_fill);
    if (l2_norm(task.true_gradient(theta0)) == 0.0) {
        std::printf("assumption check skipped: zero gradient at theta0\n");
        return 0;
    }
    Rng rng = Rng::child(cfg.sim.seed, 0, Purpose::measure);
    const int batches[] = {cfg.sim.batch, 4 * cfg.sim.batch, 16 * cfg.sim.batch};
    const AssumptionReport rep = measure_variance_norm_ratio(
        task, theta0, batches, 1000, cfg.sim.topology.n_w, cfg.sim.topology.f_w, rng);
    for (const auto& [b, ratio] : rep.ratio_by_batch)
        std::printf("variance-to-norm ratio at batch %d: %.4f\n", b, ratio);
    std::printf("sigma' estimate %.4g, kappa margin %.4g -> bound %s at theta0\n",
                rep.sigma_prime_est, rep.kappa_margin,
                rep.eq3_holds ? "satisfied" : "violated");
    return 0;
}

int cmd_accept(const std::string& suite) {
    const auto results = run_acceptance(suite);
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s %-32s %s [%.1fs]\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        if (!r.passed) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byzantine-resilient SGD simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", mode_override, suite = "all";
    long seed_override = -1;

    auto* runc = app.add_subcommand("run", "run the configured simulation(s)");
    runc->add_option("--config", config_path, "config file")->required();
    runc->add_option("--out", out_dir, "output directory for CSV metrics");
    runc->add_option("--seed", seed_override, "override the master seed");
    runc->add_option("--mode", mode_override, "override the mode")
        ->check(CLI::IsMember({"sync", "async"}));

    auto* val = app.add_subcommand("validate", "topology + assumption checks only");
    val->add_option("--config", config_path, "config file")->required();

    auto* acc = app.add_subcommand("accept", "run an acceptance suite");
    std::vector<std::string> names = acceptance_suites();
    names.push_back("all");
    acc->add_option("--suite", suite, "suite name")->check(CLI::IsMember(names));

    CLI11_PARSE(app, argc, argv);

    try {
        if (runc->parsed()) return cmd_run(config_path, out_dir, seed_override, mode_override);
        if (val->parsed()) return cmd_validate(config_path);
        return cmd_accept(suite);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
