#include "byzsgd/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "byzsgd/schedule.hpp"

namespace byzsgd {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
    throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& path, int line, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) fail(path, line, "trailing characters in number '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(path, line, "expected a number, got '" + v + "'");
    }
}

long to_long(const std::string& path, int line, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) fail(path, line, "trailing characters in integer '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(path, line, "expected an integer, got '" + v + "'");
    }
}

AttackStrategy parse_strategy(const std::string& path, int line, const std::string& v) {
    if (v == "none") return AttackStrategy::none;
    if (v == "reversed") return AttackStrategy::reversed;
    if (v == "partial_drop") return AttackStrategy::partial_drop;
    if (v == "random") return AttackStrategy::random;
    if (v == "lie_model") return AttackStrategy::lie_model;
    if (v == "lie_gradient") return AttackStrategy::lie_gradient;
    if (v == "mute") return AttackStrategy::mute;
    fail(path, line, "unknown attack strategy '" + v + "'");
}

const char* strategy_name(AttackStrategy s) {
    switch (s) {
        case AttackStrategy::none: return "none";
        case AttackStrategy::reversed: return "reversed";
        case AttackStrategy::partial_drop: return "partial_drop";
        case AttackStrategy::random: return "random";
        case AttackStrategy::lie_model: return "lie_model";
        case AttackStrategy::lie_gradient: return "lie_gradient";
        case AttackStrategy::mute: return "mute";
        case AttackStrategy::custom: return "custom";
    }
    return "none";
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct AttackFields {
    AttackStrategy strategy = AttackStrategy::none;
    double scale = 1.0, drop_fraction = 0.10, random_lo = -1.0, random_hi = 1.0;
    double z = 1.035, z_sigma = 0.0;
    bool occupy_always = false;
};

AttackSpec to_spec(const AttackFields& f, AttackTarget target) {
    AttackSpec s;
    s.target = target;
    s.strategy = f.strategy;
    s.scale = f.scale;
    s.drop_fraction = f.drop_fraction;
    s.random_lo = f.random_lo;
    s.random_hi = f.random_hi;
    s.z = f.z;
    s.z_sigma = f.z_sigma;
    s.occupy_always = f.occupy_always;
    return s;
}

}  // namespace

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");

    LoadedConfig out;
    SimConfig& sim = out.sim;
    AttackFields worker_fields, server_fields;
    bool auto_period = true;

    std::string section, raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(path, lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "topology" && section != "task" && section != "schedule" &&
                section != "attacks" && section != "run")
                fail(path, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(path, lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(path, lineno, "empty key or value");
        if (section.empty()) fail(path, lineno, "key outside any section");

        Topology& t = sim.topology;
        TaskSpec& task = sim.task;
        if (section == "topology") {
            if (key == "n_ps") t.n_ps = static_cast<int>(to_long(path, lineno, value));
            else if (key == "f_ps") t.f_ps = static_cast<int>(to_long(path, lineno, value));
            else if (key == "q_ps") t.q_ps = static_cast<int>(to_long(path, lineno, value));
            else if (key == "n_w") t.n_w = static_cast<int>(to_long(path, lineno, value));
            else if (key == "f_w") t.f_w = static_cast<int>(to_long(path, lineno, value));
            else if (key == "q_w") t.q_w = static_cast<int>(to_long(path, lineno, value));
            else if (key == "d") t.d = static_cast<int>(to_long(path, lineno, value));
            else if (key == "mode") {
                if (value == "async") t.mode = Mode::async;
                else if (value == "sync") t.mode = Mode::sync;
                else fail(path, lineno, "mode must be async or sync");
            } else if (key == "T") {
                if (value == "auto" || value == "0") {
                    auto_period = true;
                } else {
                    t.gather_period = static_cast<int>(to_long(path, lineno, value));
                    auto_period = false;
                }
            } else fail(path, lineno, "unknown topology key '" + key + "'");
        } else if (section == "task") {
            if (key == "kind") {
                if (value == "quadratic") task.kind = TaskKind::quadratic;
                else if (value == "logistic") task.kind = TaskKind::logistic;
                else fail(path, lineno, "kind must be quadratic or logistic");
            } else if (key == "theta_star") task.theta_star_fill = to_double(path, lineno, value);
            else if (key == "noise_sigma") task.noise_sigma = to_double(path, lineno, value);
            else if (key == "batch_ref") task.batch_ref = static_cast<int>(to_long(path, lineno, value));
            else if (key == "samples") task.samples = static_cast<int>(to_long(path, lineno, value));
            else if (key == "flip_rate") task.flip_rate = to_double(path, lineno, value);
            else if (key == "dataset_seed")
                task.dataset_seed = static_cast<std::uint64_t>(to_long(path, lineno, value));
            else fail(path, lineno, "unknown task key '" + key + "'");
        } else if (section == "schedule") {
            if (key == "eta0") sim.schedule.eta0 = to_double(path, lineno, value);
            else if (key == "decay") sim.schedule.decay = to_double(path, lineno, value);
            else fail(path, lineno, "unknown schedule key '" + key + "'");
        } else if (section == "attacks") {
            AttackFields* f = nullptr;
            std::string sub;
            if (key.rfind("worker_", 0) == 0) { f = &worker_fields; sub = key.substr(7); }
            else if (key.rfind("server_", 0) == 0) { f = &server_fields; sub = key.substr(7); }
            else fail(path, lineno, "attack keys start with worker_ or server_");
            if (sub == "strategy") f->strategy = parse_strategy(path, lineno, value);
            else if (sub == "scale") f->scale = to_double(path, lineno, value);
            else if (sub == "drop_fraction") f->drop_fraction = to_double(path, lineno, value);
            else if (sub == "random_lo") f->random_lo = to_double(path, lineno, value);
            else if (sub == "random_hi") f->random_hi = to_double(path, lineno, value);
            else if (sub == "z") f->z = to_double(path, lineno, value);
            else if (sub == "z_sigma") f->z_sigma = to_double(path, lineno, value);
            else if (sub == "occupy") {
                if (value == "always") f->occupy_always = true;
                else if (value == "auto") f->occupy_always = false;
                else fail(path, lineno, "occupy must be auto or always");
            } else fail(path, lineno, "unknown attack key '" + key + "'");
        } else if (section == "run") {
            if (key == "steps") sim.steps = to_long(path, lineno, value);
            else if (key == "seed") sim.seed = static_cast<std::uint64_t>(to_long(path, lineno, value));
            else if (key == "batch") sim.batch = static_cast<int>(to_long(path, lineno, value));
            else if (key == "gar") {
                if (value == "mda") sim.gar = Gar::mda;
                else if (value == "average") sim.gar = Gar::average;
                else fail(path, lineno, "gar must be mda or average");
            } else if (key == "theta0") sim.theta0_fill = to_double(path, lineno, value);
            else if (key == "sweep") {
                if (value != "none" && value != "z_sigma" && value != "T" && value != "batch" &&
                    value != "steps")
                    fail(path, lineno, "sweep must be none, z_sigma, T, batch or steps");
                out.sweep.parameter = value == "none" ? "" : value;
            } else if (key == "sweep_values") {
                std::stringstream ss(value);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    out.sweep.values.push_back(to_double(path, lineno, trim(tok)));
            } else fail(path, lineno, "unknown run key '" + key + "'");
        }
    }

    sim.task.d = sim.topology.d;  // the dimension lives in the topology section

    if (worker_fields.strategy != AttackStrategy::none)
        sim.worker_attack = to_spec(worker_fields, AttackTarget::worker_gradients);
    if (server_fields.strategy != AttackStrategy::none)
        sim.server_attack = to_spec(server_fields, AttackTarget::server_models);

    if (auto_period) {
        const Task task = sim.task.build();
        sim.topology.gather_period =
            compute_gather_period(task.lipschitz_constant(), sim.schedule.eta0);
    }
    sim.topology = validate_topology(sim.topology);
    return out;
}

void save_config(const LoadedConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    const SimConfig& sim = cfg.sim;
    const Topology& t = sim.topology;
    out << "[topology]\n"
        << "n_ps = " << t.n_ps << "\nf_ps = " << t.f_ps << "\nq_ps = " << t.q_ps
        << "\nn_w = " << t.n_w << "\nf_w = " << t.f_w << "\nq_w = " << t.q_w
        << "\nd = " << t.d << "\nmode = " << (t.mode == Mode::async ? "async" : "sync")
        << "\nT = " << t.gather_period << "\n\n";
    out << "[task]\n"
        << "kind = " << (sim.task.kind == TaskKind::quadratic ? "quadratic" : "logistic")
        << "\ntheta_star = " << fmt_double(sim.task.theta_star_fill)
        << "\nnoise_sigma = " << fmt_double(sim.task.noise_sigma)
        << "\nbatch_ref = " << sim.task.batch_ref << "\nsamples = " << sim.task.samples
        << "\nflip_rate = " << fmt_double(sim.task.flip_rate)
        << "\ndataset_seed = " << sim.task.dataset_seed << "\n\n";
    out << "[schedule]\n"
        << "eta0 = " << fmt_double(sim.schedule.eta0)
        << "\ndecay = " << fmt_double(sim.schedule.decay) << "\n\n";
    out << "[attacks]\n";
    auto dump = [&](const char* prefix, const std::optional<AttackSpec>& a) {
        const AttackSpec spec = a.value_or(AttackSpec{});
        out << prefix << "strategy = " << strategy_name(spec.strategy) << "\n"
            << prefix << "scale = " << fmt_double(spec.scale) << "\n"
            << prefix << "drop_fraction = " << fmt_double(spec.drop_fraction) << "\n"
            << prefix << "random_lo = " << fmt_double(spec.random_lo) << "\n"
            << prefix << "random_hi = " << fmt_double(spec.random_hi) << "\n"
            << prefix << "z = " << fmt_double(spec.z) << "\n"
            << prefix << "z_sigma = " << fmt_double(spec.z_sigma) << "\n"
            << prefix << "occupy = " << (spec.occupy_always ? "always" : "auto") << "\n";
    };
    dump("worker_", sim.worker_attack);
    dump("server_", sim.server_attack);
    out << "\n[run]\n"
        << "steps = " << sim.steps << "\nseed = " << sim.seed << "\nbatch = " << sim.batch
        << "\ngar = " << (sim.gar == Gar::mda ? "mda" : "average")
        << "\ntheta0 = " << fmt_double(sim.theta0_fill) << "\n";
    if (!cfg.sweep.parameter.empty()) {
        out << "sweep = " << cfg.sweep.parameter << "\nsweep_values = ";
        for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
            if (i) out << ",";
            out << fmt_double(cfg.sweep.values[i]);
        }
        out << "\n";
    }
}

SimConfig apply_sweep_point(SimConfig base, const std::string& parameter, double value) {
    if (parameter == "z_sigma") {
        if (!base.worker_attack)
            throw ConfigError("sweep over z_sigma needs a worker attack");
        base.worker_attack->z_sigma = value;
    } else if (parameter == "T") {
        base.topology.gather_period = static_cast<int>(value);
        base.topology = validate_topology(base.topology);
    } else if (parameter == "batch") {
        base.batch = static_cast<int>(value);
    } else if (parameter == "steps") {
        base.steps = static_cast<long>(value);
    } else {
        throw ConfigError("unknown sweep parameter '" + parameter + "'");
    }
    return base;
}

}  // namespace byzsgd
