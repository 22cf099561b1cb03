#include "fracmove/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "fracmove/errors.hpp"

namespace fracmove {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed access to one JSON object; unknown keys are rejected by finish().
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key)) return need(key, fallback);
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(where(key) + " must be finite");
        return x;
    }

    std::uint64_t integer(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
        if (!has(key)) return need(key, fallback);
        const json& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError(where(key) + " must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key)) return need(key, fallback);
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
        return v.get<std::string>();
    }

    std::vector<double> vector(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
        if (!has(key)) return need(key, fallback);
        const json& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::optional<Section> child(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return Section(j_.at(key), path_.empty() ? key : path_ + "." + key);
    }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError("unknown configuration key '" + where(it.key()) + "'");
        }
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    template <class T>
    T need(const std::string& key, const std::optional<T>& fallback) const {
        if (!fallback) throw ConfigError("missing required key '" + where(key) + "'");
        return *fallback;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Point to_point(const std::vector<double>& v, int dim, const std::string& what) {
    if (static_cast<int>(v.size()) != dim) {
        throw ConfigError(what + " must have " + std::to_string(dim) + " component(s)");
    }
    return {v[0], dim == 2 ? v[1] : 0.0};
}

ProfileSpec parse_profile(Section s, int dim) {
    ProfileSpec p;
    p.kind = s.string("kind", std::string("gaussian"));
    parse_profile_kind(p.kind);
    if (p.kind == "sampled") {
        p.path = s.string("path");
        p.amplitude = 0.0;
        p.width = 0.0;
        p.center = {0.0, 0.0};
    } else {
        p.center = to_point(s.vector("center", std::vector<double>(static_cast<std::size_t>(dim), 0.5)), dim,
                            s.where("center"));
        p.width = s.number("width", 0.05);
        p.amplitude = s.number("amplitude", 1.0);
        if (!(p.width > 0.0)) throw ConfigError(s.where("width") + " must be positive");
    }
    s.finish();
    return p;
}

json point_json(const Point& p, int dim) {
    return dim == 1 ? json::array({p[0]}) : json::array({p[0], p[1]});
}

json profile_json(const ProfileSpec& p, int dim) {
    if (p.kind == "sampled") return {{"kind", p.kind}, {"path", p.path}};
    return {{"kind", p.kind}, {"center", point_json(p.center, dim)}, {"width", p.width}, {"amplitude", p.amplitude}};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    Section root(j, "");
    c.alpha = root.number("alpha");
    if (!(c.alpha > 0.0 && c.alpha <= 2.0)) throw ConfigError("alpha must lie in (0, 2]");

    if (auto t = root.child("time")) {
        c.t_final = t->number("t_final", 1.0);
        c.n_steps = t->integer("n_steps", 200);
        t->finish();
    }
    if (!(c.t_final > 0.0)) throw ConfigError("time.t_final must be positive");
    if (c.n_steps < 2) throw ConfigError("time.n_steps must be >= 2");

    if (auto d = root.child("domain")) {
        c.dim = static_cast<int>(d->integer("dim", 2));
        if (c.dim != 1 && c.dim != 2) throw ConfigError("domain.dim must be 1 or 2");
        const std::size_t nd = static_cast<std::size_t>(c.dim);
        std::vector<std::vector<double>> ext(nd, std::vector<double>{0.0, 1.0});
        if (d->has("extents")) {
            const json& e = d->raw("extents");
            if (!e.is_array() || e.size() != nd) throw ConfigError("domain.extents must list one [lo, hi] per axis");
            for (std::size_t a = 0; a < nd; ++a) {
                if (!e[a].is_array() || e[a].size() != 2 || !e[a][0].is_number() || !e[a][1].is_number()) {
                    throw ConfigError("domain.extents entries must be [lo, hi]");
                }
                ext[a] = {e[a][0].get<double>(), e[a][1].get<double>()};
            }
        }
        std::vector<double> nodes(nd, 65.0);
        if (d->has("nodes") && d->has("cells")) throw ConfigError("domain: give either nodes or cells");
        if (d->has("nodes")) nodes = d->vector("nodes");
        if (d->has("cells")) {
            nodes = d->vector("cells");
            for (auto& n : nodes) n += 2.0;
        }
        if (nodes.size() != nd) throw ConfigError("domain.nodes must have one entry per axis");
        for (std::size_t a = 0; a < nd; ++a) {
            if (!(ext[a][0] < ext[a][1])) throw ConfigError("domain.extents: need lo < hi");
            if (nodes[a] != std::floor(nodes[a]) || nodes[a] < 5) {
                throw ConfigError("domain: at least 5 nodes (3 interior) per axis");
            }
            c.axes[a] = Axis{ext[a][0], ext[a][1], static_cast<std::size_t>(nodes[a])};
        }
        if (c.dim == 1) c.axes[1] = Axis{0.0, 1.0, 1};
        d->finish();
    }
    const SpaceGrid grid = c.space_grid();

    if (auto o = root.child("omega")) {
        c.frame_width = o->number("frame_width", 0.2);
        o->finish();
    }
    if (!(c.frame_width > 0.0 && c.frame_width < 0.5 * grid.min_extent())) {
        throw ConfigError("omega.frame_width must lie in (0, half the smallest extent)");
    }

    bool have_q = false;
    if (auto m = root.child("motion")) {
        c.motion.p = to_point(m->vector("p", std::vector<double>(static_cast<std::size_t>(c.dim), 0.0)), c.dim,
                              "motion.p");
        if (m->has("q")) {
            c.motion.q = to_point(m->vector("q"), c.dim, "motion.q");
            have_q = true;
        }
        m->finish();
    }

    {
        auto p = root.child("profiles");
        if (!p) throw ConfigError("missing required key 'profiles'");
        auto fs = p->child("f");
        if (!fs) throw ConfigError("missing required key 'profiles.f'");
        c.f = parse_profile(*fs, c.dim);
        if (auto gs = p->child("g")) c.g = parse_profile(*gs, c.dim);
        p->finish();
    }
    if (c.g && !have_q) throw ConfigError("profiles.g requires motion.q");
    if (c.g && c.alpha <= 1.0) throw ConfigError("two profiles require alpha > 1");

    std::optional<double> mt, mx;
    if (auto n = root.child("noise")) {
        c.delta = n->number("delta", 0.0);
        c.seed = n->integer("seed", c.seed);
        if (n->has("mollify_t")) mt = n->number("mollify_t");
        if (n->has("mollify_x")) mx = n->number("mollify_x");
        n->finish();
    }
    if (!(c.delta >= 0.0)) throw ConfigError("noise.delta must be >= 0");
    const double tau = c.t_final / static_cast<double>(c.n_steps);
    c.mollify_t = mt ? *mt : (c.delta > 0.0 ? 2.0 * tau : 0.0);
    c.mollify_x = mx ? *mx : (c.delta > 0.0 ? grid.spacing(0) : 0.0);
    if (!(c.mollify_t >= 0.0) || !(c.mollify_x >= 0.0)) throw ConfigError("noise.mollify_* must be >= 0");

    std::string mode = c.g ? "pair" : "single";
    if (auto r = root.child("recon")) {
        mode = r->string("mode", mode);
        if (r->has("kappa")) c.recon.kappa = r->number("kappa");
        if (r->has("kappa1")) c.recon.kappa1 = r->number("kappa1");
        if (r->has("kappa2")) c.recon.kappa2 = r->number("kappa2");
        c.recon.m = r->number("m", 1.0);
        c.recon.m1 = r->number("m1", 1.0);
        c.recon.m2 = r->number("m2", 1.0);
        c.recon.tolerance = r->number("tolerance", 1e-3);
        c.recon.max_iterations = r->integer("max_iterations", 200);
        c.recon.solver = parse_recon_solver(r->string("solver", "thresholding"));
        r->finish();
    }
    if (mode == "single") {
        c.mode = ReconMode::Single;
    } else if (mode == "pair") {
        c.mode = ReconMode::Pair;
    } else {
        throw ConfigError("recon.mode must be 'single' or 'pair'");
    }
    c.recon.validate();

    if (auto s = root.child("split")) {
        c.split_a_field = s->string("a_field", std::string());
        c.split_b_field = s->string("b_field", std::string());
        s->finish();
    }

    if (auto o = root.child("output")) {
        c.output_directory = o->string("directory", c.output_directory);
        c.dump_fields = o->boolean("dump_fields", false);
        c.dump_chords = o->boolean("dump_chords", false);
        c.dump_stride = o->integer("dump_stride", 0);
        o->finish();
    }
    if (c.dump_stride == 0) c.dump_stride = std::max<std::size_t>(1, c.n_steps / 10);
    root.finish();
    return c;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(io::read_json(path)); }

json to_json(const ExperimentConfig& c) {
    json extents = json::array(), nodes = json::array();
    for (int a = 0; a < c.dim; ++a) {
        extents.push_back({c.axes[static_cast<std::size_t>(a)].lo, c.axes[static_cast<std::size_t>(a)].hi});
        nodes.push_back(c.axes[static_cast<std::size_t>(a)].nodes);
    }
    json motion = {{"p", point_json(c.motion.p, c.dim)}};
    if (c.motion.q) motion["q"] = point_json(*c.motion.q, c.dim);
    json profiles = {{"f", profile_json(c.f, c.dim)}};
    if (c.g) profiles["g"] = profile_json(*c.g, c.dim);
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j = {
        {"alpha", c.alpha},
        {"time", {{"t_final", c.t_final}, {"n_steps", c.n_steps}}},
        {"domain", {{"dim", c.dim}, {"extents", extents}, {"nodes", nodes}}},
        {"omega", {{"frame_width", c.frame_width}}},
        {"motion", motion},
        {"profiles", profiles},
        {"noise", {{"delta", c.delta}, {"seed", c.seed}, {"mollify_t", c.mollify_t}, {"mollify_x", c.mollify_x}}},
        {"recon",
         {{"mode", c.mode == ReconMode::Single ? "single" : "pair"},
          {"kappa", opt(c.recon.kappa)},
          {"kappa1", opt(c.recon.kappa1)},
          {"kappa2", opt(c.recon.kappa2)},
          {"m", c.recon.m},
          {"m1", c.recon.m1},
          {"m2", c.recon.m2},
          {"tolerance", c.recon.tolerance},
          {"max_iterations", c.recon.max_iterations},
          {"solver", recon_solver_name(c.recon.solver)}}},
        {"split", {{"a_field", c.split_a_field}, {"b_field", c.split_b_field}}},
        {"output",
         {{"directory", c.output_directory},
          {"dump_fields", c.dump_fields},
          {"dump_chords", c.dump_chords},
          {"dump_stride", c.dump_stride}}},
    };
    return j;
}

Profile make_profile(const ProfileSpec& s, const SpaceGrid& grid) {
    switch (parse_profile_kind(s.kind)) {
        case ProfileKind::GaussianBump: return Profile::gaussian(s.center, s.width, s.amplitude);
        case ProfileKind::PolynomialBump: return Profile::polynomial(s.center, s.width, s.amplitude);
        case ProfileKind::Sampled: return Profile::sampled(io::read_field_csv(s.path, grid));
    }
    throw ConfigError("unknown profile kind");
}

Simulation simulate(const ExperimentConfig& c) {
    const SpaceGrid grid = c.space_grid();
    const TimeGrid tgrid = c.time_grid();
    const Profile f = make_profile(c.f, grid);
    std::optional<Profile> g;
    if (c.g) g = make_profile(*c.g, grid);

    std::vector<MovingProfile> moving{{"f", f, c.motion.p}};
    if (g) moving.push_back({"g", *g, *c.motion.q});
    SupportReport support = check_support_condition(moving, c.order(), tgrid, grid);
    if (!support.ok) throw ConfigError(support.message);

    EvolutionProblem prob(c.order(), tgrid, grid);
    prob.source = moving_source(f, g, c.motion, tgrid, grid);
    SpaceTimeField u = solve_forward(prob);

    const ObservationMask mask(grid, c.frame_width);
    NoisySample noisy = add_noise(u, c.delta, c.seed, mask);
    const SpaceTimeField diff = noisy.noisy - noisy.clean;
    const double clean_norm = std::sqrt(spacetime_inner(noisy.clean, noisy.clean, &mask));
    const double err = std::sqrt(spacetime_inner(diff, diff, &mask));
    Simulation sim{f.sample(grid), std::nullopt, std::move(noisy.clean), std::move(noisy.noisy), support,
                   clean_norm > 0.0 ? err / clean_norm : 0.0};
    if (g) sim.g_truth = g->sample(grid);
    return sim;
}

ReconData prepare_data(const ExperimentConfig& c, const SpaceTimeField& u_delta, ReconMode mode) {
    const SpaceGrid grid = c.space_grid();
    const ObservationMask mask(grid, c.frame_width);
    const SpaceTimeField u = (c.mollify_t > 0.0 || c.mollify_x > 0.0)
                                 ? mollify(u_delta, c.mollify_t, c.mollify_x, &mask)
                                 : u_delta;
    SpaceTimeField v = mode == ReconMode::Single ? build_v_delta_single(u, c.order(), c.motion, mask)
                                                 : build_v_delta_pair(u, c.order(), c.motion, mask);
    SpaceTimeField bnd = build_frozen_boundary(u, c.order(), c.motion, mask, mode);
    return ReconData{c.order(), c.time_grid(), grid, mask, std::move(v), std::move(bnd)};
}

std::pair<Field, Field> pair_truth(const ExperimentConfig& c, const Field& f, const Field& g) {
    if (!c.motion.q) throw ConfigError("pair truth requires motion.q");
    const SpaceGrid& grid = f.grid();
    const Point p = c.motion.p, q = *c.motion.q;
    Field a = f + g;
    Field b(grid);
    const bool analytic = c.f.kind != "sampled" && c.g && c.g->kind != "sampled";
    if (analytic) {
        const Profile pf = make_profile(c.f, grid), pg = make_profile(*c.g, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point x = grid.point(i);
            const Point gf = pf.gradient(x), gg = pg.gradient(x);
            b[i] = q[0] * gf[0] + q[1] * gf[1] + p[0] * gg[0] + p[1] * gg[1];
        }
    } else {
        b = directional_derivative(f, q) + directional_derivative(g, p);
    }
    a.zero_boundary();
    b.zero_boundary();
    return {a, b};
}

std::optional<Command> parse_command(std::string_view name) {
    if (name == "simulate") return Command::Simulate;
    if (name == "reconstruct-single") return Command::ReconstructSingle;
    if (name == "reconstruct-pair") return Command::ReconstructPair;
    if (name == "split") return Command::Split;
    if (name == "pipeline") return Command::Pipeline;
    return std::nullopt;
}

std::string_view command_name(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::ReconstructSingle: return "reconstruct-single";
        case Command::ReconstructPair: return "reconstruct-pair";
        case Command::Split: return "split";
        case Command::Pipeline: return "pipeline";
    }
    return "unknown";
}

namespace {

struct RunContext {
    const ExperimentConfig& cfg;
    fs::path out;
    bool quiet;
    std::ostream& log;
    std::vector<io::SummaryRow> summary;
    json outputs = json::array();
    json warnings = json::array();

    void note(const std::string& msg) {
        if (!quiet) log << "[fracmove] " << msg << '\n';
    }
    void field(const std::string& name, const Field& f) {
        io::write_field_csv(out / name, f);
        outputs.push_back(name);
    }
    void row(const std::string& stage, const std::string& q, double v) { summary.push_back({stage, q, v}); }
};

void write_manifest(RunContext& ctx, Command cmd, const std::string& status) {
    json m = {{"command", command_name(cmd)},
              {"status", status},
              {"config", to_json(ctx.cfg)},
              {"outputs", ctx.outputs},
              {"warnings", ctx.warnings}};
    io::write_json(ctx.out / "manifest.json", m);
}

void stage_simulate_outputs(RunContext& ctx, const Simulation& sim) {
    ctx.field("f_truth.csv", sim.f_truth);
    if (sim.g_truth) ctx.field("g_truth.csv", *sim.g_truth);
    io::write_spacetime_dump(ctx.out / "u_clean", "u_clean", sim.u_clean, ctx.cfg.dump_stride, ctx.cfg.alpha);
    io::write_spacetime_dump(ctx.out / "u_noisy", "u_noisy", sim.u_noisy, ctx.cfg.dump_stride, ctx.cfg.alpha);
    ctx.outputs.push_back("u_clean/u_clean_manifest.json");
    ctx.outputs.push_back("u_noisy/u_noisy_manifest.json");
    ctx.row("simulate", "u_max_abs", sim.u_clean.max_abs());
    ctx.row("simulate", "noise_rel_error", sim.noise_rel_error);
}

Simulation run_simulation(RunContext& ctx) {
    ctx.note("simulating forward problem");
    Simulation sim = simulate(ctx.cfg);
    if (sim.support.wave_time_warning) {
        ctx.warnings.push_back(sim.support.message);
        ctx.note(sim.support.message);
    }
    return sim;
}

void record_history(RunContext& ctx, const ReconReport& rep, const std::string& stage) {
    io::write_history_csv(ctx.out / "history.csv", rep);
    ctx.outputs.push_back("history.csv");
    ctx.row(stage, "iterations", static_cast<double>(rep.history.size()));
    ctx.row(stage, "initial_objective", rep.initial_objective);
    ctx.row(stage, "final_objective", rep.history.back().objective);
    ctx.row(stage, "stopped_by_tolerance", rep.stop_reason == StopReason::Tolerance ? 1.0 : 0.0);
}

Field run_single_stage(RunContext& ctx, const Simulation& sim) {
    const auto& c = ctx.cfg;
    if (c.g) throw ConfigError("reconstruct-single expects a single profile (remove profiles.g)");
    ctx.note("building observation data");
    const ReconData data = prepare_data(c, sim.u_noisy, ReconMode::Single);
    ctx.note("running single-profile iteration");
    const ReconReport rep = run_single(c.recon, data, sim.f_truth);
    record_history(ctx, rep, "reconstruct");
    ctx.row("reconstruct", "kappa", rep.kappa);
    ctx.row("reconstruct", "err_f", *rep.history.back().err_l2_vs_truth);
    ctx.field("f_recon.csv", rep.final_f());
    if (c.dump_fields) {
        for (std::size_t k = 0; k < rep.iterates.size(); ++k) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "iterates/f_%05zu.csv", k + 1);
            ctx.field(buf, rep.iterates[k]);
        }
    }
    ctx.note("final relative L2 error " + io::format_double(*rep.history.back().err_l2_vs_truth));
    return rep.final_f();
}

void check_pair_config(const ExperimentConfig& c) {
    if (c.alpha <= 1.0) throw ConfigError("pair mode requires alpha > 1");
    if (!c.motion.q) throw ConfigError("pair mode requires motion.q");
    const Point r = c.motion.relative();
    if (std::hypot(r[0], r[1]) <= 1e-14) throw ConfigError("pair mode requires p != q");
}

std::pair<Field, Field> run_pair_stage(RunContext& ctx, const Simulation& sim) {
    const auto& c = ctx.cfg;
    check_pair_config(c);
    if (!sim.g_truth) throw ConfigError("reconstruct-pair requires profiles.g");
    const auto [a_true, b_true] = pair_truth(c, sim.f_truth, *sim.g_truth);
    ctx.note("building observation data");
    const ReconData data = prepare_data(c, sim.u_noisy, ReconMode::Pair);
    ctx.note("running pair iteration");
    const ReconReport rep = run_pair(c.recon, data, a_true, b_true);
    record_history(ctx, rep, "reconstruct");
    ctx.row("reconstruct", "kappa1", rep.kappa1);
    ctx.row("reconstruct", "kappa2", rep.kappa2);
    ctx.row("reconstruct", "err_a", *rep.history.back().err_a);
    ctx.row("reconstruct", "err_b", *rep.history.back().err_b);
    ctx.field("a_recon.csv", rep.final_a());
    ctx.field("b_recon.csv", rep.final_b());
    ctx.field("a_truth.csv", a_true);
    ctx.field("b_truth.csv", b_true);
    if (c.dump_fields) {
        for (std::size_t k = 0; k < rep.iterates.size(); ++k) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "iterates/a_%05zu.csv", k + 1);
            ctx.field(buf, rep.iterates[k]);
            std::snprintf(buf, sizeof buf, "iterates/b_%05zu.csv", k + 1);
            ctx.field(buf, rep.iterates_b[k]);
        }
    }
    return {rep.final_a(), rep.final_b()};
}

void run_split_stage(RunContext& ctx, const Field& a, const Field& b, const std::optional<Field>& f_true,
                     const std::optional<Field>& g_true) {
    check_pair_config(ctx.cfg);
    ctx.note("splitting (a, b) along chords");
    const ConvectResult res = solve_convection(a, b, ctx.cfg.motion);
    ctx.field("f_split.csv", res.f);
    ctx.field("g_split.csv", res.g);
    ctx.row("split", "chords_total", static_cast<double>(res.diagnostics.chords_total));
    ctx.row("split", "chords_skipped", static_cast<double>(res.diagnostics.chords_skipped));
    ctx.row("split", "skipped_area_fraction", res.diagnostics.skipped_area_fraction);
    if (f_true) ctx.row("split", "err_f", relative_l2_error(res.f, *f_true));
    if (g_true) ctx.row("split", "err_g", relative_l2_error(res.g, *g_true));
    if (ctx.cfg.dump_chords) {
        io::write_chord_csvs(ctx.out / "chords", res.chords);
        ctx.outputs.push_back("chords/");
    }
}

int execute(Command cmd, RunContext& ctx) {
    const auto& c = ctx.cfg;
    switch (cmd) {
        case Command::Simulate: {
            const Simulation sim = run_simulation(ctx);
            stage_simulate_outputs(ctx, sim);
            break;
        }
        case Command::ReconstructSingle: {
            const Simulation sim = run_simulation(ctx);
            ctx.row("simulate", "noise_rel_error", sim.noise_rel_error);
            run_single_stage(ctx, sim);
            break;
        }
        case Command::ReconstructPair: {
            check_pair_config(c);
            const Simulation sim = run_simulation(ctx);
            ctx.row("simulate", "noise_rel_error", sim.noise_rel_error);
            run_pair_stage(ctx, sim);
            break;
        }
        case Command::Split: {
            check_pair_config(c);
            const SpaceGrid grid = c.space_grid();
            std::optional<Field> f_true, g_true;
            if (c.f.kind != "sampled" || !c.f.path.empty()) f_true = make_profile(c.f, grid).sample(grid);
            if (c.g) g_true = make_profile(*c.g, grid).sample(grid);
            Field a(grid), b(grid);
            if (!c.split_a_field.empty() || !c.split_b_field.empty()) {
                if (c.split_a_field.empty() || c.split_b_field.empty()) {
                    throw ConfigError("split needs both split.a_field and split.b_field");
                }
                a = io::read_field_csv(c.split_a_field, grid);
                b = io::read_field_csv(c.split_b_field, grid);
            } else {
                if (!g_true) throw ConfigError("split needs split.a_field/b_field or profiles f and g");
                std::tie(a, b) = pair_truth(c, *f_true, *g_true);
            }
            run_split_stage(ctx, a, b, f_true, g_true);
            break;
        }
        case Command::Pipeline: {
            if (c.mode == ReconMode::Pair) check_pair_config(c);
            const Simulation sim = run_simulation(ctx);
            stage_simulate_outputs(ctx, sim);
            if (c.mode == ReconMode::Single) {
                run_single_stage(ctx, sim);
            } else {
                const auto [a, b] = run_pair_stage(ctx, sim);
                run_split_stage(ctx, a, b, sim.f_truth, sim.g_truth);
            }
            break;
        }
    }
    return kExitOk;
}

}  // namespace

int run_command(Command cmd, const fs::path& config_path, const std::optional<fs::path>& out, bool quiet,
                std::ostream& log) {
    std::optional<ExperimentConfig> cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        log << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
    RunContext ctx{*cfg, out ? *out : fs::path(cfg->output_directory), quiet, log, {}, json::array(),
                   json::array()};
    try {
        fs::create_directories(ctx.out);
        write_manifest(ctx, cmd, "running");
        execute(cmd, ctx);
        io::write_summary_csv(ctx.out / "summary.csv", ctx.summary);
        ctx.outputs.push_back("summary.csv");
        write_manifest(ctx, cmd, "ok");
        ctx.note("wrote " + ctx.out.string());
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "configuration error: " << e.what() << '\n';
        write_manifest(ctx, cmd, std::string("config_error: ") + e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << '\n';
        try {
            write_manifest(ctx, cmd, std::string("numerical_failure: ") + e.what());
        } catch (...) {
        }
        return kExitNumerical;
    }
}

}  // namespace fracmove
