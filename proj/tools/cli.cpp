#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "skembed/barrier.hpp"
#include "skembed/embed.hpp"
#include "skembed/envelope.hpp"
#include "skembed/error.hpp"
#include "skembed/gain.hpp"
#include "skembed/io.hpp"
#include "skembed/mc.hpp"
#include "skembed/order.hpp"
#include "skembed/presets.hpp"

namespace skembed::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Solution entries at or below this are round-off and are not listed.
constexpr double kReportFloor = 1e-15;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised after the report files are written when two independent computations disagree.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::string instance;
    std::string out_dir = ".";
    std::string method = "exact";
    double epsilon = 1e-2;
    double tol = 1e-8;
    std::optional<double> alpha;
    std::string sense;
    bool no_reduce = false;
    unsigned threads = 0;

    std::string route = "both";

    std::string regime;
    double angular_tol = -1.0;
    double mass_tol = 1e-9;

    std::string grid_function;

    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    std::size_t max_steps = 0;
    std::size_t trace = 0;

    std::string preset = "uniform-shell";
    std::string output;
    std::string name;
    std::string domain = "U";
    std::optional<int> d;
    std::optional<double> h;
    std::optional<double> outer;
    double r1 = 1.0;
    double r2 = 2.0;
    double r3 = 3.0;
    double p = 0.5;
    double center = 0.0;

    std::vector<int> y;
    double profile_radius = -1.0;
    double r_x = 2.5;
};

unsigned resolve_threads(unsigned flag) {
    if (flag > 0) return flag;
    const char* env = std::getenv("SKEMBED_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v <= 0 || v > 1024) {
        throw ConfigError(std::string("SKEMBED_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<unsigned>(v);
}

ObjectiveSense parse_sense(const std::string& s) {
    if (s == "min") return ObjectiveSense::Minimize;
    if (s == "max") return ObjectiveSense::Maximize;
    throw ConfigError("sense must be min or max, got '" + s + "'");
}

const char* sense_name(ObjectiveSense s) { return s == ObjectiveSense::Minimize ? "min" : "max"; }

json point_json(const Point& z, int d) {
    json a = json::array();
    for (int i = 0; i < d; ++i) a.push_back(z[i]);
    return a;
}

std::vector<std::string> coord_header(const std::string& prefix, int d) {
    std::vector<std::string> h;
    for (int i = 1; i <= d; ++i) h.push_back(prefix + std::to_string(i));
    return h;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

void put_point(CsvTable& t, const Point& z, int d) {
    for (int i = 0; i < d; ++i) t.cell(static_cast<long long>(z[i]));
}

json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round12(v);
}

struct Output {
    fs::path dir;

    void prepare() const {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    void json_file(const std::string& file, const json& j) const { write_file((dir / file).string(), j.dump(2) + "\n"); }
    void csv_file(const std::string& file, const CsvTable& t) const { write_file((dir / file).string(), t.str()); }
};

struct Section {
    json body;
    bool pass = false;
};

// Loaded instance plus the lazily computed embedding solution shared by all sections.
struct Context {
    Options opt;
    Output out;
    unsigned threads = 1;
    Instance inst;
    std::unique_ptr<Lattice> lattice;
    std::unique_ptr<EmbeddingProblem> problem;
    std::optional<StoppingSolution> solution;
    std::optional<EmbeddingCertificate> certificate;
    bool solved = false;

    int d() const { return lattice->dim(); }

    void load() {
        if (opt.instance.empty()) throw ConfigError("an instance file is required (--instance)");
        inst = read_instance(opt.instance);
        if (opt.alpha) {
            if (!(*opt.alpha > 0.0)) throw ConfigError("alpha must be positive");
            inst.alpha = *opt.alpha;
        }
        if (!opt.sense.empty()) inst.sense = parse_sense(opt.sense);
        lattice = std::make_unique<Lattice>(Lattice::build(inst.lattice));
    }

    // False when the instance is infeasible; the certificate is kept.
    bool solve() {
        if (solved) return solution.has_value();
        solved = true;
        EmbeddingOptions eo;
        eo.symmetry_reduction = !opt.no_reduce && opt.method == "exact" &&
                                is_point_group_invariant(inst.mu, d()) && is_point_group_invariant(inst.nu, d());
        problem = std::make_unique<EmbeddingProblem>(
            build_problem(*lattice, inst.mu, inst.nu, inst.alpha, inst.sense, eo));
        SolveOptions so;
        so.method = opt.method == "entropic" ? SolveMethod::Entropic : SolveMethod::Exact;
        so.entropic.epsilon = opt.epsilon;
        try {
            solution = skembed::solve(*problem, so);
        } catch (const InfeasibleEmbeddingError& e) {
            certificate = e.certificate();
        }
        return solution.has_value();
    }
};

json skipped(const std::string& reason) { return json{{"verdict", "skipped"}, {"reason", reason}}; }

Section order_section(Context& c) {
    const Lattice& lat = *c.lattice;
    std::optional<OrderVerdict> lp, pot;
    if (c.opt.route != "potential") lp = check_order_lp(lat, c.inst.mu, c.inst.nu);
    if (c.opt.route != "lp") pot = check_order_potential(lat, c.inst.mu, c.inst.nu);
    const OrderVerdict& v = lp ? *lp : *pot;

    json j;
    j["in_order"] = v.in_order;
    j["route"] = c.opt.route;
    j["witness_max_violation"] = nullptr;
    if (pot) {
        j["min_aggregate"] = num(pot->min_aggregate);
        j["boundary_residual"] = num(pot->boundary_residual);
    }
    const bool agree = !(lp && pot) || lp->in_order == pot->in_order;
    if (lp && pot) {
        j["lp_in_order"] = lp->in_order;
        j["potential_in_order"] = pot->in_order;
        j["routes_agree"] = agree;
    }
    bool witness_ok = true;
    if (!v.in_order) {
        const auto wc = check_witness(lat, v.witness, c.inst.mu, c.inst.nu);
        witness_ok = wc.valid;
        j["witness_max_violation"] = num(wc.violation);
        j["witness_subharmonic_residual"] = num(wc.subharmonic_residual);
        j["witness_valid"] = wc.valid;
        CsvTable t(concat(coord_header("z", c.d()), {"value"}));
        for (std::size_t z = 0; z < lat.size(); ++z) {
            put_point(t, lat.node(z), c.d());
            t.cell(v.witness[z]);
            t.end_row();
        }
        c.out.csv_file("witness.csv", t);
    }
    c.out.json_file("order.json", j);
    if (!agree) throw ConsistencyError("order routes disagree; see order.json");
    if (!witness_ok) throw ConsistencyError("emitted witness failed its re-check; see order.json");
    return {j, v.in_order};
}

Section solve_section(Context& c) {
    const Lattice& lat = *c.lattice;
    const int d = c.d();
    c.solve();
    json j;
    j["method"] = c.opt.method;
    j["alpha"] = num(c.inst.alpha);
    j["sense"] = sense_name(c.inst.sense);
    j["nodes"] = lat.size();
    j["variables"] = c.problem->program.num_variables();
    j["rows"] = c.problem->program.num_rows();
    j["symmetry_reduction"] = c.problem->options.symmetry_reduction;
    if (c.certificate) {
        j["status"] = "Infeasible";
        j["objective"] = nullptr;
        j["E_tau"] = nullptr;
        j["gap"] = nullptr;
        j["certificate_margin"] = num(c.certificate->margin);
        CsvTable t(concat(coord_header("z", d), {"value"}));
        for (std::size_t z = 0; z < lat.size(); ++z) {
            put_point(t, lat.node(z), d);
            t.cell(c.certificate->beta[z]);
            t.end_row();
        }
        c.out.csv_file("certificate.csv", t);
        c.out.json_file("summary.json", j);
        return {j, false};
    }
    const StoppingSolution& s = *c.solution;
    j["status"] = to_string(s.status);
    j["objective"] = num(s.objective);
    j["dual_objective"] = num(s.dual_objective);
    j["gap"] = num(std::abs(s.objective - s.dual_objective));
    j["E_tau"] = num(s.expected_steps);
    j["alternative_optima"] = s.alternative_optima;
    if (s.method == SolveMethod::Entropic) j["entropic_epsilon"] = num(s.entropic_epsilon);

    CsvTable sol(concat(concat(coord_header("start_z", d), coord_header("node_z", d)), {"m", "s"}));
    CsvTable val(concat(concat(coord_header("start_z", d), coord_header("node_z", d)), {"J"}));
    for (const auto& st : s.starts) {
        for (std::size_t z = 0; z < lat.size(); ++z) {
            if (st.occupation[z] > kReportFloor || st.stop[z] > kReportFloor) {
                put_point(sol, lat.node(st.node), d);
                put_point(sol, lat.node(z), d);
                sol.cell(st.occupation[z]).cell(st.stop[z]);
                sol.end_row();
            }
            if (!st.value.empty()) {
                put_point(val, lat.node(st.node), d);
                put_point(val, lat.node(z), d);
                val.cell(st.value[z]);
                val.end_row();
            }
        }
    }
    c.out.csv_file("solution.csv", sol);
    if (!s.beta.empty()) {
        CsvTable pot(concat(coord_header("z", d), {"value"}));
        for (std::size_t z = 0; z < lat.size(); ++z) {
            put_point(pot, lat.node(z), d);
            pot.cell(s.beta[z]);
            pot.end_row();
        }
        c.out.csv_file("potentials.csv", pot);
        c.out.csv_file("values.csv", val);
    }
    c.out.json_file("summary.json", j);
    return {j, s.status == LpStatus::Optimal};
}

Section duality_section(Context& c) {
    if (!c.solve()) {
        json j = {{"status", "Infeasible"}, {"pass", false}};
        c.out.json_file("duality.json", j);
        return {j, false};
    }
    const auto r = verify_dual(*c.solution, *c.lattice, c.inst.mu, c.inst.nu, c.opt.tol);
    json j;
    j["status"] = to_string(c.solution->status);
    j["primal"] = num(r.primal);
    j["dual"] = num(r.dual);
    j["gap"] = num(r.gap);
    j["majorant_violation"] = num(r.majorant_violation);
    j["harmonic_violation"] = num(r.harmonic_violation);
    j["violations"] = r.violations;
    j["tol"] = num(r.tol);
    j["convention"] = r.convention;
    const bool pass = r.gap <= c.opt.tol && r.violations == 0;
    j["pass"] = pass;
    c.out.json_file("duality.json", j);
    return {j, pass};
}

Section barrier_section(Context& c) {
    const Lattice& lat = *c.lattice;
    const int d = c.d();
    if (!c.solve()) {
        json j = {{"status", "Infeasible"}, {"pass", false}};
        c.out.json_file("cap_report.json", j);
        return {j, false};
    }
    const StoppingSolution& s = *c.solution;
    const CapRegime regime = c.opt.regime.empty() ? regime_for(c.inst.sense, c.inst.alpha) : parse_regime(c.opt.regime);
    const auto cap = verify_cap_structure(s, lat, regime, c.opt.angular_tol, c.opt.mass_tol);
    const auto policy = build_policy(s, lat);
    const double replay = replay_error(policy, s, lat);
    const auto profiles = randomization_profile(policy, s, lat, c.opt.mass_tol);

    CsvTable t(concat(coord_header("start_z", d),
                      {"shell_r", "stop_min_cos", "pass_max_cos", "violation", "parallel_excluded", "stop_max_cos",
                       "pass_min_cos", "stop_count", "pass_count", "angular_tol"}));
    std::size_t excluded = 0;
    for (const auto& row : cap.rows) {
        put_point(t, lat.node(row.start), d);
        // Cosine extremes of an empty support are left blank.
        auto cos_cell = [&](double v, std::size_t count) {
            if (count > 0) t.cell(v);
            else t.cell(std::string());
        };
        t.cell(row.radius);
        cos_cell(row.stop_min_cos, row.stop_count);
        cos_cell(row.pass_max_cos, row.pass_count);
        t.cell(static_cast<long long>(row.violation ? 1 : 0)).cell(row.parallel_excluded);
        cos_cell(row.stop_max_cos, row.stop_count);
        cos_cell(row.pass_min_cos, row.pass_count);
        t.cell(row.stop_count).cell(row.pass_count).cell(row.angular_tol);
        t.end_row();
        excluded += row.parallel_excluded;
    }
    c.out.csv_file("cap.csv", t);

    json pol = json::array();
    for (const auto& st : s.starts) {
        const StartPolicy* sp = policy.find(st.node);
        json rules = json::array();
        for (std::size_t z = 0; z < lat.size(); ++z) {
            if (st.occupation[z] + st.stop[z] > c.opt.mass_tol) {
                rules.push_back({{"z", point_json(lat.node(z), d)}, {"rho", num(sp->rho[z])}});
            }
        }
        pol.push_back({{"start", point_json(lat.node(st.node), d)}, {"mu", num(st.mu)}, {"rules", rules}});
    }
    c.out.json_file("policy.json", pol);

    json j;
    j["regime"] = to_string(regime);
    j["predicted_regime"] = c.inst.alpha == 2.0 ? json(nullptr) : json(to_string(regime_for(c.inst.sense, c.inst.alpha)));
    j["advisory"] = cap.advisory;
    j["violations"] = cap.violations();
    j["rows"] = cap.rows.size();
    j["parallel_excluded"] = excluded;
    j["angular_tol"] = c.opt.angular_tol < 0.0 ? json("one-cell") : num(c.opt.angular_tol);
    j["mass_tol"] = num(c.opt.mass_tol);
    j["replay_error"] = num(replay);
    j["randomized_fraction"] = num(randomized_fraction(profiles, policy));
    bool pass = (cap.violations() == 0 || cap.advisory) && replay <= 1e-8;
    if (c.inst.sense == ObjectiveSense::Minimize && c.inst.alpha <= 1.0) {
        const auto cm = common_mass_check(s, lat, c.inst.mu, c.inst.nu);
        j["common_mass"] = {{"pass", cm.pass}, {"worst_deficit", num(cm.worst_deficit)}};
        pass = pass && cm.pass;
    }
    j["pass"] = pass;
    c.out.json_file("cap_report.json", j);
    return {j, pass};
}

std::vector<double> read_grid_function(const Lattice& lat, const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> f(lat.size(), std::nan(""));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != lat.dim() + 1) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(lat.dim() + 1) +
                              " columns");
        }
        Point z{};
        double v = 0.0;
        try {
            for (int i = 0; i < lat.dim(); ++i) z[i] = std::stoi(cells[i]);
            v = std::stod(cells.back());
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
        const auto idx = lat.index_of(z);
        if (!idx) throw ConfigError(path + ":" + std::to_string(lineno) + ": point is not a node");
        f[*idx] = v;
    }
    for (double v : f) {
        if (std::isnan(v)) throw ConfigError(path + ": grid function does not cover every node");
    }
    return f;
}

Section envelope_section(Context& c) {
    const Lattice& lat = *c.lattice;
    const int d = c.d();
    std::vector<double> f;
    const bool from_solution = c.opt.grid_function.empty();
    if (from_solution) {
        if (!c.solve() || c.solution->beta.empty()) {
            json j = {{"status", "no marginal potentials"}, {"pass", false}};
            c.out.json_file("envelope.json", j);
            return {j, false};
        }
        f = c.solution->beta;
    } else {
        f = read_grid_function(lat, c.opt.grid_function);
    }

    const auto shell = envelope_iterate(lat, f);
    const auto again = envelope_iterate(lat, shell.values, 1);
    const auto onestep = envelope_onestep_oracle(lat, f);
    double dominated = 0.0;
    for (std::size_t z = 0; z < lat.size(); ++z) dominated = std::max(dominated, shell.values[z] - f[z]);

    CsvTable t(concat(coord_header("z", d), {"value", "shell_envelope", "onestep_envelope"}));
    for (std::size_t z = 0; z < lat.size(); ++z) {
        put_point(t, lat.node(z), d);
        t.cell(f[z]).cell(shell.values[z]).cell(onestep.values[z]);
        t.end_row();
    }
    c.out.csv_file("envelope.csv", t);

    json j;
    j["iters"] = shell.iterations;
    j["max_delta"] = num(shell.max_delta);
    j["converged"] = shell.converged;
    j["monotone"] = shell.monotone;
    j["dominated_excess"] = num(dominated);
    j["idempotence_delta"] = num(again.max_delta);
    j["onestep_subharmonic_violation"] = num(subharmonic_violation(lat, onestep.values));
    bool pass = shell.converged && shell.monotone && dominated <= 0.0 && again.max_delta <= 1e-10;

    // Optimal-stopping values of beta - c must reproduce the dual per-start values at each start.
    if (from_solution && c.solution->method == SolveMethod::Exact) {
        double worst = 0.0;
        for (const auto& st : c.solution->starts) {
            if (st.value.empty()) continue;
            const auto v = value_function(lat, f, st.node, c.inst.alpha, c.inst.sense);
            worst = std::max(worst, std::abs(v[st.node] - st.value[st.node]));
        }
        j["bridge_max_diff"] = num(worst);
        pass = pass && worst <= 1e-8;
    }
    j["pass"] = pass;
    c.out.json_file("envelope.json", j);
    return {j, pass};
}

Section simulate_section(Context& c) {
    const Lattice& lat = *c.lattice;
    const int d = c.d();
    if (!c.solve()) {
        json j = {{"status", "Infeasible"}, {"pass", false}};
        c.out.json_file("sim_report.json", j);
        return {j, false};
    }
    const StoppingSolution& s = *c.solution;
    const auto policy = build_policy(s, lat);
    SimConfig cfg;
    cfg.n_paths = c.opt.paths;
    cfg.seed = c.opt.seed;
    cfg.max_steps = c.opt.max_steps;
    cfg.threads = c.threads;
    cfg.trace_paths = c.opt.trace;
    const auto rep = simulate(policy, lat, c.inst.mu, cfg);
    const auto target = DiscreteMeasure::from_nodes(lat, s.terminal_law(), 1e-12);
    const auto cmp = compare(rep, target, lat.spacing());
    const bool mean_ok = mean_steps_consistent(rep, s.expected_steps);

    CsvTable term(concat(coord_header("z", d), {"count", "empirical", "target"}));
    for (std::size_t z = 0; z < lat.size(); ++z) {
        const double tgt = target.mass(lat.node(z));
        if (rep.counts[z] == 0 && tgt == 0.0) continue;
        put_point(term, lat.node(z), d);
        term.cell(static_cast<long long>(rep.counts[z])).cell(rep.terminal.mass(lat.node(z))).cell(tgt);
        term.end_row();
    }
    c.out.csv_file("terminal.csv", term);
    if (!rep.trace.empty()) {
        CsvTable tr(concat(concat({"path_id", "step"}, coord_header("z", d)), {"stopped"}));
        for (const auto& row : rep.trace) {
            tr.cell(row.path_id).cell(row.step);
            put_point(tr, row.z, d);
            tr.cell(static_cast<long long>(row.stopped ? 1 : 0));
            tr.end_row();
        }
        c.out.csv_file("trace.csv", tr);
    }

    json j;
    j["n_paths"] = rep.n_paths;
    j["seed"] = rep.seed;
    j["max_steps"] = rep.max_steps;
    j["mean_steps"] = num(rep.mean_steps);
    j["step_variance"] = num(rep.step_variance);
    j["expected_steps"] = num(s.expected_steps);
    j["mean_steps_consistent"] = mean_ok;
    j["capped"] = rep.capped;
    j["cap_flag"] = rep.cap_flag;
    j["w1"] = num(cmp.distance);
    j["w1_bound"] = num(cmp.bound);
    j["w1_pass"] = cmp.pass;
    json hist = json::array();
    for (double v : rep.shell_histogram) hist.push_back(num(v));
    j["shell_histogram"] = hist;
    const bool pass = cmp.pass && mean_ok && !rep.cap_flag;
    j["pass"] = pass;
    c.out.json_file("sim_report.json", j);
    return {j, pass};
}

Section gain_scan_section(const Options& opt, const Output& out, unsigned threads) {
    LatticeParams lp;
    lp.d = opt.d.value_or(2);
    lp.h = opt.h.value_or(0.5);
    lp.outer_radius = opt.outer.value_or(3.0);
    // Each greedy bucket must be one first-passage layer, so shells are h wide.
    lp.shell_tol = lp.h;
    const Lattice lat = Lattice::build(lp);
    const int d = lat.dim();

    Point y{2, 0, 0};
    if (!opt.y.empty()) {
        if (static_cast<int>(opt.y.size()) != d) throw ConfigError("--y needs " + std::to_string(d) + " coordinates");
        y = {0, 0, 0};
        for (int i = 0; i < d; ++i) y[i] = opt.y[i];
    }
    const auto yi = lat.index_of(y);
    if (!yi) throw ConfigError("--y is not a lattice node");
    const double alpha = opt.alpha.value_or(1.0);
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    const double pr = opt.profile_radius > 0.0 ? opt.profile_radius : 2.0 * lat.norm(*yi);
    const auto profile = point_profile(lat, pr);
    const auto scan = monotonicity_scan(lat, opt.r_x, *yi, profile, alpha, threads);

    CsvTable t(concat({"cos_angle", "dist_xy", "G_lower", "G_upper", "verdict"}, coord_header("x", d)));
    for (const auto& r : scan.rows) {
        t.cell(r.cos_angle).cell(r.dist_xy).cell(r.lower).cell(r.upper).cell(std::string(to_string(scan.verdict)));
        put_point(t, r.x, d);
        t.end_row();
    }
    out.csv_file("scan.csv", t);
    json j;
    j["alpha"] = num(alpha);
    j["y"] = point_json(y, d);
    j["profile_radius"] = num(pr);
    j["r_x"] = num(opt.r_x);
    j["expectation"] = scan.expectation;
    j["verdict"] = to_string(scan.verdict);
    j["tol"] = num(scan.tol);
    j["rows"] = scan.rows.size();
    out.json_file("scan.json", j);
    return {j, scan.verdict == ScanVerdict::Pass};
}

Instance generate(const Options& opt, const CLI::App& sub) {
    const ObjectiveSense sense = opt.sense.empty() ? ObjectiveSense::Minimize : parse_sense(opt.sense);
    const double alpha = opt.alpha.value_or(1.0);
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    const int d = opt.d.value_or(3);
    const double h = opt.h.value_or(1.0);
    const double outer = opt.outer.value_or(5.0);
    Instance inst;
    if (opt.preset == "uniform-shell") {
        inst = preset_uniform_shell(d, h, outer, opt.r1, opt.r2, alpha, sense);
    } else if (opt.preset == "two-shell") {
        inst = preset_two_shell(d, h, outer, opt.r1, opt.r2, opt.r3, opt.p, alpha, sense);
    } else if (opt.preset == "annulus-pair") {
        for (const char* fixed : {"--dim", "--spacing", "--outer-radius", "--r1", "--r2"}) {
            if (sub.get_option(fixed)->count() > 0) {
                throw ConfigError(std::string("annulus-pair has fixed geometry; remove ") + fixed);
            }
        }
        inst = preset_annulus_pair(opt.domain == "U");
        inst.alpha = alpha;
        inst.sense = sense;
    } else if (opt.preset == "overlap-pair") {
        inst = preset_overlap_pair(d, h, outer, opt.center, opt.r1, opt.r2, alpha);
        inst.sense = sense;
    } else {  // delta-start
        LatticeParams lp{d, h, outer, -1.0, 0.0};
        const Lattice lat = Lattice::build(lp);
        const auto origin = lat.index_of({0, 0, 0});
        if (!origin) throw ConfigError("delta-start needs the origin inside the domain");
        std::vector<Atom> atoms;
        for (std::size_t w : lat.neighbors(*origin)) atoms.push_back({lat.node(w), 1.0 / (2.0 * d)});
        inst.name = "delta-start";
        inst.lattice = lp;
        inst.mu = DiscreteMeasure::dirac({0, 0, 0});
        inst.nu = DiscreteMeasure(std::move(atoms));
        inst.alpha = alpha;
        inst.sense = sense;
    }
    if (!opt.name.empty()) inst.name = opt.name;
    return inst;
}

void apply_config(CLI::App* sub, const std::string& path) {
    const std::string text = read_file(path);
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ":" + std::to_string(line_at(text, e.byte == 0 ? 0 : e.byte - 1)) +
                          ": malformed JSON");
    }
    if (!root.is_object()) throw ConfigError(path + ":1: config must be a JSON object");
    for (const auto& [key, value] : root.items()) {
        const std::string where = path + ":" + std::to_string(line_of(text, "\"" + key + "\"")) + ": ";
        CLI::Option* o = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
        if (o == nullptr) throw ConfigError(where + "unknown key '" + key + "' for " + sub->get_name());
        if (o->count() > 0) continue;  // the command line wins
        auto add = [&](const json& v) {
            if (v.is_string()) o->add_result(v.get<std::string>());
            else if (v.is_boolean()) o->add_result(v.get<bool>() ? "true" : "false");
            else if (v.is_number()) o->add_result(v.dump());
            else throw ConfigError(where + "'" + key + "' must be a string, number or boolean");
        };
        if (value.is_array()) {
            for (const auto& v : value) add(v);
        } else {
            add(value);
        }
        try {
            o->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError(where + e.what());
        }
    }
}

void add_instance_options(CLI::App* sub, Options& o) {
    sub->add_option("instance,--instance", o.instance, "Instance JSON file");
    sub->add_option("--alpha", o.alpha, "Override the cost exponent");
    sub->add_option("--sense", o.sense, "Override the objective sense")->check(CLI::IsMember({"min", "max"}));
    sub->add_option("--method", o.method, "LP method")->check(CLI::IsMember({"exact", "entropic"}));
    sub->add_option("--epsilon", o.epsilon, "Entropic regularization strength")->check(CLI::PositiveNumber);
    sub->add_flag("--no-reduce", o.no_reduce, "Disable the point-group reduction");
}

void add_common_options(CLI::App* sub, Options& o) {
    sub->add_option("--out,-o", o.out_dir, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads (default: SKEMBED_THREADS or 1)")
        ->check(CLI::Range(1u, 1024u));
    sub->add_option("--config", o.config, "JSON file with option values; command-line flags take precedence");
}

void add_barrier_options(CLI::App* sub, Options& o) {
    sub->add_option("--regime", o.regime, "Cap regime to test (default: predicted from sense and alpha)")
        ->check(CLI::IsMember({"min_alpha_lt2", "max_alpha_gt2", "min_alpha_gt2", "max_alpha_lt2"}));
    sub->add_option("--angular-tol", o.angular_tol, "Angular tolerance (negative: one cell, h / r)");
    sub->add_option("--mass-tol", o.mass_tol, "Support threshold")->check(CLI::NonNegativeNumber);
}

void add_sim_options(CLI::App* sub, Options& o) {
    sub->add_option("--paths", o.paths, "Number of simulated paths")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--max-steps", o.max_steps, "Step cap per path (0: 100 (R_O/h)^2)");
    sub->add_option("--trace", o.trace, "Trace the first N paths (at most 10000)")->check(CLI::Range(0, 10000));
}

void add_geometry_options(CLI::App* sub, Options& o) {
    sub->add_option("--dim", o.d, "Dimension")->check(CLI::IsMember({2, 3}));
    sub->add_option("--spacing", o.h, "Lattice spacing")->check(CLI::PositiveNumber);
    sub->add_option("--outer-radius,--R_O", o.outer, "Domain radius")->check(CLI::PositiveNumber);
    sub->add_option("--alpha", o.alpha, "Cost exponent");
}

void print_verdict(std::ostream& out, const std::string& name, bool pass, const std::string& detail = "") {
    out << name << ": " << (pass ? "pass" : "FAIL");
    if (!detail.empty()) out << " (" << detail << ")";
    out << "\n";
}

int dispatch(const CLI::App& sub, Options& opt, std::ostream& out) {
    const std::string cmd = sub.get_name();
    const unsigned threads = resolve_threads(opt.threads);
    Output o{fs::path(opt.out_dir)};

    if (cmd == "gen") {
        const Instance inst = generate(opt, sub);
        // Validate before writing: the lattice must build and carry both marginals.
        const Lattice lat = Lattice::build(inst.lattice);
        if (!inst.mu.supported_on(lat) || !inst.nu.supported_on(lat)) {
            throw ConfigError("preset produced atoms off the lattice");
        }
        const fs::path file = opt.output.empty() ? o.dir / "instance.json" : fs::path(opt.output);
        if (file.has_parent_path()) fs::create_directories(file.parent_path());
        write_instance(file.string(), inst);
        out << "wrote " << file.string() << " (" << inst.mu.support_size() << " + " << inst.nu.support_size()
            << " atoms, " << lat.size() << " nodes)\n";
        return kOk;
    }
    o.prepare();
    if (cmd == "gain-scan") {
        const auto s = gain_scan_section(opt, o, threads);
        print_verdict(out, "gain-scan", s.pass,
                      s.body["expectation"].get<std::string>() + ", " + s.body["verdict"].get<std::string>());
        return s.pass ? kOk : kViolation;
    }

    Context c;
    c.opt = opt;
    c.out = o;
    c.threads = threads;
    c.load();

    if (cmd == "check-order") {
        const auto s = order_section(c);
        out << "order: " << (s.pass ? "in order" : "not in order") << "\n";
        return s.pass ? kOk : kViolation;
    }
    if (cmd == "solve") {
        const auto s = solve_section(c);
        out << "solve: " << s.body["status"].get<std::string>();
        if (s.pass) out << ", objective " << fmt12(s.body["objective"].get<double>());
        out << "\n";
        return s.pass ? kOk : kViolation;
    }
    if (cmd == "duality") {
        const auto s = duality_section(c);
        print_verdict(out, "duality", s.pass, s.body.contains("gap") ? "gap " + s.body["gap"].dump() : "");
        return s.pass ? kOk : kViolation;
    }
    if (cmd == "barrier") {
        const auto s = barrier_section(c);
        print_verdict(out, "barrier", s.pass,
                      s.body.contains("violations") ? s.body["violations"].dump() + " cap violations" : "");
        return s.pass ? kOk : kViolation;
    }
    if (cmd == "envelope") {
        const auto s = envelope_section(c);
        print_verdict(out, "envelope", s.pass);
        return s.pass ? kOk : kViolation;
    }
    if (cmd == "simulate") {
        const auto s = simulate_section(c);
        print_verdict(out, "simulate", s.pass,
                      s.body.contains("w1") ? "W1 " + s.body["w1"].dump() + " <= " + s.body["w1_bound"].dump() : "");
        return s.pass ? kOk : kViolation;
    }

    // report: the same section functions as the individual subcommands, in order.
    json report;
    report["instance"] = c.inst.name;
    bool all = true;
    auto record = [&](const std::string& name, const Section& s) {
        json entry = s.body;
        entry["verdict"] = s.pass ? "pass" : "fail";
        report[name] = entry;
        all = all && s.pass;
        print_verdict(out, name, s.pass);
    };
    record("order", order_section(c));
    record("solve", solve_section(c));
    if (c.solution) {
        record("duality", duality_section(c));
        if (c.inst.alpha == 2.0 && c.opt.regime.empty()) {
            report["barrier"] = skipped("alpha = 2 has no barrier");
        } else {
            record("barrier", barrier_section(c));
        }
        record("envelope", envelope_section(c));
        record("simulate", simulate_section(c));
    } else {
        for (const char* name : {"duality", "barrier", "envelope", "simulate"}) report[name] = skipped("infeasible");
    }
    report["pass"] = all;
    o.json_file("report.json", report);
    return all ? kOk : kViolation;
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidDimension:
        case ErrorCode::DegenerateDomain:
        case ErrorCode::SupportOffLattice:
        case ErrorCode::UnsupportedAtom:
        case ErrorCode::NonProbability:
        case ErrorCode::MassMismatch:
        case ErrorCode::NotSymmetric:
        case ErrorCode::WrongRegime:
        case ErrorCode::ZeroStart:
        case ErrorCode::ZeroVector:
        case ErrorCode::EmptyMeasure:
        case ErrorCode::SizeCapExceeded:
        case ErrorCode::ProfileUnreachable:
        case ErrorCode::BallEscapesDomain:
        case ErrorCode::EmptyShell:
            return kConfigError;
        default:
            return kInternalError;
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal stopping embeddings of lattice random walks", "skembed"};
    app.require_subcommand(1, 1);
    Options opt;

    auto* gen = app.add_subcommand("gen", "Write a preset instance");
    gen->add_option("--preset", opt.preset, "Preset family")
        ->check(CLI::IsMember({"uniform-shell", "two-shell", "annulus-pair", "overlap-pair", "delta-start"}));
    gen->add_option("--output", opt.output, "Instance file (default: OUT/instance.json)");
    gen->add_option("--name", opt.name, "Instance name");
    add_geometry_options(gen, opt);
    gen->add_option("--sense", opt.sense, "Objective sense")->check(CLI::IsMember({"min", "max"}));
    gen->add_option("--r1", opt.r1, "Radius of the initial level set");
    gen->add_option("--r2", opt.r2, "Exit radius (first band for two-shell)");
    gen->add_option("--r3", opt.r3, "Second band radius (two-shell)");
    gen->add_option("--p", opt.p, "Stop probability on the first band (two-shell)")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--center", opt.center, "Radius of the shared component (overlap-pair; 0 is a point mass)");
    gen->add_option("--domain", opt.domain, "Annulus (U) or ball (V) for annulus-pair")
        ->check(CLI::IsMember({"U", "V"}));
    add_common_options(gen, opt);

    auto* order = app.add_subcommand("check-order", "Decide whether mu precedes nu in subharmonic order");
    add_instance_options(order, opt);
    order->add_option("--route", opt.route, "Decision route")->check(CLI::IsMember({"lp", "potential", "both"}));
    add_common_options(order, opt);

    auto* solve = app.add_subcommand("solve", "Solve the optimal embedding LP");
    add_instance_options(solve, opt);
    add_common_options(solve, opt);

    auto* duality = app.add_subcommand("duality", "Solve and verify the dual certificate");
    add_instance_options(duality, opt);
    duality->add_option("--tol", opt.tol, "Gap and residual tolerance")->check(CLI::PositiveNumber);
    add_common_options(duality, opt);

    auto* barrier = app.add_subcommand("barrier", "Check the spherical-cap structure of an optimal rule");
    add_instance_options(barrier, opt);
    add_barrier_options(barrier, opt);
    add_common_options(barrier, opt);

    auto* gain = app.add_subcommand("gain-scan", "Scan gain bounds along a level set");
    add_geometry_options(gain, opt);
    gain->add_option("--y", opt.y, "Start point in lattice coordinates (default 2,0[,0])")->delimiter(',');
    gain->add_option("--profile-radius", opt.profile_radius, "Radius of the stop profile (default 2|y|)");
    gain->add_option("--r-x", opt.r_x, "Radius of the scanned level set")->check(CLI::PositiveNumber);
    add_common_options(gain, opt);

    auto* env = app.add_subcommand("envelope", "Shell and one-step envelopes of a grid function");
    add_instance_options(env, opt);
    env->add_option("--grid-function", opt.grid_function, "CSV z1..zd,value (default: solved marginal potentials)");
    add_common_options(env, opt);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo replay of the optimal stop rule");
    add_instance_options(sim, opt);
    add_sim_options(sim, opt);
    add_common_options(sim, opt);

    auto* report = app.add_subcommand("report", "Run every instance check and bundle the verdicts");
    add_instance_options(report, opt);
    report->add_option("--route", opt.route, "Order decision route")->check(CLI::IsMember({"lp", "potential", "both"}));
    report->add_option("--tol", opt.tol, "Duality tolerance")->check(CLI::PositiveNumber);
    add_barrier_options(report, opt);
    add_sim_options(report, opt);
    add_common_options(report, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (!opt.config.empty()) apply_config(sub, opt.config);
        return dispatch(*sub, opt, out);
    } catch (const ConfigError& e) {
        err << "skembed: " << e.what() << "\n";
        return kConfigError;
    } catch (const CLI::Error& e) {
        err << "skembed: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConsistencyError& e) {
        err << "skembed: " << e.what() << "\n";
        return kInternalError;
    } catch (const Error& e) {
        err << "skembed: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "skembed: internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace skembed::cli
