#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lapsolve/config.hpp"
#include "lapsolve/decompose.hpp"
#include "lapsolve/graph.hpp"
#include "lapsolve/io.hpp"
#include "lapsolve/path_sparsify.hpp"
#include "lapsolve/resistance.hpp"
#include "lapsolve/rng.hpp"
#include "lapsolve/solvers.hpp"
#include "lapsolve/spectral_subgraph.hpp"
#include "lapsolve/ultrasparsify.hpp"

using json = nlohmann::ordered_json;
using namespace lapsolve;

namespace {

constexpr const char* kVersion = "0.1.0";

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    double eps = 1e-8;
    std::uint64_t seed = 1;
    double k = 0;
    double p = 0;
    std::vector<std::string> config;
    std::string format = "edgelist";
    std::string out;
    std::string report;
};

struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> inputs, outputs;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;

    json to_json() const {
        json j;
        j["tool"] = "lapsolve";
        j["version"] = kVersion;
        j["subcommand"] = subcommand;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["config_overrides"] = overrides;
        j["seed"] = seed;
        std::time_t t = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        j["timestamp"] = buf;
        return j;
    }
};

void add_common(CLI::App* sub, Common& c, bool with_k, bool with_eps) {
    if (with_eps) sub->add_option("--eps", c.eps, "target error");
    sub->add_option("--seed", c.seed, "master seed");
    if (with_k) sub->add_option("--k", c.k, "sparsity parameter");
    sub->add_option("--p", c.p, "distortion exponent");
    sub->add_option("--config", c.config, "KEY=VAL or a file of KEY=VAL lines (repeatable)");
    sub->add_option("--format", c.format, "graph format")->check(CLI::IsMember({"edgelist", "mtx"}));
    sub->add_option("--out", c.out, "primary output file");
    sub->add_option("--report", c.report, "JSON report path (default stdout)");
}

SolverConfig make_config(const Common& c, RunManifest& man) {
    SolverConfig cfg;
    try {
        for (const auto& s : c.config) {
            if (s.find('=') != std::string::npos) {
                cfg.set_assignment(s);
            } else {
                cfg.load_file(s);
                man.inputs["config:" + s] = s;
            }
            man.overrides.push_back(s);
        }
        if (c.p > 0) cfg.set("p", std::to_string(c.p));
        cfg.epsilon = c.eps;
        cfg.seed = c.seed;
        cfg.validate();
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    man.seed = c.seed;
    return cfg;
}

json constants_json(SolverConfig cfg) {
    json j;
    for (auto& e : cfg.entries()) {
        json v;
        v["paper"] = e.paper;
        if (e.num)
            v["effective"] = *e.num;
        else
            v["effective"] = *e.str;
        j[e.key] = v;
    }
    return j;
}

WeightedMultiGraph load_graph(const std::string& path, const std::string& format) {
    try {
        return read_graph_file(path, format);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

std::vector<double> load_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return read_vector(in);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

void save_vector(const std::string& path, const std::vector<double>& x) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    write_vector(out, x);
}

void save_graph(const std::string& path, const WeightedMultiGraph& g, const std::string& format) {
    try {
        write_graph_file(path, g, format);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

void emit(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << '\n';
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json report_json(const SolveReport& r) {
    json j;
    j["components"] = r.components;
    j["final_residual"] = finite_or_null(r.final_residual);
    j["final_error"] = r.final_error >= 0 ? finite_or_null(r.final_error) : json(nullptr);
    j["wall_seconds"] = r.wall_seconds;
    j["base_case_solver"] = r.base_case_solver;
    json lv = json::array();
    for (const auto& l : r.levels) {
        json x;
        x["level"] = l.level;
        x["calls"] = l.calls;
        x["base_case_calls"] = l.base_case_calls;
        x["guard_fallbacks"] = l.guard_fallbacks;
        x["cg_iterations"] = l.cg_iterations;
        x["agd_iterations"] = l.agd_iterations;
        x["n_max"] = l.n_max;
        x["m_max"] = l.m_max;
        x["h_edges"] = l.h_edges;
        x["tau_norm_pp"] = l.tau_norm_pp;
        x["kappa"] = l.kappa;
        x["eta"] = l.eta;
        x["k"] = l.k;
        json rs;
        rs["iterations"] = l.richardson.iterations;
        rs["updates"] = l.richardson.updates;
        rs["skipped"] = l.richardson.skipped;
        rs["draws"] = l.richardson.draws;
        rs["sampled_edges_total"] = l.richardson.sampled_edges_total;
        rs["sampled_edges_max"] = l.richardson.sampled_edges_max;
        rs["core_vertices_max"] = l.richardson.core_vertices_max;
        rs["inner_calls"] = l.richardson.inner_calls;
        x["richardson"] = rs;
        lv.push_back(x);
    }
    j["levels"] = lv;
    j["residual_trajectory"] = r.residual_trajectory;
    j["error_trajectory"] = r.error_trajectory;
    return j;
}

json wrap(const RunManifest& man, const SolverConfig& cfg, json result) {
    json j;
    j["manifest"] = man.to_json();
    j["constants"] = constants_json(cfg);
    j["result"] = std::move(result);
    return j;
}

double relative_a_error(const WeightedMultiGraph& g, const std::vector<double>& x, const std::vector<double>& ref) {
    return RecursiveSolver::relative_error(CsrLaplacian(g), x, ref);
}

// ---------------------------------------------------------------- subcommands

json cmd_solve(const Common& c, const std::string& graph, const std::string& rhs, bool check, RunManifest& man,
               SolverConfig& cfg) {
    man.inputs["graph"] = graph;
    man.inputs["rhs"] = rhs;
    auto g = load_graph(graph, c.format);
    auto b = load_vector(rhs);
    if (static_cast<int>(b.size()) != g.num_vertices())
        throw InputError("rhs has " + std::to_string(b.size()) + " entries, graph has " +
                         std::to_string(g.num_vertices()) + " vertices");
    if (g.num_vertices() == 0) throw NumericalError("empty graph");
    if (!(c.eps > 0 && c.eps < 1)) throw InputError("--eps must lie in (0,1)");
    for (double v : b)
        if (!std::isfinite(v)) throw InputError("rhs has a non-finite entry");
    std::vector<double> ref;
    if (check) {
        auto bp = b;
        project_to_range(g, bp);
        ref = conjugate_gradient(g, bp, cfg.base_case_tol);
    }
    SolveReport rep;
    auto x = recursive_solver(g, b, c.eps, cfg, c.seed, &rep, check ? &ref : nullptr);
    for (double v : x)
        if (!std::isfinite(v)) throw NumericalError("solution has a non-finite entry");
    if (!c.out.empty()) {
        save_vector(c.out, x);
        man.outputs["solution"] = c.out;
    }
    json r;
    r["n"] = g.num_vertices();
    r["m"] = g.num_edges();
    r["eps"] = c.eps;
    r["checked_against_cg"] = check;
    r["report"] = report_json(rep);
    return r;
}

json cmd_sparsify(const Common& c, const std::string& graph, const std::string& tau_path, RunManifest& man,
                  SolverConfig& cfg) {
    man.inputs["graph"] = graph;
    auto g = load_graph(graph, c.format);
    const int n = g.num_vertices();
    const double ln = std::log(std::max(n, 3));
    const double k = c.k > 0 ? c.k : std::max(3.0, g.num_edges() / (ln * ln));
    if (k <= 1) throw InputError("--k must exceed 1");
    auto D = spectral_subgraph(g, k, cfg, SeedSplitter(c.seed));
    auto H = edge_subgraph(g, D.H).graph;
    if (!c.out.empty()) {
        save_graph(c.out, H, c.format);
        man.outputs["subgraph"] = c.out;
    }
    if (!tau_path.empty()) {
        std::ofstream out(tau_path);
        if (!out) throw InputError("cannot write " + tau_path);
        out << "edge,u,v,w,tau\n";
        for (int e = 0; e < g.num_edges(); ++e) {
            const Edge& ed = g.edge(e);
            out << e << ',' << ed.u << ',' << ed.v << ',' << format_double(ed.w) << ',' << format_double(D.tau[e]) << '\n';
        }
        man.outputs["tau"] = tau_path;
    }
    json r;
    r["n"] = n;
    r["m"] = g.num_edges();
    r["k"] = k;
    r["p"] = D.p;
    r["h_edges"] = D.H.size();
    r["kappa_measured"] = D.kappa_measured;
    r["params"] = {{"beta", D.params.beta}, {"sigma", D.params.sigma}, {"delta", D.params.delta},
                   {"beta_delta_p", D.params.beta_delta_p()}, {"converges", D.params.converges()},
                   {"overridden", D.params.overridden}};
    r["num_buckets"] = D.num_buckets;
    r["forest_edges"] = D.forest_edges;
    r["augment_edges"] = D.augment_edges;
    r["extra_edges"] = D.extra_edges;
    r["giveup_edges"] = D.giveup_edges;
    r["forest_invariant_ok"] = D.forest_invariant_ok;
    r["decay_ok"] = D.decay_ok;
    json its = json::array();
    for (const auto& it : D.iterations)
        its.push_back({{"t", it.t},
                       {"window", {it.window_lo, it.window_hi}},
                       {"window_edges", it.window_edges},
                       {"pieces", it.pieces},
                       {"trees", it.trees},
                       {"settled", it.settled},
                       {"augment_added", it.augment_added},
                       {"extra_added", it.extra_added},
                       {"giveup_added", it.giveup_added},
                       {"forest_diameter", it.forest_diameter},
                       {"forest_bound", it.forest_bound}});
    r["iterations"] = its;
    if (n <= oracle::dense_cap()) {
        std::vector<double> stretch;
        r["distortion_oracle"] = distortion(g, D.H, D.p, &stretch);
        double worst = 0;
        for (int e = 0; e < g.num_edges(); ++e)
            if (D.tau[e] > 0) worst = std::max(worst, stretch[e] / D.tau[e]);
        r["worst_tau_ratio"] = worst;
    }
    return r;
}

json cmd_path_sparsify(const Common& c, const std::string& graph, bool verify, bool menger, RunManifest& man,
                       SolverConfig& cfg) {
    man.inputs["graph"] = graph;
    auto g = load_graph(graph, c.format);
    const double k = c.k > 0 ? c.k : 1;
    auto res = path_sparsify(g, k, cfg, SeedSplitter(c.seed));
    if (!c.out.empty()) {
        save_graph(c.out, edge_subgraph(g, res.F).graph, c.format);
        man.outputs["retained"] = c.out;
    }
    json r;
    r["n"] = g.num_vertices();
    r["m"] = g.num_edges();
    r["k"] = k;
    r["k_partial"] = res.k_partial;
    r["retained_edges"] = res.F.size();
    r["budget"] = res.budget;
    r["claims"] = res.claims.size();
    json its = json::array();
    for (const auto& it : res.iterations)
        its.push_back({{"remain_before", it.remain_before},
                       {"remain_after", it.remain_after},
                       {"assigned", it.assigned},
                       {"f_added", it.f_added},
                       {"pieces", it.pieces}});
    r["iterations"] = its;
    if (verify) {
        auto v = verify_path_sparsifier(g, res.F, res.claims, menger);
        r["verification"] = {{"checked", v.checked}, {"passed", v.passed}, {"pass_rate", v.pass_rate()},
                             {"pass", v.pass}, {"menger", menger}};
    }
    return r;
}

json cmd_ultrasparsify(const Common& c, const std::string& graph, RunManifest& man, SolverConfig& cfg) {
    man.inputs["graph"] = graph;
    auto g = load_graph(graph, c.format);
    const double k = c.k > 0 ? c.k : 2;
    auto us = ultrasparsify(g, k, cfg, c.seed);
    if (!c.out.empty()) {
        save_graph(c.out, us.H, c.format);
        man.outputs["ultrasparsifier"] = c.out;
    }
    auto pb = oracle::pencil_bounds(g, us.H);  // L_G against L_H
    json r;
    r["n"] = us.n;
    r["m"] = g.num_edges();
    r["k"] = k;
    r["statement_k"] = us.statement_k;
    r["h_edges"] = us.H.num_edges();
    r["edge_bound"] = us.edge_bound;
    r["edge_bound_ok"] = us.edge_bound_ok;
    r["scale"] = us.scale;
    r["presparsify"] = {{"applied", us.pre.applied},        {"fell_back", us.pre.fell_back},
                        {"ratio_exceeded", us.pre.ratio_exceeded}, {"attempts", us.pre.attempts},
                        {"input_edges", us.pre.input_edges}, {"output_edges", us.pre.output_edges},
                        {"ratio", us.pre.lambda_max}};
    r["trace"] = us.removal.trace;
    r["trace_bound"] = us.removal.bound;
    r["trace_bound_ok"] = us.removal.bound_ok;
    r["sherman_morrison_drift"] = us.removal.max_sm_drift;
    r["bss"] = {{"kappa", us.bss.kappa}, {"q", us.bss.q}, {"steps", us.bss.s}, {"violations", us.bss.violations},
                {"lambda_min", us.bss.lambda_min}, {"lambda_max", us.bss.lambda_max}};
    r["proof_sandwich_ok"] = us.proof_sandwich_ok;
    r["pencil_lambda_min"] = pb.lambda_min;
    r["pencil_lambda_max"] = pb.lambda_max;
    r["condition_number"] = pb.lambda_max / pb.lambda_min;
    r["h_below_g"] = pb.lambda_min >= 1 - 1e-9;
    return r;
}

std::vector<double> load_tau_csv(const std::string& path, int m) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<double> tau(m, -1);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("edge", 0) == 0) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (auto& x : f)
            if (!std::getline(ss, x, ',')) throw InputError("bad tau line: " + line);
        int e = std::stoi(f[0]);
        if (e < 0 || e >= m) throw InputError("tau edge out of range: " + line);
        tau[e] = std::stod(f[4]);
    }
    for (double t : tau)
        if (t < 0) throw InputError("tau file does not cover every edge");
    return tau;
}

json cmd_verify(const Common& c, const std::string& graph, const std::string& sub, const std::string& tau_path,
                const std::string& xpath, const std::string& bpath, RunManifest& man, SolverConfig& cfg) {
    man.inputs["graph"] = graph;
    auto g = load_graph(graph, c.format);
    const int n = g.num_vertices();
    json r;
    r["n"] = n;
    r["m"] = g.num_edges();
    bool pass = true;
    if (!sub.empty()) {
        man.inputs["subgraph"] = sub;
        auto h = load_graph(sub, c.format);
        if (h.num_vertices() != n) throw InputError("subgraph has a different vertex count");
        auto pb = oracle::pencil_bounds(h, g);
        bool below = pb.lambda_max <= 1 + 1e-9;
        r["subgraph"] = {{"edges", h.num_edges()},
                         {"pencil_lambda_min", pb.lambda_min},
                         {"pencil_lambda_max", pb.lambda_max},
                         {"h_below_g", below}};
        pass = pass && below;
        if (!tau_path.empty()) {
            man.inputs["tau"] = tau_path;
            auto tau = load_tau_csv(tau_path, g.num_edges());
            oracle::ResistanceOracle ro(h);
            double worst = 0, dist = 0;
            for (int e = 0; e < g.num_edges(); ++e) {
                const Edge& ed = g.edge(e);
                double lev = ed.u == ed.v ? 0 : ed.w * ro.resistance(ed.u, ed.v);
                if (!std::isfinite(lev)) lev = std::numeric_limits<double>::infinity();
                if (tau[e] > 0)
                    worst = std::max(worst, lev / tau[e]);
                else if (lev > 0)
                    worst = std::numeric_limits<double>::infinity();
                dist += std::pow(tau[e], cfg.p);
            }
            bool ok = worst <= 1 + 1e-9;
            r["tau"] = {{"worst_ratio", finite_or_null(worst)}, {"tau_norm_pp", dist}, {"valid", ok}};
            pass = pass && ok;
        }
    }
    if (!xpath.empty() || !bpath.empty()) {
        if (xpath.empty() || bpath.empty()) throw InputError("--x and --b go together");
        man.inputs["x"] = xpath;
        man.inputs["b"] = bpath;
        auto x = load_vector(xpath);
        auto b = load_vector(bpath);
        if (static_cast<int>(x.size()) != n || static_cast<int>(b.size()) != n) throw InputError("vector length mismatch");
        project_to_range(g, b);
        std::vector<double> ref = n <= oracle::dense_cap() ? oracle::pinv_solve(g, b) : conjugate_gradient(g, b, 1e-14);
        auto lx = laplacian_matvec(g, x);
        double rn = 0, bn = 0;
        for (int i = 0; i < n; ++i) {
            rn += (lx[i] - b[i]) * (lx[i] - b[i]);
            bn += b[i] * b[i];
        }
        double err = relative_a_error(g, x, ref);
        r["solution"] = {{"relative_residual", bn > 0 ? std::sqrt(rn / bn) : std::sqrt(rn)},
                         {"relative_error", err},
                         {"reference", n <= oracle::dense_cap() ? "dense-pinv" : "cg-1e-14"},
                         {"within_eps", err <= c.eps}};
        pass = pass && err <= c.eps;
    }
    r["pass"] = pass;
    return r;
}

json cmd_decompose(const Common& c, const std::string& graph, double beta, double radius, double delta,
                   RunManifest& man) {
    man.inputs["graph"] = graph;
    auto g = load_graph(graph, c.format);
    if (!(beta > 0 && beta <= 1.0 / 6 + 1e-15)) throw InputError("--beta must lie in (0, 1/6]");
    if (radius < 0) throw InputError("--radius must be nonnegative");
    EdgePartition buckets;
    if (delta > 1) {
        buckets = bucket_edges(g, delta);
    } else {
        buckets.bucket_of.assign(g.num_edges(), 0);
        buckets.num_buckets = g.num_edges() ? 1 : 0;
    }
    auto d = decompose(g, buckets, beta, radius);
    auto rep = check_decomposition_bounds(g, buckets, beta, radius, d);
    if (!c.out.empty()) {
        std::ofstream out(c.out);
        if (!out) throw InputError("cannot write " + c.out);
        for (int p : d.piece_of) out << p << '\n';
        man.outputs["piece_of"] = c.out;
    }
    std::vector<int> sizes;
    for (const auto& p : d.pieces) sizes.push_back(static_cast<int>(p.vertices.size()));
    json r;
    r["n"] = g.num_vertices();
    r["m"] = g.num_edges();
    r["beta"] = beta;
    r["radius"] = radius;
    r["buckets"] = buckets.num_buckets;
    r["pieces"] = d.pieces.size();
    r["trees"] = d.tree_count();
    r["piece_sizes"] = sizes;
    r["max_tree_radius"] = rep.max_radius;
    r["cut_per_bucket"] = rep.cut_per_bucket;
    r["cut_bound_per_bucket"] = rep.cut_bound_per_bucket;
    r["tree_count_bound"] = rep.tree_count_bound;
    r["bounds"] = {{"cut", rep.cut_ok}, {"radius", rep.radius_ok}, {"count", rep.count_ok},
                   {"partition", rep.partition_ok}, {"all", rep.all()}};
    return r;
}

// ---------------------------------------------------------------- bench

struct BenchSpec {
    std::string family;
    int degree = 8;
    double w_ratio = 1e6;
};

WeightedMultiGraph bench_graph(const BenchSpec& s, int size, std::uint64_t seed) {
    if (s.family == "grid") return grid_graph(size, size);
    if (s.family == "random-regular") return random_regular_graph(size, s.degree, seed);
    if (s.family == "expander") return margulis_graph(size);
    auto g = grid_graph(size, size);
    Rng rng = SeedSplitter(seed).stream("bench-weights");
    std::vector<Edge> es = g.edges();
    for (auto& e : es) e.w = std::exp(std::log(s.w_ratio) * uniform01(rng));
    return WeightedMultiGraph(g.num_vertices(), std::move(es));
}

struct BenchRow {
    std::string family, solver;
    int n = 0;
    long long m = 0;
    std::uint64_t seed = 0;
    long long iterations = 0;
    double wall = 0, error = 0;
    int weight_classes = 0;
};

std::vector<BenchRow> bench_instance(const BenchSpec& s, int size, std::uint64_t seed, double eps,
                                     const SolverConfig& cfg) {
    auto g = bench_graph(s, size, seed);
    const int n = g.num_vertices();
    const long long m = g.num_edges();
    Rng rng = SeedSplitter(seed).stream("bench-rhs");
    std::normal_distribution<double> nd;
    std::vector<double> b(n);
    for (double& x : b) x = nd(rng);
    project_to_range(g, b);
    auto ref = conjugate_gradient(g, b, 1e-14);
    const double ln = std::log(std::max(n, 3));
    const double k = cfg.akpw_k_override > 0 ? cfg.akpw_k_override : std::max(3.0, m / (ln * ln));
    int classes = bucket_edges(g, AkpwParams::from_config(k, cfg).delta).num_buckets;

    std::vector<BenchRow> rows;
    {
        SolveReport rep;
        auto t0 = std::chrono::steady_clock::now();
        auto x = recursive_solver(g, b, eps, cfg, seed, &rep);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        long long its = rep.levels.empty() ? 0 : rep.levels[0].agd_iterations;
        if (!rep.levels.empty() && rep.levels[0].base_case_calls) its = rep.levels[0].cg_iterations;
        rows.push_back({s.family, "recursive", n, m, seed, its, wall, relative_a_error(g, x, ref), classes});
    }
    {
        CgStats cs;
        auto t0 = std::chrono::steady_clock::now();
        auto x = conjugate_gradient(g, b, eps, &cs);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back({s.family, "cg", n, m, seed, cs.iterations, wall, relative_a_error(g, x, ref), classes});
    }
    return rows;
}

std::string bench_csv(const BenchSpec& s, const std::vector<int>& sizes, int seeds, const Common& c,
                      const SolverConfig& cfg, int jobs) {
    struct Job {
        int size;
        std::uint64_t seed;
    };
    std::vector<Job> todo;
    for (int sz : sizes)
        for (int i = 0; i < seeds; ++i) todo.push_back({sz, c.seed + static_cast<std::uint64_t>(i)});
    std::vector<std::vector<BenchRow>> out(todo.size());
    std::size_t next = 0;
    while (next < todo.size()) {
        std::vector<std::future<std::vector<BenchRow>>> batch;
        std::size_t start = next;
        for (int j = 0; j < std::max(1, jobs) && next < todo.size(); ++j, ++next)
            batch.push_back(std::async(std::launch::async, bench_instance, s, todo[next].size, todo[next].seed, c.eps, cfg));
        for (std::size_t j = 0; j < batch.size(); ++j) out[start + j] = batch[j].get();
    }
    std::ostringstream csv;
    csv << "family,n,m,seed,solver,iterations,wall_seconds,final_error,weight_classes\n";
    for (const auto& rs : out)
        for (const auto& r : rs)
            csv << r.family << ',' << r.n << ',' << r.m << ',' << r.seed << ',' << r.solver << ',' << r.iterations << ','
                << format_double(r.wall) << ',' << format_double(r.error) << ',' << r.weight_classes << '\n';
    return csv.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplacian solver pipeline"};
    app.set_version_flag("--version", std::string("lapsolve ") + kVersion);
    app.require_subcommand(1);
    Common c;

    std::string graph, rhs, tau_out, sub, tau_in, xpath, bpath, family = "grid";
    bool check = false, no_verify = false, menger = false;
    double beta = 1.0 / 6, radius = 4, delta = 0;
    std::vector<int> sizes;
    int seeds = 1, jobs = 1;
    BenchSpec spec;

    auto* solve = app.add_subcommand("solve", "solve L x = b");
    solve->add_option("graph", graph, "graph file")->required();
    solve->add_option("rhs", rhs, "right-hand side, one value per line")->required();
    solve->add_flag("--check", check, "compare against a CG reference in the report");
    add_common(solve, c, false, true);

    auto* sparsify = app.add_subcommand("sparsify", "distortion spectral subgraph with leverage overestimates");
    sparsify->add_option("graph", graph)->required();
    sparsify->add_option("--tau", tau_out, "CSV of per-edge tau");
    add_common(sparsify, c, true, false);

    auto* psparsify = app.add_subcommand("path-sparsify", "path sparsifier");
    psparsify->add_option("graph", graph)->required();
    psparsify->add_flag("--no-verify", no_verify, "skip the path-count verification");
    psparsify->add_flag("--menger", menger, "also count vertex-disjoint paths exactly");
    add_common(psparsify, c, true, false);

    auto* ultra = app.add_subcommand("ultrasparsify", "dense ultrasparsifier");
    ultra->add_option("graph", graph)->required();
    add_common(ultra, c, true, false);

    auto* verify = app.add_subcommand("verify", "check a subgraph, tau file or solution against a graph");
    verify->add_option("graph", graph)->required();
    verify->add_option("--subgraph", sub);
    verify->add_option("--tau", tau_in);
    verify->add_option("--x", xpath);
    verify->add_option("--b", bpath);
    add_common(verify, c, false, true);

    auto* decomp = app.add_subcommand("decompose", "ball-growing decomposition statistics");
    decomp->add_option("graph", graph)->required();
    decomp->add_option("--beta", beta);
    decomp->add_option("--radius", radius);
    decomp->add_option("--delta", delta, "weight bucket base; <= 1 puts every edge in one bucket");
    add_common(decomp, c, false, false);

    auto* bench = app.add_subcommand("bench", "recursive solver against plain CG");
    bench->add_option("--family", family)->check(CLI::IsMember({"grid", "random-regular", "expander", "heavy-weights"}));
    bench->add_option("--sizes", sizes, "grid side, or n for random-regular")->delimiter(',')->required();
    bench->add_option("--seeds", seeds);
    bench->add_option("--degree", spec.degree);
    bench->add_option("--w-ratio", spec.w_ratio);
    bench->add_option("--jobs", jobs);
    add_common(bench, c, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunManifest man;
    try {
        man.subcommand = app.get_subcommands().front()->get_name();
        SolverConfig cfg = make_config(c, man);
        json result;
        if (*solve) {
            result = cmd_solve(c, graph, rhs, check, man, cfg);
        } else if (*sparsify) {
            result = cmd_sparsify(c, graph, tau_out, man, cfg);
        } else if (*psparsify) {
            result = cmd_path_sparsify(c, graph, !no_verify, menger, man, cfg);
        } else if (*ultra) {
            result = cmd_ultrasparsify(c, graph, man, cfg);
        } else if (*verify) {
            result = cmd_verify(c, graph, sub, tau_in, xpath, bpath, man, cfg);
        } else if (*decomp) {
            result = cmd_decompose(c, graph, beta, radius, delta, man);
        } else {
            spec.family = family;
            if (!(c.eps > 0 && c.eps < 1)) throw InputError("--eps must lie in (0,1)");
            std::string csv = bench_csv(spec, sizes, seeds, c, cfg, jobs);
            if (c.out.empty()) {
                std::cout << csv;
                return 0;
            }
            std::ofstream out(c.out);
            if (!out) throw InputError("cannot write " + c.out);
            out << csv;
            man.outputs["csv"] = c.out;
            result = {{"family", family}, {"sizes", sizes}, {"seeds", seeds}};
        }
        emit(wrap(man, cfg, std::move(result)), c.report);
        if (!c.report.empty()) man.outputs["report"] = c.report;
        return 0;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
}
