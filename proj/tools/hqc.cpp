// Copyright 2026 The hqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: hqc {hhl,maxcut,knit,sched,serve,submit}.
//
// Exit codes: 0 success, 1 runtime failure or failed check, 2 usage error.

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hqc/hqc.hpp"

namespace {

using namespace hqc;
using nlohmann::json;

constexpr int kUsageError = 2;
constexpr const char *kDefaultServer = "127.0.0.1:5555";

/// Config files are JSON objects: top-level keys set global options and a
/// nested object named after a subcommand sets that subcommand's options,
/// e.g. {"knit": {"seeds": 50, "chi": 32}}.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App *app, bool default_also, bool, std::string) const override {
        return dump(app, default_also).dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream &in) const override {
        json doc;
        try {
            in >> doc;
        } catch (const json::exception &e) {
            throw CLI::ConfigError(std::string("invalid JSON config: ") + e.what());
        }
        if (!doc.is_object()) throw CLI::ConfigError("JSON config must be an object");
        std::vector<CLI::ConfigItem> items;
        flatten(doc, {}, items);
        return items;
    }

  private:
    static json dump(const CLI::App *app, bool default_also) {
        json out = json::object();
        for (const CLI::Option *opt : app->get_options()) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string name = opt->get_lnames().front();
            if (opt->count() > 0) {
                const auto &r = opt->results();
                out[name] = r.size() == 1 ? json(r[0]) : json(r);
            } else if (default_also && !opt->get_default_str().empty()) {
                out[name] = opt->get_default_str();
            }
        }
        for (const CLI::App *sub : app->get_subcommands({})) {
            json nested = dump(sub, default_also);
            if (!nested.empty()) out[sub->get_name()] = nested;
        }
        return out;
    }

    static std::string scalar(const json &v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void flatten(const json &obj, const std::vector<std::string> &parents,
                        std::vector<CLI::ConfigItem> &items) {
        for (const auto &[key, value] : obj.items()) {
            if (value.is_object()) {
                auto path = parents;
                path.push_back(key);
                flatten(value, path, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const json &v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

std::string default_server() {
    const char *v = std::getenv("HQC_SERVER");
    return v && *v ? v : kDefaultServer;
}

json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Writes to `path`, or stdout when it is empty or "-".
class Output {
  public:
    explicit Output(const std::string &path, std::ios::openmode mode = std::ios::out) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, mode);
            if (!*file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream &stream() {
        return file_ ? *file_ : std::cout;
    }

  private:
    std::unique_ptr<std::ofstream> file_;
};

/// Runs body(i) for every i in [0, count) on `jobs` threads.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F body) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) body(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(std::max<std::size_t>(jobs, 1), std::max<std::size_t>(count, 1)); ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) t.join();
}

// ---------------------------------------------------------------------------
// hhl

struct HhlArgs {
    std::string system;
    std::optional<std::size_t> m;
    double tol = 0.02;
    std::string csv;
    std::size_t random = 0;
    std::size_t dim = 4;
    double lambda_min = 1.0;
    double lambda_max = 8.0;
    double pass_fraction = 0.95;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

int run_hhl(const HhlArgs &a) {
    if (a.system.empty() == (a.random == 0)) {
        std::cerr << "hhl: give exactly one of a system file or --random N\n";
        return kUsageError;
    }
    if (!a.system.empty()) {
        const json doc = read_json_file(a.system);
        LinearSystem sys = linear_system_from_json(doc);
        if (a.m) sys = make_linear_system(sys.A, sys.b, *a.m);
        const HhlResult r = solve(sys);
        std::cerr << "system: " << a.system << " (" << sys.A.rows() << "x" << sys.A.cols() << ", m=" << sys.m
                  << ", " << sys.n + sys.m + 1 << " qubits)\n"
                  << "pauli terms: " << r.pauli_terms << "\n"
                  << "success probability: " << r.success_prob << "\n"
                  << "deviation: " << r.deviation << " (tolerance " << a.tol << ")\n";
        for (const std::string &w : r.warnings) std::cerr << "warning: " << w << "\n";
        Output out(a.csv);
        write_hhl_csv(out.stream(), r);
        return r.deviation < a.tol ? 0 : 1;
    }

    // Random ensemble: A = Q diag(lambda) Q^T with lambda ~ U[lambda_min, lambda_max].
    struct Row {
        double deviation = 0, success = 0;
        std::size_t warnings = 0;
    };
    std::vector<Row> rows(a.random);
    const std::size_t m = a.m.value_or(6);
    parallel_for(a.random, a.jobs, [&](std::size_t i) {
        Rng rng(derive_seed(a.seed, i));
        const Eigen::MatrixXcd A = random_spd_matrix(a.dim, a.lambda_min, a.lambda_max, rng);
        const Eigen::VectorXcd b = random_gaussian_vector(a.dim, rng);
        const HhlResult r = solve(make_linear_system(A, b, m));
        rows[i] = {r.deviation, r.success_prob, r.warnings.size()};
    });
    Output out(a.csv);
    std::ostringstream text;
    text.precision(17);
    text << "instance,deviation,success_prob,warnings\n";
    std::size_t passed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        text << i << ',' << rows[i].deviation << ',' << rows[i].success << ',' << rows[i].warnings << '\n';
        if (rows[i].deviation < a.tol) ++passed;
    }
    out.stream() << text.str();
    const double fraction = static_cast<double>(passed) / static_cast<double>(rows.size());
    std::cerr << passed << "/" << rows.size() << " systems below deviation " << a.tol << " (required fraction "
              << a.pass_fraction << ")\n";
    return fraction >= a.pass_fraction ? 0 : 1;
}

// ---------------------------------------------------------------------------
// maxcut

struct MaxcutArgs {
    std::string graph;
    std::string method = "qaoa2";
    std::size_t p = 1;
    std::size_t cap = 8;
    std::size_t restarts = 5;
    std::uint64_t shots = 1024;
    std::uint64_t trials = 1000;
    std::string merge = "auto";
    std::uint64_t seed = 0;
    std::string csv;
};

int run_maxcut(const MaxcutArgs &a) {
    std::ifstream in(a.graph);
    if (!in) throw std::runtime_error("cannot open " + a.graph);
    const Graph g = read_graph(in);
    OptimizerConfig config;
    config.restarts = a.restarts;

    json doc;
    CutAssignment result;
    if (a.method == "greedy") {
        result = baseline_greedy(g);
        doc = maxcut_json(result, a.method);
    } else if (a.method == "random") {
        result = baseline_random(g, a.trials, a.seed);
        doc = maxcut_json(result, a.method);
    } else if (a.method == "qaoa") {
        const QaoaSolution sol = optimize_qaoa(g, a.p, config, a.seed);
        result = sample_assignment(g, sol.params, a.shots, derive_seed(a.seed, 1));
        doc = maxcut_json(result, a.method, sol.params);
        doc["expected_cut"] = sol.expected_cut;
    } else {
        const MergeMode mode = a.merge == "brute" ? MergeMode::Brute
                               : a.merge == "local" ? MergeMode::Local
                                                    : MergeMode::Auto;
        const QaoaSquaredResult r = qaoa_squared(g, a.cap, a.p, mode, a.seed, config, a.shots);
        result = r.assignment;
        doc = maxcut_json(result, a.method);
        doc["communities"] = r.partition.communities;
        doc["signs"] = r.signs;
        doc["unsigned_cut"] = r.unsigned_cut;
    }
    doc["seed"] = a.seed;
    std::cout << doc.dump(2) << "\n";
    if (!a.csv.empty()) {
        const bool fresh = !std::ifstream(a.csv).good() || std::ifstream(a.csv).peek() == EOF;
        Output out(a.csv, std::ios::app);
        if (fresh) write_maxcut_csv_header(out.stream());
        write_maxcut_csv_row(out.stream(), g, a.method, result, a.seed);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// knit

struct KnitArgs {
    std::string spec;
    std::size_t seeds = 50;
    std::uint64_t seed = 0;
    bool fixed = false;
    std::size_t jobs = 1;
    std::size_t chi = 64;
    double trunc_tol = 0.0;
    std::optional<std::size_t> max_fragment;
    std::optional<std::size_t> imbalance;
    std::string aggregation = "max";
    double discard_tol = 1e-8;
    std::string csv;
};

int run_knit(const KnitArgs &a) {
    const SpinChainSpec base = spinchain_from_json(read_json_file(a.spec));
    CutConstraints constraints;
    constraints.max_fragment = a.max_fragment;
    constraints.imbalance_tol = a.imbalance;
    constraints.aggregation = a.aggregation == "mean" ? Aggregation::Mean : Aggregation::Max;
    MpsOptions mps;
    mps.chi_max = a.chi;
    mps.trunc_tol = a.trunc_tol;

    std::vector<EnsembleRow> rows;
    if (a.fixed) {
        rows.push_back({base.seed, overhead_reduction(build_spinchain_circuit(base), constraints, mps)});
    } else {
        if (a.seeds == 0) {
            std::cerr << "knit: --seeds must be positive\n";
            return kUsageError;
        }
        rows = run_ensemble(base, a.seed, a.seeds, constraints, mps, a.jobs);
    }
    for (const EnsembleRow &r : rows) {
        if (r.report.discarded_weight > a.discard_tol) {
            std::cerr << "warning: seed " << r.seed << " discarded weight " << r.report.discarded_weight
                      << " exceeds " << a.discard_tol << "; chi " << a.chi << " is too small for exact profiles\n";
        }
    }
    Output out(a.csv);
    write_ensemble_csv(out.stream(), rows);
    std::cerr << rows.size() << " instances, median baseline/adaptive overhead ratio " << median_ratio(rows) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sched

struct SchedArgs {
    std::string workload;
    std::string policy = "both";
    std::string timeline;
};

int run_sched(const SchedArgs &a) {
    const Workload w = workload_from_json(read_json_file(a.workload));
    const auto blocks = split_jobs(w.jobs);
    std::vector<Policy> policies;
    if (a.policy != "split") policies.push_back(Policy::Monolithic);
    if (a.policy != "monolithic") policies.push_back(Policy::Split);
    write_metrics_csv_header(std::cout);
    for (Policy p : policies) {
        const Schedule s = schedule(blocks, w.resources, p);
        const auto problems = validate_schedule(blocks, s);
        if (!problems.empty()) throw std::logic_error("invalid schedule: " + problems.front());
        write_metrics_csv_row(std::cout, s);
        if (!a.timeline.empty()) {
            Output out(a.timeline + "-" + policy_name(p) + ".csv");
            write_timeline_csv(out.stream(), s);
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// serve / submit

struct ServeArgs {
    std::string listen;
    std::size_t workers = 2;
    std::size_t max_qubits = 20;
};

int run_serve(const ServeArgs &a) {
    const auto [host, port] = parse_address(a.listen.empty() ? default_server() : a.listen);
    ServerConfig cfg;
    cfg.host = host;
    cfg.port = port;
    cfg.workers = a.workers;
    cfg.max_qubits = a.max_qubits;

    // SIGINT/SIGTERM request a draining shutdown; SIGUSR1 only wakes the
    // signal thread once the server has stopped by itself.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    sigaddset(&set, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    JobServer server(cfg);
    server.start();
    std::cout << "listening on " << host << ":" << server.port() << std::endl;
    std::thread signals([&] {
        int sig = 0;
        sigwait(&set, &sig);
        if (sig != SIGUSR1) server.request_shutdown();
    });
    server.wait();
    pthread_kill(signals.native_handle(), SIGUSR1);
    signals.join();
    std::cout << "server stopped" << std::endl;
    return 0;
}

struct SubmitArgs {
    std::string circuit;
    std::string server;
    std::string observable;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    double timeout = 60.0;
    bool shutdown = false;
};

int run_submit(const SubmitArgs &a) {
    if (a.circuit.empty() && !a.shutdown) {
        std::cerr << "submit: give a QASM file and/or --shutdown\n";
        return kUsageError;
    }
    JobClient client(a.server.empty() ? default_server() : a.server);
    int rc = 0;
    if (!a.circuit.empty()) {
        JobRequest r;
        r.circuit = read_text_file(a.circuit);
        if (!a.observable.empty()) {
            const json obs = a.observable.front() == '@' ? read_json_file(a.observable.substr(1))
                                                         : json::parse(a.observable);
            r.observable = observable_from_json(obs);
        }
        r.mode = a.shots > 0 ? JobMode::sampled(a.shots, a.seed) : JobMode::exact();
        const std::uint64_t id = client.submit(r);
        const json reply =
            client.wait(id, std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout * 1000.0)));
        std::cout << reply.dump(2) << "\n";
        rc = reply.value("ok", false) ? 0 : 1;
    }
    if (a.shutdown) {
        const json reply = client.shutdown();
        if (!reply.value("ok", false)) rc = 1;
    }
    return rc;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Hybrid quantum-classical workload toolkit"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with option values, per subcommand");
    app.require_subcommand(1);

    HhlArgs hhl;
    auto *hhl_cmd = app.add_subcommand("hhl", "Solve A x = b with HHL and compare against a classical solve");
    hhl_cmd->add_option("system", hhl.system, "JSON file with A, b and optional m")->check(CLI::ExistingFile);
    hhl_cmd->add_option("--m", hhl.m, "Clock qubits (overrides the file)")->check(CLI::Range(1, 16));
    hhl_cmd->add_option("--tol", hhl.tol, "Deviation tolerance")->capture_default_str();
    hhl_cmd->add_option("--csv", hhl.csv, "CSV output file (default stdout)");
    hhl_cmd->add_option("--random", hhl.random, "Run N random SPD systems instead of a file");
    hhl_cmd->add_option("--dim", hhl.dim, "Dimension of random systems")->capture_default_str();
    hhl_cmd->add_option("--lambda-min", hhl.lambda_min, "Smallest random eigenvalue")->capture_default_str();
    hhl_cmd->add_option("--lambda-max", hhl.lambda_max, "Largest random eigenvalue")->capture_default_str();
    hhl_cmd->add_option("--pass-fraction", hhl.pass_fraction, "Required passing fraction for --random")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    hhl_cmd->add_option("--seed", hhl.seed, "Seed for random systems")->capture_default_str();
    hhl_cmd->add_option("--jobs", hhl.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    MaxcutArgs mc;
    auto *mc_cmd = app.add_subcommand("maxcut", "Solve MaxCut with QAOA, QAOA^2 or a classical baseline");
    mc_cmd->add_option("graph", mc.graph, "Graph file: node count, then 'u v [w]' lines")
        ->required()
        ->check(CLI::ExistingFile);
    mc_cmd->add_option("--method", mc.method, "Solver")
        ->check(CLI::IsMember({"qaoa", "qaoa2", "greedy", "random"}))
        ->capture_default_str();
    mc_cmd->add_option("--p", mc.p, "QAOA depth")->check(CLI::PositiveNumber)->capture_default_str();
    mc_cmd->add_option("--cap", mc.cap, "Largest community for qaoa2")->check(CLI::Range(2, 20))->capture_default_str();
    mc_cmd->add_option("--restarts", mc.restarts, "Random optimizer restarts")->capture_default_str();
    mc_cmd->add_option("--shots", mc.shots, "Samples per QAOA circuit")->check(CLI::PositiveNumber)->capture_default_str();
    mc_cmd->add_option("--trials", mc.trials, "Random-baseline trials")->check(CLI::PositiveNumber)->capture_default_str();
    mc_cmd->add_option("--merge", mc.merge, "qaoa2 sign merge")
        ->check(CLI::IsMember({"auto", "brute", "local"}))
        ->capture_default_str();
    mc_cmd->add_option("--seed", mc.seed, "Seed")->capture_default_str();
    mc_cmd->add_option("--csv", mc.csv, "Append a CSV row to this file");

    KnitArgs kn;
    auto *kn_cmd = app.add_subcommand("knit", "Adaptive-vs-baseline cut overhead on disordered spin chains");
    kn_cmd->add_option("spec", kn.spec, "Spin chain JSON file")->required()->check(CLI::ExistingFile);
    kn_cmd->add_option("--seeds", kn.seeds, "Ensemble size")->capture_default_str();
    kn_cmd->add_option("--seed", kn.seed, "First instance seed")->capture_default_str();
    kn_cmd->add_flag("--fixed", kn.fixed, "Evaluate the file's fields as given instead of an ensemble");
    kn_cmd->add_option("--jobs", kn.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    kn_cmd->add_option("--chi", kn.chi, "MPS bond dimension cap")->check(CLI::PositiveNumber)->capture_default_str();
    kn_cmd->add_option("--trunc-tol", kn.trunc_tol, "MPS truncation tolerance")->capture_default_str();
    kn_cmd->add_option("--max-fragment", kn.max_fragment, "Largest fragment in qubits");
    kn_cmd->add_option("--imbalance", kn.imbalance, "Largest fragment size difference");
    kn_cmd->add_option("--aggregation", kn.aggregation, "Entropy aggregation over time")
        ->check(CLI::IsMember({"max", "mean"}))
        ->capture_default_str();
    kn_cmd->add_option("--discard-tol", kn.discard_tol, "Warn when MPS discarded weight exceeds this")
        ->capture_default_str();
    kn_cmd->add_option("--csv", kn.csv, "CSV output file (default stdout)");

    SchedArgs sc;
    auto *sc_cmd = app.add_subcommand("sched", "Simulate monolithic and split scheduling of hybrid jobs");
    sc_cmd->add_option("workload", sc.workload, "Workload JSON file")->required()->check(CLI::ExistingFile);
    sc_cmd->add_option("--policy", sc.policy, "Policy")
        ->check(CLI::IsMember({"monolithic", "split", "both"}))
        ->capture_default_str();
    sc_cmd->add_option("--timeline", sc.timeline, "Write PREFIX-<policy>.csv Gantt timelines");

    ServeArgs sv;
    auto *sv_cmd = app.add_subcommand("serve", "Run the job server");
    sv_cmd->add_option("--listen", sv.listen, "host:port (default $HQC_SERVER or 127.0.0.1:5555)");
    sv_cmd->add_option("--workers", sv.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sv_cmd->add_option("--max-qubits", sv.max_qubits, "Largest accepted circuit")->capture_default_str();

    SubmitArgs sb;
    auto *sb_cmd = app.add_subcommand("submit", "Submit a QASM circuit to a running server and wait");
    sb_cmd->add_option("circuit", sb.circuit, "QASM file")->check(CLI::ExistingFile);
    sb_cmd->add_option("--server", sb.server, "host:port (default $HQC_SERVER or 127.0.0.1:5555)");
    sb_cmd->add_option("--observable", sb.observable, "JSON term list, or @file.json");
    sb_cmd->add_option("--shots", sb.shots, "Sample this many shots instead of an exact expectation");
    sb_cmd->add_option("--seed", sb.seed, "Sampling seed")->capture_default_str();
    sb_cmd->add_option("--timeout", sb.timeout, "Seconds to wait for the result")->capture_default_str();
    sb_cmd->add_flag("--shutdown", sb.shutdown, "Ask the server to drain and stop");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    try {
        if (*hhl_cmd) return run_hhl(hhl);
        if (*mc_cmd) return run_maxcut(mc);
        if (*kn_cmd) return run_knit(kn);
        if (*sc_cmd) return run_sched(sc);
        if (*sv_cmd) return run_serve(sv);
        if (*sb_cmd) return run_submit(sb);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kUsageError;
}
