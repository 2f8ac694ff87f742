#include "fedhp/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fedhp {

namespace {

constexpr std::uint64_t kPartitionTag = 0x9a27;
constexpr std::uint64_t kComputeProfileTag = 0xc9f;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out{};
    in >> out;
    char extra;
    if (!in || (in >> extra)) throw ConfigError(key, "cannot parse '" + value + "' as a number");
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& value, std::size_t min = 0) {
    if (!value.empty() && value.front() == '-') throw ConfigError(key, "must be non-negative");
    const auto v = parse_number<unsigned long long>(key, value);
    if (v < min) throw ConfigError(key, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

double parse_real(const std::string& key, const std::string& value) {
    const double v = parse_number<double>(key, value);
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(key, "expected true|false");
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
    ExperimentConfig cfg;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"algorithm", [&](auto& k, auto& v) {
             try {
                 cfg.sim.algorithm.kind = parse_algorithm(v);
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(k, e.what());
             }
         }},
        {"workers", [&](auto& k, auto& v) { cfg.workers = parse_count(k, v, 1); }},
        {"rounds", [&](auto& k, auto& v) { cfg.sim.rounds = parse_count(k, v); }},
        {"classes", [&](auto& k, auto& v) { cfg.data.classes = parse_count(k, v, 2); }},
        {"features", [&](auto& k, auto& v) { cfg.data.features = parse_count(k, v, 1); }},
        {"samples_per_class", [&](auto& k, auto& v) { cfg.data.samples_per_class = parse_count(k, v, 2); }},
        {"spread", [&](auto& k, auto& v) { cfg.data.cluster_spread = parse_real(k, v); }},
        {"separation", [&](auto& k, auto& v) { cfg.data.separation = parse_real(k, v); }},
        {"partition_p", [&](auto& k, auto& v) { cfg.partition_p = parse_real(k, v); }},
        {"heterogeneity", [&](auto& k, auto& v) {
             try {
                 cfg.heterogeneity = parse_heterogeneity(v);
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(k, e.what());
             }
         }},
        {"compute_base", [&](auto& k, auto& v) { cfg.compute_base = parse_real(k, v); }},
        {"bandwidth_min_mbps", [&](auto& k, auto& v) { cfg.bandwidth_min_mbps = parse_real(k, v); }},
        {"bandwidth_max_mbps", [&](auto& k, auto& v) { cfg.bandwidth_max_mbps = parse_real(k, v); }},
        {"topology", [&](auto&, auto& v) {
             if (v == "full" || v == "ring") {
                 cfg.topology = v;
             } else {
                 const std::filesystem::path p(v);
                 cfg.topology = p.is_absolute() ? v : (std::filesystem::path(base_dir) / p).string();
             }
         }},
        {"model", [&](auto& k, auto& v) {
             if (v == "softmax") cfg.sim.model = ModelKind::SoftmaxRegression;
             else if (v == "mlp") cfg.sim.model = ModelKind::Mlp;
             else throw ConfigError(k, "expected softmax|mlp");
         }},
        {"hidden", [&](auto& k, auto& v) { cfg.sim.hidden = parse_count(k, v, 1); }},
        {"eta", [&](auto& k, auto& v) { cfg.sim.eta = parse_real(k, v); }},
        {"lr_decay", [&](auto& k, auto& v) { cfg.sim.lr_decay = parse_real(k, v); }},
        {"batch_size", [&](auto& k, auto& v) { cfg.sim.batch_size = parse_count(k, v, 1); }},
        {"variance_probes", [&](auto& k, auto& v) { cfg.sim.variance_probes = parse_count(k, v, 1); }},
        {"beta1", [&](auto& k, auto& v) { cfg.sim.beta1 = parse_real(k, v); }},
        {"beta2", [&](auto& k, auto& v) { cfg.sim.beta2 = parse_real(k, v); }},
        {"tau_cap", [&](auto& k, auto& v) { cfg.sim.tau_cap = parse_count(k, v, 1); }},
        {"fixed_tau", [&](auto& k, auto& v) { cfg.sim.algorithm.fixed_tau = parse_count(k, v); }},
        {"ldsgd_i1", [&](auto& k, auto& v) { cfg.sim.algorithm.local_rounds = parse_count(k, v, 1); }},
        {"ldsgd_i2", [&](auto& k, auto& v) { cfg.sim.algorithm.gossip_rounds = parse_count(k, v); }},
        {"ldsgd_topology", [&](auto& k, auto& v) {
             if (v == "ring") cfg.sim.algorithm.ldsgd_on_base = false;
             else if (v == "base") cfg.sim.algorithm.ldsgd_on_base = true;
             else throw ConfigError(k, "expected ring|base");
         }},
        {"eval_every", [&](auto& k, auto& v) { cfg.sim.eval_every = parse_count(k, v, 1); }},
        {"seed", [&](auto& k, auto& v) {
             cfg.sim.seed = parse_number<std::uint64_t>(k, v);
             cfg.data.seed = cfg.sim.seed;
         }},
        {"target_accuracy", [&](auto& k, auto& v) {
             if (v == "none") cfg.target_accuracy.reset();
             else cfg.target_accuracy = parse_real(k, v);
         }},
        {"output", [&](auto&, auto& v) { cfg.output = v; }},
        {"shards_csv", [&](auto&, auto& v) { cfg.shards_csv = v; }},
        {"ledger_csv", [&](auto&, auto& v) { cfg.ledger_csv = v; }},
        {"verbose", [&](auto& k, auto& v) { cfg.verbose = parse_bool(k, v); }},
        {"crosscheck_mixing", [&](auto& k, auto& v) { cfg.sim.crosscheck_mixing = parse_bool(k, v); }},
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line, "line " + std::to_string(line_no) + " is not of the form key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(key, "unknown key");
        if (value.empty()) throw ConfigError(key, "missing value");
        it->second(key, value);
    }

    require(cfg.partition_p >= 0.0 && cfg.partition_p <= 1.0, "partition_p", "must lie in [0, 1]");
    require(cfg.data.cluster_spread >= 0.0, "spread", "must be >= 0");
    require(cfg.data.separation > 0.0, "separation", "must be > 0");
    require(cfg.compute_base > 0.0, "compute_base", "must be > 0");
    require(cfg.bandwidth_min_mbps > 0.0, "bandwidth_min_mbps", "must be > 0");
    require(cfg.bandwidth_max_mbps >= cfg.bandwidth_min_mbps, "bandwidth_max_mbps", "must be >= bandwidth_min_mbps");
    require(cfg.sim.eta > 0.0, "eta", "must be > 0");
    require(cfg.sim.lr_decay > 0.0 && cfg.sim.lr_decay <= 1.0, "lr_decay", "must lie in (0, 1]");
    require(cfg.sim.beta1 >= 0.0 && cfg.sim.beta1 <= 1.0, "beta1", "must lie in [0, 1]");
    require(cfg.sim.beta2 >= 0.0 && cfg.sim.beta2 <= 1.0, "beta2", "must lie in [0, 1]");
    if (cfg.target_accuracy) {
        require(*cfg.target_accuracy >= 0.0 && *cfg.target_accuracy <= 1.0, "target_accuracy", "must lie in [0, 1]");
    }
    if (cfg.topology != "full" && cfg.topology != "ring") {
        require(std::filesystem::exists(cfg.topology), "topology", "edge-list file '" + cfg.topology + "' not found");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    return parse_config(in, std::filesystem::path(path).parent_path().string());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
    const auto& s = cfg.sim;
    return {
        {"algorithm", to_string(s.algorithm.kind)},
        {"workers", std::to_string(cfg.workers)},
        {"rounds", std::to_string(s.rounds)},
        {"classes", std::to_string(cfg.data.classes)},
        {"features", std::to_string(cfg.data.features)},
        {"samples_per_class", std::to_string(cfg.data.samples_per_class)},
        {"spread", format_number(cfg.data.cluster_spread)},
        {"separation", format_number(cfg.data.separation)},
        {"partition_p", format_number(cfg.partition_p)},
        {"heterogeneity", to_string(cfg.heterogeneity)},
        {"compute_base", format_number(cfg.compute_base)},
        {"bandwidth_min_mbps", format_number(cfg.bandwidth_min_mbps)},
        {"bandwidth_max_mbps", format_number(cfg.bandwidth_max_mbps)},
        {"topology", cfg.topology},
        {"model", s.model == ModelKind::Mlp ? "mlp" : "softmax"},
        {"hidden", std::to_string(s.hidden)},
        {"eta", format_number(s.eta)},
        {"lr_decay", format_number(s.lr_decay)},
        {"batch_size", std::to_string(s.batch_size)},
        {"variance_probes", std::to_string(s.variance_probes)},
        {"beta1", format_number(s.beta1)},
        {"beta2", format_number(s.beta2)},
        {"tau_cap", std::to_string(s.tau_cap)},
        {"fixed_tau", std::to_string(s.algorithm.fixed_tau)},
        {"ldsgd_i1", std::to_string(s.algorithm.local_rounds)},
        {"ldsgd_i2", std::to_string(s.algorithm.gossip_rounds)},
        {"ldsgd_topology", s.algorithm.ldsgd_on_base ? "base" : "ring"},
        {"eval_every", std::to_string(s.eval_every)},
        {"seed", std::to_string(s.seed)},
        {"target_accuracy", cfg.target_accuracy ? format_number(*cfg.target_accuracy) : "none"},
        {"crosscheck_mixing", s.crosscheck_mixing ? "true" : "false"},
    };
}

Topology build_base_topology(const ExperimentConfig& cfg) {
    if (cfg.topology == "full") return Topology::full(cfg.workers);
    if (cfg.topology == "ring") return Topology::ring(cfg.workers);
    Topology t = Topology::load_edge_list(cfg.topology, cfg.workers);
    if (t.size() != cfg.workers) throw ConfigError("topology", "edge list does not match the worker count");
    if (!is_connected(t)) throw ConfigError("topology", "edge list describes a disconnected graph");
    return t;
}

Simulation build_simulation(const ExperimentConfig& cfg) {
    SyntheticSpec spec = cfg.data;
    spec.seed = cfg.sim.seed;
    SplitData data = generate(spec);

    Rng part_rng(cfg.sim.seed, kPartitionTag);
    auto shards = partition(data.train, PartitionSpec{cfg.partition_p, cfg.workers, 3}, part_rng);
    if (!cfg.shards_csv.empty()) {
        std::ofstream out(cfg.shards_csv);
        if (!out) throw ConfigError("shards_csv", "cannot write '" + cfg.shards_csv + "'");
        write_shards_csv(out, shards);
    }

    Rng profile_rng(cfg.sim.seed, kComputeProfileTag);
    auto profile = ComputeProfile::preset(cfg.heterogeneity, cfg.workers, cfg.compute_base, profile_rng);
    const ModelDims dims{cfg.data.features, cfg.sim.hidden, cfg.data.classes};
    LinkModel links = LinkModel::for_parameters(Model::param_count(cfg.sim.model, dims));
    links.min_mbps = cfg.bandwidth_min_mbps;
    links.max_mbps = cfg.bandwidth_max_mbps;

    return Simulation(cfg.sim, std::move(shards), std::move(data.test), build_base_topology(cfg),
                      SimNet(std::move(profile), links, cfg.sim.seed));
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string format_row(const RoundMetrics& m) {
    std::string row = std::to_string(m.round);
    for (double v : {m.t_round, m.cum_time, m.waiting_avg, m.accuracy, m.d_true, m.d_bound_est, m.d_max,
                     m.tau_min, m.tau_med, m.tau_max}) {
        row += ',';
        row += format_number(v);
    }
    row += ',' + std::to_string(m.links);
    return row;
}

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& csv) {
    Simulation sim = build_simulation(cfg);
    return run_experiment(sim, cfg, csv);
}

RunResult run_experiment(Simulation& sim, const ExperimentConfig& cfg, std::ostream& csv) {
    csv << "# schema: " << kMetricsSchema << '\n';
    for (const auto& [k, v] : config_entries(cfg)) csv << "# config: " << k << '=' << v << '\n';
    csv << "# initial_tau: " << sim.initial_tau() << '\n';
    csv << kMetricsHeader << '\n';

    RunResult result;
    std::size_t traced = 0;
    while (!sim.finished()) {
        const RoundMetrics m = sim.step();
        csv << format_row(m) << '\n';
        result.rows.push_back(m);
        if (cfg.verbose) {
            const auto& plans = sim.diagnostics().plans;
            for (; traced < plans.size(); ++traced) {
                const auto& p = plans[traced];
                csv << "# plan: round=" << p.round << " links=" << p.links << " pacing=" << p.pacing_worker
                    << " tau=" << p.tau_pacing << " T=" << format_number(p.predicted_total_time) << '\n';
            }
        }
        if (cfg.target_accuracy && !std::isnan(m.accuracy) && m.accuracy >= *cfg.target_accuracy) {
            result.reached_target = true;
            break;
        }
    }
    if (!cfg.ledger_csv.empty() && cfg.sim.algorithm.kind == Algorithm::FedHP) {
        std::ofstream out(cfg.ledger_csv);
        if (!out) throw ConfigError("ledger_csv", "cannot write '" + cfg.ledger_csv + "'");
        sim.coordinator().ledger.write_csv(out);
    }
    return result;
}

MetricsFile read_metrics(std::istream& in) {
    MetricsFile mf;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view tag = "# config: ";
            if (line.rfind(tag, 0) == 0) {
                const auto body = line.substr(tag.size());
                const auto eq = body.find('=');
                if (eq != std::string::npos) mf.config[body.substr(0, eq)] = body.substr(eq + 1);
            }
            continue;
        }
        if (!header) {
            if (line != kMetricsHeader) throw std::invalid_argument("metrics file: unexpected header '" + line + "'");
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 12) throw std::invalid_argument("metrics file: row with " + std::to_string(cells.size()) + " columns");
        auto num = [](const std::string& s) { return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); };
        RoundMetrics m;
        m.round = std::stoul(cells[0]);
        m.t_round = num(cells[1]);
        m.cum_time = num(cells[2]);
        m.waiting_avg = num(cells[3]);
        m.accuracy = num(cells[4]);
        m.d_true = num(cells[5]);
        m.d_bound_est = num(cells[6]);
        m.d_max = num(cells[7]);
        m.tau_min = num(cells[8]);
        m.tau_med = num(cells[9]);
        m.tau_max = num(cells[10]);
        m.links = std::stoul(cells[11]);
        mf.rows.push_back(m);
    }
    if (!header) throw std::invalid_argument("metrics file: missing header row");
    return mf;
}

MetricsFile load_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open metrics file '" + path + "'");
    return read_metrics(in);
}

Comparison compare(const std::vector<std::pair<std::string, MetricsFile>>& runs, std::optional<double> target) {
    if (runs.size() < 2) throw std::invalid_argument("compare: need at least two runs");
    static const char* dataset_keys[] = {"workers",    "classes",     "features", "samples_per_class",
                                         "spread",     "separation",  "partition_p", "seed"};
    const auto& ref = runs.front().second.config;
    for (const auto& [label, run] : runs) {
        for (const char* key : dataset_keys) {
            const auto a = ref.find(key);
            const auto b = run.config.find(key);
            const std::string va = a == ref.end() ? "<missing>" : a->second;
            const std::string vb = b == run.config.end() ? "<missing>" : b->second;
            if (va != vb) {
                throw std::invalid_argument("compare: " + label + " differs from " + runs.front().first + " on '" +
                                            key + "' (" + vb + " vs " + va + ")");
            }
        }
    }
    if (!target) {
        const auto it = ref.find("target_accuracy");
        if (it != ref.end() && it->second != "none") target = std::stod(it->second);
    }

    Comparison out;
    out.target = target;
    for (const auto& [label, run] : runs) {
        RunSummary s;
        s.label = label;
        const auto alg = run.config.find("algorithm");
        s.algorithm = alg == run.config.end() ? "?" : alg->second;
        double wait = 0.0;
        s.final_accuracy = std::numeric_limits<double>::quiet_NaN();
        for (const auto& m : run.rows) {
            wait += m.waiting_avg;
            if (std::isnan(m.accuracy)) continue;
            s.final_accuracy = m.accuracy;
            if (target && !s.time_to_target && m.accuracy >= *target) s.time_to_target = m.cum_time;
        }
        s.mean_waiting = run.rows.empty() ? 0.0 : wait / static_cast<double>(run.rows.size());
        out.runs.push_back(s);
    }
    return out;
}

void print_summary(std::ostream& out, const Comparison& comparison) {
    const auto& target = comparison.target;
    out << "target_accuracy: " << (target ? format_number(*target) : std::string("none")) << '\n';
    out << std::left << std::setw(28) << "run" << std::setw(10) << "algorithm" << std::setw(18) << "time_to_target"
        << std::setw(16) << "final_accuracy" << "mean_waiting\n";
    for (const auto& s : comparison.runs) {
        out << std::left << std::setw(28) << s.label << std::setw(10) << s.algorithm << std::setw(18)
            << (s.time_to_target ? format_number(*s.time_to_target) : std::string("not reached")) << std::setw(16)
            << format_number(s.final_accuracy) << format_number(s.mean_waiting) << '\n';
    }
}

}  // namespace fedhp
