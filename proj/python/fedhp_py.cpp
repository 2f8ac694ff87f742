#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fedhp/bound.hpp"
#include "fedhp/control.hpp"
#include "fedhp/experiment.hpp"
#include "fedhp/graphtopo.hpp"

namespace py = pybind11;
using namespace fedhp;

namespace {

std::vector<std::vector<double>> to_rows(const SymMatrix& m) {
    std::vector<std::vector<double>> rows(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto r = m.row(i);
        rows[i].assign(r.begin(), r.end());
    }
    return rows;
}

SymMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows.size()) throw std::invalid_argument("matrix must be square");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return SymMatrix::from_dense(rows.size(), flat);
}

// Link times: +inf marks pairs outside the base topology, so from_dense's
// finiteness check does not apply. Symmetry is still required.
SymMatrix beta_from_rows(const std::vector<std::vector<double>>& rows) {
    SymMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw std::invalid_argument("matrix must be square");
        for (std::size_t j = 0; j < i; ++j) {
            if (!(rows[i][j] == rows[j][i]))
                throw std::invalid_argument("link times must be symmetric");
            m.set(i, j, rows[i][j]);
        }
        m.set_diagonal(i, rows[i][i]);
    }
    return m;
}

BoundParams bound_params(double L, double sigma, double zeta, double rho, double eta, double tau, double H,
                         double N, double f1, double f_star) {
    return BoundParams{L, sigma, zeta, rho, eta, tau, H, N, f1, f_star};
}

py::dict row_dict(const RoundMetrics& m) {
    py::dict d;
    d["round"] = m.round;
    d["t_round"] = m.t_round;
    d["cum_time"] = m.cum_time;
    d["waiting_avg"] = m.waiting_avg;
    d["accuracy"] = m.accuracy;
    d["D_true"] = m.d_true;
    d["D_bound_est"] = m.d_bound_est;
    d["d_max"] = m.d_max;
    d["tau_min"] = m.tau_min;
    d["tau_med"] = m.tau_med;
    d["tau_max"] = m.tau_max;
    d["links"] = m.links;
    return d;
}

}  // namespace

PYBIND11_MODULE(_fedhp, m) {
    py::register_exception<NumericalError>(m, "NumericalError");
    py::register_exception<BoundDomainError>(m, "BoundDomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Topology>(m, "Topology")
        .def(py::init<std::size_t>())
        .def_static("full", &Topology::full)
        .def_static("ring", &Topology::ring)
        .def_static("star", &Topology::star)
        .def_static("from_edges", &Topology::from_edges, py::arg("n"), py::arg("edges"))
        .def_static("load_edge_list", &Topology::load_edge_list, py::arg("path"), py::arg("n") = 0)
        .def("add_edge", &Topology::add_edge)
        .def("remove_edge", &Topology::remove_edge)
        .def("has_edge", &Topology::has_edge)
        .def("degree", &Topology::degree)
        .def("neighbors", &Topology::neighbors)
        .def("edges", &Topology::edges)
        .def("link_count", &Topology::link_count)
        .def("is_connected", [](const Topology& t) { return is_connected(t); })
        .def("__len__", &Topology::size)
        .def("__eq__", [](const Topology& a, const Topology& b) { return a == b; });

    m.def("laplacian", [](const Topology& t) { return to_rows(laplacian(t)); });
    m.def("mixing_matrix", [](const Topology& t) { return to_rows(mixing_plan(t).W); });
    m.def("eigenvalues", [](const std::vector<std::vector<double>>& rows) { return sym_eigenvalues(from_rows(rows)); });
    m.def("spectral_summary", [](const Topology& t) {
        const auto s = spectral_summary(t);
        py::dict d;
        d["rho"] = s.rho;
        d["lambda2"] = s.lambda2_laplacian;
        d["laplacian_eigenvalues"] = s.laplacian_eigenvalues;
        d["mixing_eigenvalues"] = s.mixing_eigenvalues;
        return d;
    });
    m.def("gossip", &gossip_aggregate, py::arg("models"), py::arg("topology"));
    m.def("consensus_distance", &average_consensus_distance);

    py::class_<DistanceLedger>(m, "DistanceLedger")
        .def(py::init<std::size_t, double>(), py::arg("n"), py::arg("beta1") = 0.5)
        .def("begin_round", &DistanceLedger::begin_round)
        .def("record_observed", &DistanceLedger::record_observed)
        .def("observed", &DistanceLedger::observed)
        .def("estimate_unobserved", &DistanceLedger::estimate_unobserved)
        .def("distance", &DistanceLedger::distance)
        .def("shortest_path", &DistanceLedger::shortest_path)
        .def("set_distance", &DistanceLedger::set_distance)
        .def("worker_bound", [](const DistanceLedger& l, const Topology& t, std::size_t i) { return worker_bound(l, t, i); })
        .def("average_bound", [](const DistanceLedger& l, const Topology& t) { return average_bound(l, t); });

    m.def("closed_form_tau",
          py::overload_cast<std::size_t, double, double, std::size_t, double, double, std::size_t>(&closed_form_tau),
          py::arg("workers"), py::arg("initial_loss"), py::arg("smoothness"), py::arg("rounds"), py::arg("eta"),
          py::arg("grad_variance"), py::arg("tau_cap") = kDefaultTauCap);

    m.def(
        "greedy_search",
        [](const std::vector<double>& mu, const std::vector<std::vector<double>>& beta, const Topology& base,
           const DistanceLedger& ledger, double d_max, double smoothness, double grad_variance, double eta,
           std::size_t rounds_remaining, double initial_loss, std::size_t tau_cap) {
            ControlInputs in;
            in.mu = mu;
            in.beta = beta_from_rows(beta);
            in.ledger = ledger;
            in.d_max = d_max;
            in.smoothness = smoothness;
            in.grad_variance = grad_variance;
            in.eta = eta;
            in.rounds_remaining = rounds_remaining;
            in.base_topology = base;
            in.initial_loss = initial_loss;
            in.tau_cap = tau_cap;
            const auto plan = greedy_search(in);
            py::dict d;
            d["topology"] = plan.topology;
            d["tau"] = plan.tau;
            d["pacing_worker"] = plan.pacing_worker;
            d["predicted_round_time"] = plan.predicted_round_time;
            d["predicted_total_time"] = plan.predicted_total_time;
            d["predicted_times"] = plan.predicted_times;
            return d;
        },
        py::arg("mu"), py::arg("beta"), py::arg("base"), py::arg("ledger"), py::arg("d_max"), py::arg("smoothness"),
        py::arg("grad_variance"), py::arg("eta"), py::arg("rounds_remaining"), py::arg("initial_loss"),
        py::arg("tau_cap") = kDefaultTauCap);

#define FEDHP_BOUND_ARGS                                                                                   \
    py::arg("L"), py::arg("sigma"), py::arg("zeta"), py::arg("rho"), py::arg("eta") = 0.01, py::arg("tau") = 1.0, \
        py::arg("H") = 1.0, py::arg("N") = 1.0, py::arg("f1") = 1.0, py::arg("f_star") = 0.0
    m.def("convergence_bound", [](double L, double s, double z, double r, double e, double t, double H, double N,
                              double f1, double fs) { return convergence_bound(bound_params(L, s, z, r, e, t, H, N, f1, fs)); },
          FEDHP_BOUND_ARGS);
    m.def("suggested_eta", [](double L, double s, double z, double r, double e, double t, double H, double N,
                               double f1, double fs) { return suggested_eta(bound_params(L, s, z, r, e, t, H, N, f1, fs)); },
          FEDHP_BOUND_ARGS);
    m.def("convergence_rate", [](double L, double s, double z, double r, double e, double t, double H, double N,
                                double f1, double fs) { return convergence_rate(bound_params(L, s, z, r, e, t, H, N, f1, fs)); },
          FEDHP_BOUND_ARGS);
    m.def("tau_threshold", [](double L, double s, double z, double r, double e, double t, double H, double N,
                              double f1, double fs) { return tau_threshold(bound_params(L, s, z, r, e, t, H, N, f1, fs)); },
          FEDHP_BOUND_ARGS);
#undef FEDHP_BOUND_ARGS

    // Runs a config given as "key = value" text; returns the metric rows and
    // the CSV exactly as the command-line tool writes it.
    m.def(
        "run",
        [](const std::string& config_text, const std::string& base_dir) {
            std::istringstream in(config_text);
            const auto cfg = parse_config(in, base_dir);
            std::ostringstream csv;
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg, csv);
            }
            py::list rows;
            for (const auto& r : res.rows) rows.append(row_dict(r));
            py::dict d;
            d["rows"] = rows;
            d["csv"] = csv.str();
            d["reached_target"] = res.reached_target;
            return d;
        },
        py::arg("config_text"), py::arg("base_dir") = ".");
    m.attr("METRICS_HEADER") = kMetricsHeader;
}
