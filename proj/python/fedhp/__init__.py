"""Python bindings for the decentralized FL testbed."""

from ._fedhp import (
    METRICS_HEADER,
    BoundDomainError,
    ConfigError,
    DistanceLedger,
    NumericalError,
    Topology,
    closed_form_tau,
    consensus_distance,
    suggested_eta,
    convergence_rate,
    eigenvalues,
    gossip,
    greedy_search,
    laplacian,
    mixing_matrix,
    convergence_bound,
    run,
    spectral_summary,
    tau_threshold,
)

__all__ = [
    "METRICS_HEADER",
    "BoundDomainError",
    "ConfigError",
    "DistanceLedger",
    "NumericalError",
    "Topology",
    "closed_form_tau",
    "consensus_distance",
    "suggested_eta",
    "convergence_rate",
    "eigenvalues",
    "gossip",
    "greedy_search",
    "laplacian",
    "mixing_matrix",
    "convergence_bound",
    "run",
    "spectral_summary",
    "tau_threshold",
]
