"""Block entropy estimators, pressure and large deviations of cylindrical potentials."""

from ._core import (
    BlockentError,
    MarkovPotential,
    asymptotic_variance,
    bernoulli_potential,
    block_schedule,
    exact_finite_scgf,
    markov_chain_potential,
    max_mean_cycle,
    min_mean_cycle,
    normalize_potential,
    plug_in_estimates,
    pressure,
    rate_I,
    rate_J,
    renyi_scgf,
    run_experiment,
    sample_path,
    scgf_PDelta,
    scgf_Phi,
    scgf_R,
)

__all__ = [
    "BlockentError",
    "MarkovPotential",
    "asymptotic_variance",
    "bernoulli_potential",
    "block_schedule",
    "exact_finite_scgf",
    "markov_chain_potential",
    "max_mean_cycle",
    "min_mean_cycle",
    "normalize_potential",
    "plug_in_estimates",
    "pressure",
    "rate_I",
    "rate_J",
    "renyi_scgf",
    "run_experiment",
    "sample_path",
    "scgf_PDelta",
    "scgf_Phi",
    "scgf_R",
]
