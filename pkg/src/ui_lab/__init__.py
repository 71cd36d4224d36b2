"""Unambiguous identification of coherent states with linear optics.

Submodules:

* :mod:`ui_lab.optics` - amplitude registers, beam splitters, networks
* :mod:`ui_lab.detection` - photodetection and the Monte Carlo shot engine
* :mod:`ui_lab.protocols` - two-reference, multi-reference and weak setups
* :mod:`ui_lab.recovery` - reusing references across rounds
* :mod:`ui_lab.noise` - Gaussian preparation noise and phase keying
* :mod:`ui_lab.optimality` - two-detector bound and the optimal coupling
* :mod:`ui_lab.experiments` / :mod:`ui_lab.cli` - table-producing runs
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DomainError, IndexOutOfRange, InvalidCopyCount,
                     InvalidShotCount, InvalidTotal, InvalidTransmittivity, UILabError)
from .optics import (BeamSplitterSpec, ModeRegister, Network, apply_beamsplitter, apply_network,
                     build_concentrator, check_unitarity, compose_network, evolve)
from .detection import DetectorBank, RngStream, p_click, run_shots, sample_counts
from .protocols import (Hypothesis, UIConfig, UIOutcome, UISetup, analytic_multi_ref_P,
                        analytic_two_ref, build_multi_ref_setup, build_two_ref_setup,
                        classify_two_ref, mc_success, optimal_t1, resource_tradeoff,
                        weak_ui_batch, weak_ui_run)
from .recovery import (compare_strategies, cumulative_success, lambda_step,
                       lambda_step_achievable, same_unknown_second_round,
                       splitting_strategy_P)
from .noise import (RatesReport, averaged_rates_closed, gaussian_integral_Im, mc_rates,
                    reliability_closed)
from .optimality import (DEGENERATE, lambda2_sq_max, multi_detector_reduction_check,
                         optimize_lambda1, two_detector_P)
from .experiments import ExperimentConfig, ResultTable, run_experiment
