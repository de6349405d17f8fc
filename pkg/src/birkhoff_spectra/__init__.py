"""Thermodynamic formalism and Birkhoff spectra for countable-branch expanding maps.

The package codes an expanding interval map by a countable Markov shift,
truncates it to finitely many symbols, and computes pressures, entropies
at infinity, suspension shifts and the variational dimension formulas on
the truncations. Natural logarithms are used throughout.
"""

__version__ = "0.1.0"

from .shift import (FiniteSubshift, TransitionRule, TruncationError, block_subshift, enumerate_periodic,
                    enumerate_words, is_irreducible, is_mixing, truncate)
from .maps import (MapSystem, base_n, cylinder_geometry, derive_transitions, f_lambda, gauss,
                   indicator_potential, log_derivative_potential, piecewise_linear)
from .potentials import Potential, constant_potential
from .perron import log_perron_root, perron, power_iteration
from .measures import (MarkovMeasure, bernoulli, entropy, equilibrium_measure, integrate, lyapunov,
                       parry_measure, random_markov)
from .thermo import (PressureEstimate, ReducibleTruncationError, SInfinityResult, gurevich_pressure,
                     pressure_schedule, s_infinity, topological_entropy)
from .infinity import (DeltaInfTable, EscapeCertificate, delta_inf_counting, delta_inf_lower_bound,
                       z_n_bruteforce, z_n_count)
from .suspension import (RoofError, RoofFunction, SplitShift, build_roof, build_split_shift, lift_word,
                         project_word, push_measure, roof_integral, split_entropy_trend)
from .spectrum import (NotInZError, SpectrumQuery, SpectrumResult, alpha3, alpha3_primal, alpha4,
                       alpha4_primal, family_class, freq_spectrum, membership, transient_dimension)
from .config import ConfigError, build_map, load_config
from .estimators import BirkhoffSpectrumEstimator

__all__ = [name for name in dir() if not name.startswith("_")]
