"""Seedable simulations of collective decision mechanisms.

Three mechanisms are modelled: the jury-theorem majority probability,
vote-power propagation over trust networks (dynamically distributed
democracy), and sequential decision markets with and without incentives.
The :mod:`collectivesim.experiments` harness sweeps them and writes CSV.
"""

from .errors import ParameterError, StructuralError

__version__ = "0.1.0"

__all__ = ["ParameterError", "StructuralError", "__version__"]
