"""Overlapped Pauli grouping, repacking and shot-allocation tools."""

import os

# must run before numpy loads its BLAS
_threads = os.environ.get("OVERLAPGROUP_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .errors import DimensionError, NumericalError, ValidationError  # noqa: E402
from .grouping import Grouping, sorted_insertion  # noqa: E402
from .hamiltonian import AbstractHamiltonian, Hamiltonian, parse_hamiltonian  # noqa: E402
from .pauli import PauliString, parse_pauli  # noqa: E402
from .repacking import RepackedGrouping, adhoc_repack, posthoc_repack  # noqa: E402

__all__ = [
    "AbstractHamiltonian", "DimensionError", "Grouping", "Hamiltonian", "NumericalError",
    "PauliString", "RepackedGrouping", "ValidationError", "adhoc_repack", "parse_hamiltonian",
    "parse_pauli", "posthoc_repack", "sorted_insertion",
]
