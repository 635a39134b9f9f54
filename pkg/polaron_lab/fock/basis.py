import logging
from functools import cached_property
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from polaron_lab.core.config import get_settings
from polaron_lab.core.errors import BasisBudgetError
from polaron_lab.fock.grid import ModeGrid

logger = logging.getLogger(__name__)


def fock_basis_size(n_modes: int, n_max: int) -> int:
    return sum(comb(n_modes + n - 1, n) for n in range(n_max + 1))


class FockBasis:
    """Occupation-number states over all modes of a grid with total photon number <= n_max.

    States are ordered by total occupation, then by occupation vector ascending; ordinal 0 is
    the vacuum.
    """

    def __init__(self, grid: ModeGrid, n_max: int, occupations: np.ndarray):
        self.grid = grid
        self.n_max = n_max
        self.occupations = occupations
        self.occupations.setflags(write=False)
        self.totals = occupations.sum(axis=1)
        self.totals.setflags(write=False)
        self.index: Dict[Tuple[int, ...], int] = {tuple(state): i for i, state in enumerate(occupations.tolist())}

    def __len__(self) -> int:
        return self.occupations.shape[0]

    @property
    def n_modes(self) -> int:
        return self.grid.n_modes

    @property
    def vacuum_index(self) -> int:
        return 0

    def state(self, ordinal: int) -> Tuple[int, ...]:
        return tuple(int(n) for n in self.occupations[ordinal])

    def ordinal(self, occupation) -> int:
        return self.index[tuple(int(n) for n in occupation)]

    def protected_mask(self) -> np.ndarray:
        """States strictly below the truncation ceiling."""
        return self.totals <= self.n_max - 1

    @cached_property
    def mode_annihilators(self) -> List[sp.csr_matrix]:
        """a_i for every mode as sparse matrices, entries sqrt(n_i) at <n - e_i| a_i |n>."""
        dim = len(self)
        operators = []
        for mode in range(self.n_modes):
            sources = np.nonzero(self.occupations[:, mode] > 0)[0]
            lowered = self.occupations[sources].copy()
            lowered[:, mode] -= 1
            targets = [self.index[tuple(row)] for row in lowered.tolist()]
            values = np.sqrt(self.occupations[sources, mode].astype(float))
            operators.append(
                sp.csr_matrix((values.astype(complex), (targets, sources)), shape=(dim, dim))
            )
        return operators


def build_fock_basis(grid: ModeGrid, n_max: int, max_states: Optional[int] = None) -> FockBasis:
    if int(n_max) != n_max or n_max < 0:
        raise ValueError(f"n_max must be a non-negative integer, got {n_max}")
    n_max = int(n_max)
    budget = get_settings().basis_budget if max_states is None else max_states
    size = fock_basis_size(grid.n_modes, n_max)
    if size > budget:
        raise BasisBudgetError(
            f"Fock basis with {grid.n_modes} modes and n_max={n_max} has {size} states, budget is {budget}"
        )

    states = []
    for total in range(n_max + 1):
        block = []
        for modes in combinations_with_replacement(range(grid.n_modes), total):
            occupation = [0] * grid.n_modes
            for mode in modes:
                occupation[mode] += 1
            block.append(tuple(occupation))
        states.extend(sorted(block))
    occupations = np.array(states, dtype=np.int64).reshape(size, grid.n_modes)
    basis = FockBasis(grid, n_max, occupations)
    logger.info(f"Built Fock basis: {grid.n_modes} modes, n_max={n_max}, {size} states")
    return basis
