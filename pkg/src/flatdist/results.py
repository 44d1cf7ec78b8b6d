from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NormResult:
    """Distance value with the test-function data that certifies it.

    ``maximizer`` is the vector of test-function values on the support the
    method optimizes over; ``gap`` bounds ``|value - true norm|``.
    """

    value: float
    maximizer: np.ndarray
    method: str
    gap: float = 0.0
    iterations: int = 0
    theta: np.ndarray | None = None
    theta0: float | None = None
    refinements: int | None = None
    history: tuple = field(default=(), repr=False)
