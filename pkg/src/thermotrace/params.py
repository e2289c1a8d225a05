"""Material parameters and boundary-condition tags.

The operator under study couples an isotropic elastic block (Lame
coefficients ``lam``, ``mu``) with a scalar heat-conduction channel
(coefficient ``alpha``).  The remaining fields (``beta``, ``gamma``,
``rho``, ``omega``, ``theta0``) control the elastic-thermal coupling and
frequency terms; the leading trace coefficients do not depend on them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ParameterError


class BCKind(enum.Enum):
    """Boundary condition for the eigenvalue problems."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @property
    def sign(self) -> int:
        """Sign of the boundary coefficient: -1 Dirichlet, +1 Neumann."""
        return -1 if self is BCKind.DIRICHLET else +1


@dataclass(frozen=True)
class MaterialParams:
    """Physical constants of the coupled elastic-thermal operator.

    Admissibility requires ``mu > 0``, ``lam + mu >= 0`` and ``alpha > 0``;
    violations raise :class:`ParameterError` at construction.
    """

    lam: float
    mu: float
    alpha: float
    beta: float = 0.0
    gamma: float = 0.0
    rho: float = 0.0
    omega: float = 0.0
    theta0: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not self.lam + self.mu >= 0:
            raise ParameterError(
                f"lam + mu must be nonnegative, got {self.lam + self.mu}"
            )
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")

    @property
    def pressure_rate(self) -> float:
        """Rate of the pressure (longitudinal) channel, ``lam + 2 mu``."""
        return self.lam + 2.0 * self.mu

    def channel_rates(self, n: int) -> list[tuple[float, int]]:
        """The three diffusion channels as ``(rate, weight)`` pairs.

        Shear carries weight ``n - 1``, pressure and heat weight 1.  The
        shear entry is dropped for ``n = 1`` where its weight vanishes.
        """
        channels = [(self.mu, n - 1), (self.pressure_rate, 1), (self.alpha, 1)]
        return [(c, w) for c, w in channels if w > 0]

    def channel_sum(self, n: int, power: float) -> float:
        """``sum of weight / rate**(power/2)`` over the three channels."""
        return sum(w / c ** (power / 2.0) for c, w in self.channel_rates(n))

    @property
    def decoupled(self) -> bool:
        """True when displacement and temperature do not exchange energy."""
        return self.beta == 0.0 or self.omega == 0.0
