"""
Euler scenario: vorticity only, no density.
"""

import math
from typing import TYPE_CHECKING

from hyperbolic_blowup.constants import DEFAULT_Z_MIN, EULER_OMEGA_CEILING
from hyperbolic_blowup.scenarios.base import Scenario

if TYPE_CHECKING:
    from hyperbolic_blowup.config import ScenarioConfig


class EulerScenario(Scenario):
    """Pure transport of a nonnegative vorticity bump normalized to sup norm 1."""

    name = "euler"
    default_amplitudes = (1.0, 0.0)

    @classmethod
    def default_window(cls: type["EulerScenario"], config: "ScenarioConfig") -> tuple[float, float]:
        """Size Zmin so the front stays inside the grid up to ``t_final``; no Phi threshold.

        ``dPhi/dt = 2 Omega`` with ``Omega`` at most ``EULER_OMEGA_CEILING * ||omega0||``,
        so F2 moves left by no more than ``2 * ceiling * amplitude * t_final``.
        """
        amplitude = config.omega0.amplitude or 0.0
        reach = 2.0 * EULER_OMEGA_CEILING * amplitude * max(config.integrator.t_final, 0.0)
        return DEFAULT_Z_MIN - reach, math.inf

    @classmethod
    def violations(cls: type["EulerScenario"], config: "ScenarioConfig") -> list[str]:
        out = []
        if config.rho0.amplitude:
            out.append(f"euler requires rho0.amplitude = 0, got {config.rho0.amplitude!r}")
        if not config.omega0.amplitude:
            out.append("euler requires a nonzero omega0")
        return out

    @classmethod
    def priority(cls: type["EulerScenario"]) -> int:
        return 20
