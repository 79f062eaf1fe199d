"""
Boussinesq scenario: density forcing with no initial vorticity.
"""

from typing import TYPE_CHECKING

from hyperbolic_blowup.scenarios.base import Scenario

if TYPE_CHECKING:
    from hyperbolic_blowup.config import ScenarioConfig


class BoussinesqScenario(Scenario):
    """Density that does not vanish on the boundary ``x2 = 0``, zero initial vorticity."""

    name = "boussinesq"
    default_amplitudes = (0.0, 1.0)

    @classmethod
    def violations(cls: type["BoussinesqScenario"], config: "ScenarioConfig") -> list[str]:
        out = []
        if config.omega0.amplitude:
            out.append(f"boussinesq requires omega0.amplitude = 0, got {config.omega0.amplitude!r}")
        rho0 = config.rho0
        if not rho0.amplitude:
            out.append("boussinesq requires a nonzero rho0")
        if abs(rho0.x2_center) >= rho0.x2_radius:
            out.append("boussinesq requires rho0 to be positive on x2 = 0 (|rho0.x2_center| < rho0.x2_radius)")
        return out

    @classmethod
    def priority(cls: type["BoussinesqScenario"]) -> int:
        return 10
