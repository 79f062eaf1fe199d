"""
Module for registering and retrieving scenarios.
"""

from typing import TYPE_CHECKING

from hyperbolic_blowup.diagnostics import FrontParams
from hyperbolic_blowup.errors import ConfigValidationError
from hyperbolic_blowup.quadrature import Discretization
from hyperbolic_blowup.scenarios.base import Scenario
from hyperbolic_blowup.scenarios.boussinesq import BoussinesqScenario
from hyperbolic_blowup.scenarios.custom import CustomScenario
from hyperbolic_blowup.scenarios.euler import EulerScenario

if TYPE_CHECKING:
    from hyperbolic_blowup.config import ScenarioConfig


def get_scenarios() -> list[type[Scenario]]:
    """Return all available scenarios in priority order."""
    scenarios: list[type[Scenario]] = [
        EulerScenario,
        BoussinesqScenario,
        CustomScenario,
    ]
    return sorted(scenarios, key=lambda s: s.priority(), reverse=True)


def scenario_for(config: "ScenarioConfig") -> type[Scenario]:
    """Find the scenario class named by a config.

    Raises:
        ConfigValidationError: If no scenario handles the config.
    """
    for scenario in get_scenarios():
        if scenario.can_handle(config):
            return scenario
    names = ", ".join(s.name for s in get_scenarios())
    raise ConfigValidationError([f"unknown scenario {config.scenario!r} (expected one of {names})"])


def resolve(config: "ScenarioConfig") -> "ScenarioConfig":
    """Fill scenario defaults and validate every invariant at once.

    Raises:
        ConfigValidationError: Listing all violations.
    """
    from hyperbolic_blowup.config import common_violations

    scenario = scenario_for(config)
    resolved = scenario.resolve(config)
    violations = common_violations(resolved) + scenario.violations(resolved)
    if not violations:
        try:
            data = scenario.build_data(resolved)
            FrontParams.from_data(data, resolved.front.b)
            z_max = resolved.grid.z_max
            if z_max is not None and z_max < data.strip.z1_max:
                violations.append(f"grid.z_max={z_max!r} must cover the support edge {data.strip.z1_max!r}")
        except ValueError as e:
            violations.append(str(e))
    if violations:
        raise ConfigValidationError(violations)
    return resolved


def discretize(config: "ScenarioConfig") -> tuple[Discretization, FrontParams]:
    """Build the discretization and front thresholds of a resolved config."""
    data = scenario_for(config).build_data(config)
    disc = Discretization.build(
        data,
        z_min=config.grid.z_min,
        z_max=config.grid.z_max,
        n_z1=config.grid.n_z1,
        n_u=config.grid.n_u,
        kernel=config.kernel,
    )
    return disc, FrontParams.from_data(data, config.front.b)
