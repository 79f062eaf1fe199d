"""
Module defining the base class for scenarios.
"""

import dataclasses
from abc import ABC
from typing import TYPE_CHECKING, ClassVar

from hyperbolic_blowup.constants import DEFAULT_PHI_THRESHOLD, DEFAULT_Z_MIN
from hyperbolic_blowup.fields import BumpProfile, InitialData, ProductProfile

if TYPE_CHECKING:
    from hyperbolic_blowup.config import ProfileConfig, ScenarioConfig


def build_profile(profile: "ProfileConfig") -> ProductProfile:
    """Turn a resolved profile config into a product bump."""
    amplitude = 0.0 if profile.amplitude is None else profile.amplitude
    if amplitude == 0.0:
        return ProductProfile.zero()
    return ProductProfile(
        BumpProfile(profile.x1_center, profile.x1_radius, amplitude),
        BumpProfile(profile.x2_center, profile.x2_radius, 1.0),
    )


class Scenario(ABC):
    """Base class for the scenario families."""

    name: ClassVar[str]
    # (omega0, rho0) amplitudes used when the config leaves them unset
    default_amplitudes: ClassVar[tuple[float, float]]

    @classmethod
    def can_handle(cls: type["Scenario"], config: "ScenarioConfig") -> bool:
        """Determine if this scenario is selected by the config.

        Args:
            config: The config to check.

        Returns:
            True if the config names this scenario.
        """
        return config.scenario == cls.name

    @classmethod
    def default_window(cls: type["Scenario"], config: "ScenarioConfig") -> tuple[float, float]:
        """Return the ``(grid.z_min, integrator.phi_threshold)`` used when the config leaves them unset.

        Args:
            config: A config with its amplitudes resolved.
        """
        return DEFAULT_Z_MIN, DEFAULT_PHI_THRESHOLD

    @classmethod
    def resolve(cls: type["Scenario"], config: "ScenarioConfig") -> "ScenarioConfig":
        """Fill unset amplitudes, ``grid.z_min`` and ``integrator.phi_threshold`` with the scenario defaults.

        Args:
            config: A parsed config.

        Returns:
            The config with every amplitude and window setting filled in.
        """
        omega_amp, rho_amp = cls.default_amplitudes
        omega0 = config.omega0
        rho0 = config.rho0
        if omega0.amplitude is None:
            omega0 = dataclasses.replace(omega0, amplitude=omega_amp)
        if rho0.amplitude is None:
            rho0 = dataclasses.replace(rho0, amplitude=rho_amp)
        config = dataclasses.replace(config, omega0=omega0, rho0=rho0)
        z_min, phi_threshold = cls.default_window(config)
        grid, integrator = config.grid, config.integrator
        if grid.z_min is None:
            grid = dataclasses.replace(grid, z_min=z_min)
        if integrator.phi_threshold is None:
            integrator = dataclasses.replace(integrator, phi_threshold=phi_threshold)
        return dataclasses.replace(config, grid=grid, integrator=integrator)

    @classmethod
    def violations(cls: type["Scenario"], config: "ScenarioConfig") -> list[str]:
        """Return the scenario hypotheses the resolved config breaks.

        Args:
            config: A resolved config.

        Returns:
            Human-readable violations; empty when the config is admissible.
        """
        return []

    @classmethod
    def build_data(cls: type["Scenario"], config: "ScenarioConfig") -> InitialData:
        """Construct the initial data of a resolved config."""
        return InitialData.build(build_profile(config.omega0), build_profile(config.rho0))

    @classmethod
    def priority(cls: type["Scenario"]) -> int:
        """Return the priority of this scenario (higher is evaluated first).

        Returns:
            The priority as an integer.
        """
        return 0
