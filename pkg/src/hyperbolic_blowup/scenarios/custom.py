"""
Custom scenario: any admissible pair of bumps.
"""

from hyperbolic_blowup.scenarios.base import Scenario


class CustomScenario(Scenario):
    """Both fields as configured; only the common invariants apply."""

    name = "custom"
    default_amplitudes = (0.0, 0.0)
