"""telesim: truncated-Fock-space simulator of post-selected photonic teleportation.

Two downconversion pair sources feed a four-beam bench; scenarios impose
coincidence conditions on its detectors and the package computes the exact
conditional state delivered at the receiver, its event probability, and its
overlap with the prepared input — plus leading-order (zero-coupling)
extrapolations, detector upgrades, tomography, and a classical baseline.
"""

__version__ = "0.1.0"

from .experiment import Scenario, ScenarioResult, SetupConfig, run_scenario  # noqa: F401
