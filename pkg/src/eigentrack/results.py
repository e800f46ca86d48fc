"""Shared result containers for propagated trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TrajectoryResult"]


@dataclass
class TrajectoryResult:
    """Time series of a tracked projected amplitude or population.

    ``values`` holds the complex amplitude (r0 in Liouville space, c0 for
    closed systems).  ``fidelity`` is sqrt(|r0(T)|) for density-operator
    pictures and |c0(T)| for amplitudes; the producing solver sets it.
    Amplitude-bound violations and solver warnings are recorded in
    ``diagnostics`` rather than raised: they signal truncation error of a
    perturbative propagation, not a programming fault.
    """

    times: np.ndarray
    values: np.ndarray
    kind: str  # "r0" | "c0" | "population"
    fidelity: float
    diagnostics: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def final_value(self) -> complex:
        return self.values[-1]

    def min_magnitude(self) -> float:
        return float(np.min(np.abs(self.values)))

    def flag_amplitude_bound(self, slack: float) -> None:
        worst = float(np.max(np.abs(self.values)) - 1.0)
        if worst > slack:
            self.diagnostics.append(
                f"amplitude exceeded unit bound by {worst:.3e} (truncation artifact)"
            )
