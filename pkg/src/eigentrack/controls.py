"""Control signals applied to the baseline energy scale J(t) = J0 + Omega(t).

Three pulse families modulate the gap: a periodic rectangular train, a
train with chaotic (logistic-map) amplitudes, and biased Poissonian
impulse noise.  Bookkeeping is exact: piecewise-constant contributions are
integrated in closed form and delta impulses only ever enter through phase
jumps, never through pointwise samples.  Impulse draws are pure functions
of (seed, realization, window), so ensembles are order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ControlSignal",
    "SteadySignal",
    "RectTrain",
    "ChaoticTrain",
    "ImpulseNoise",
    "logistic_sequence",
    "sample_j",
    "phase_integral",
    "draw_impulses",
]


def logistic_sequence(n: int, mu: float = 3.9, l0: float = 0.5) -> np.ndarray:
    """First n iterates L_1..L_n of the logistic map L' = mu (L - L^2)."""
    out = np.empty(n)
    l = l0
    for i in range(n):
        l = mu * (l - l * l)
        out[i] = l
    return out


@dataclass(frozen=True)
class ControlSignal:
    """Baseline energy scale plus an additive pulse contribution.

    Subclasses supply the pulse windows; window n >= 1 is active on the
    interval (n*chi - delta, n*chi].  The baseline alone is a valid signal.
    """

    j0: float

    # -- window geometry (overridden by pulsed subclasses) ------------------
    def _window_geometry(self):
        """(delta, chi) of the pulse train, or None for a steady signal."""
        return None

    def _window_amplitude(self, n: int) -> float:
        return 0.0

    def _windows_overlapping(self, t1: float, t2: float) -> range:
        geom = self._window_geometry()
        if geom is None or t2 <= t1:
            return range(0)
        delta, chi = geom
        n_lo = max(1, int(np.floor(t1 / chi)) + 1)
        n_hi = int(np.floor((t2 + delta) / chi))
        return range(n_lo, n_hi + 1)

    # -- public surface ------------------------------------------------------
    def sample_j(self, t: float) -> float:
        """Smooth part of J at time t; impulse contributions are excluded
        because they are distributions, not pointwise values."""
        geom = self._window_geometry()
        if geom is None:
            return self.j0
        delta, chi = geom
        n = int(np.floor(t / chi))
        for cand in (n, n + 1):
            if cand >= 1 and cand * chi - delta < t <= cand * chi:
                return self.j0 + self._window_amplitude(cand)
        return self.j0

    def phase_integral(self, t1: float, t2: float) -> float:
        """Exact integral of J over [t1, t2], impulse jumps in (t1, t2]
        included."""
        return self.weighted_phase_integral(t1, t2)

    def weighted_phase_integral(self, t1, t2, antiderivative=None, weight=None):
        """Integral of J(x) w(x) over [t1, t2] for a smooth weight w.

        ``antiderivative`` must be the closed-form primitive of w (defaults
        to the identity weight).  Impulses at t_j in (t1, t2] contribute
        amplitude * w(t_j).  Exact for the piecewise-constant pulse part.
        """
        if t2 < t1:
            raise ValueError(f"reversed interval: ({t1}, {t2})")
        if antiderivative is None:
            antiderivative = lambda t: t
            weight = lambda t: 1.0
        total = self.j0 * (antiderivative(t2) - antiderivative(t1))
        geom = self._window_geometry()
        if geom is not None:
            delta, chi = geom
            for n in self._windows_overlapping(t1, t2):
                lo = max(t1, n * chi - delta)
                hi = min(t2, n * chi)
                if hi > lo:
                    total += self._window_amplitude(n) * (
                        antiderivative(hi) - antiderivative(lo)
                    )
        times, amps = self.impulses(t1, t2)
        if len(times):
            total += np.sum(amps * np.asarray([weight(t) for t in times]))
        return total

    def phase_profile(self, times: np.ndarray) -> np.ndarray:
        """Vectorized running phase: integral of J from times[0] to each t."""
        times = np.asarray(times, dtype=float)
        out = np.empty(len(times))
        out[0] = 0.0
        for i in range(1, len(times)):
            out[i] = out[i - 1] + self.phase_integral(times[i - 1], times[i])
        return out

    def breakpoints(self, t1: float, t2: float) -> np.ndarray:
        """Times in (t1, t2) where the smooth part of J is discontinuous."""
        geom = self._window_geometry()
        if geom is None:
            return np.empty(0)
        delta, chi = geom
        edges = []
        for n in self._windows_overlapping(t1, t2):
            if self._window_amplitude(n) == 0.0:
                continue
            for e in (n * chi - delta, n * chi):
                if t1 < e < t2:
                    edges.append(e)
        return np.asarray(sorted(set(edges)))

    def impulses(self, t1: float, t2: float):
        """(times, amplitudes) of impulses with t_j in (t1, t2]."""
        return np.empty(0), np.empty(0)


@dataclass(frozen=True)
class SteadySignal(ControlSignal):
    """Constant J(t) = J0: the control-free case."""


@dataclass(frozen=True)
class RectTrain(ControlSignal):
    """Periodic rectangular pulses of area psi and duration delta per
    period chi, giving amplitude psi/delta inside each active window."""

    psi: float
    delta: float
    chi: float

    def __post_init__(self):
        if not 0 < self.delta <= self.chi:
            raise ValueError(f"need 0 < delta <= chi, got delta={self.delta}, chi={self.chi}")
        if self.psi < 0:
            raise ValueError(f"pulse area must be non-negative, got {self.psi}")

    def _window_geometry(self):
        return self.delta, self.chi

    def _window_amplitude(self, n: int) -> float:
        return self.psi / self.delta


@dataclass(frozen=True)
class ChaoticTrain(ControlSignal):
    """Pulse train whose n-th window carries amplitude psi * L_n / delta,
    with L_n the logistic-map iterates from l0."""

    psi: float
    delta: float
    chi: float
    mu: float = 3.9
    l0: float = 0.5
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.delta <= self.chi:
            raise ValueError(f"need 0 < delta <= chi, got delta={self.delta}, chi={self.chi}")
        if not 0 < self.l0 < 1:
            raise ValueError(f"logistic seed must lie in (0, 1), got {self.l0}")

    def _window_geometry(self):
        return self.delta, self.chi

    def _logistic(self, n: int) -> float:
        seq = self._cache.get("seq")
        if seq is None or len(seq) < n:
            seq = logistic_sequence(max(n, 64), self.mu, self.l0)
            self._cache["seq"] = seq
        return float(seq[n - 1])

    def _window_amplitude(self, n: int) -> float:
        return self.psi * self._logistic(n) / self.delta


@dataclass(frozen=True)
class ImpulseNoise(ControlSignal):
    """Biased Poissonian impulse noise: in each active window, K impulses
    at uniform random times with positive amplitudes of configured mean.

    K is drawn per window from the inclusive ``k_range``; amplitudes are
    exponential with mean ``mean_amplitude`` (the distribution beyond the
    mean is a configuration choice, recorded here).  Draws derive from
    (seed, realization, window) via counter-based seed sequences, so they
    are reproducible and order-independent.
    """

    delta: float
    chi: float
    mean_amplitude: float
    k_range: tuple = (6, 16)
    seed: int = 0
    realization: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.delta <= self.chi:
            raise ValueError(f"need 0 < delta <= chi, got delta={self.delta}, chi={self.chi}")
        lo, hi = self.k_range
        if not (0 < lo <= hi):
            raise ValueError(f"bad impulse count range {self.k_range}")

    def _window_geometry(self):
        return self.delta, self.chi

    def draw_impulses(self, n: int):
        """Impulse (times, amplitudes) for window n; deterministic in
        (seed, realization, n)."""
        if n < 1:
            raise ValueError(f"windows are numbered from 1, got {n}")
        cached = self._cache.get(n)
        if cached is not None:
            return cached
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.realization, n)
        )
        rng = np.random.default_rng(ss)
        lo, hi = self.k_range
        k = int(rng.integers(lo, hi + 1))
        times = np.sort(rng.uniform(n * self.chi - self.delta, n * self.chi, k))
        amps = rng.exponential(self.mean_amplitude, k)
        self._cache[n] = (times, amps)
        return times, amps

    def impulses(self, t1: float, t2: float):
        all_t, all_a = [], []
        for n in self._windows_overlapping(t1, t2):
            times, amps = self.draw_impulses(n)
            mask = (times > t1) & (times <= t2)
            if np.any(mask):
                all_t.append(times[mask])
                all_a.append(amps[mask])
        if not all_t:
            return np.empty(0), np.empty(0)
        t = np.concatenate(all_t)
        a = np.concatenate(all_a)
        order = np.argsort(t)
        return t[order], a[order]


def sample_j(signal: ControlSignal, t: float) -> float:
    return signal.sample_j(t)


def phase_integral(signal: ControlSignal, t1: float, t2: float) -> float:
    return signal.phase_integral(t1, t2)


def draw_impulses(signal: ImpulseNoise, n: int):
    return signal.draw_impulses(n)
