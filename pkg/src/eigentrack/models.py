"""Concrete qubit model families with analytic eigen-systems.

Three families are provided:

* :class:`OpenQubitModel` -- a qubit whose gap axis rotates from z to x at
  constant angular speed pi/(2T) while the gap magnitude 2 J(t) follows the
  control signal.  This is the open-system workhorse; its adiabatic-frame
  superoperators have closed forms used as golden references in the tests.
* :class:`RotatingFieldQubit` -- transverse field rotating at fixed rate
  about a static z field; closed system.  Admits an exact rotating-frame
  solution, used as the oracle for control protocols.
* :class:`TwoQubitEffectiveModel` -- an exchange-coupled qubit pair whose
  symmetric-noise parameter acts on a decoherence-free subspace; the
  dynamics reduces to an effective single qubit.

All models keep the convention that controls rescale the gap but never
touch the instantaneous eigenvectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import acos, atan2, asinh, ceil, cos, pi, sin, sqrt

import numpy as np

from . import superop
from .controls import ControlSignal, SteadySignal
from .frame import SpectralFrame, build_spectral_frame
from .numerics import DEFAULT_POLICY, TimeGrid
from .results import TrajectoryResult

__all__ = [
    "OpenQubitModel",
    "RotatingFieldQubit",
    "TwoQubitEffectiveModel",
    "open_qubit_frame",
    "rotating_h11",
    "twoqubit_h11",
    "exact_closed_amplitude",
    "adiabatic_condition",
    "AdiabaticEstimate",
]

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
# Basis convention for the open-qubit family: state 0 has z eigenvalue -1.
SZ_OPEN = -SZ


def _su2_step(cx: float, vx: complex, vy: complex, vz: complex, tau: float) -> np.ndarray:
    """exp(-i (c I + vx sx + vy sy + vz sz) tau) for real coefficients."""
    r = sqrt(abs(vx) ** 2 + abs(vy) ** 2 + abs(vz) ** 2)
    if r * tau < 1e-300:
        u = np.eye(2, dtype=complex)
    else:
        c, s = cos(r * tau), sin(r * tau)
        nx, ny, nz = vx / r, vy / r, vz / r
        u = np.array(
            [
                [c - 1j * s * nz, -1j * s * nx - s * ny],
                [-1j * s * nx + s * ny, c + 1j * s * nz],
            ],
            dtype=complex,
        )
    if cx:
        u = u * np.exp(-1j * cx * tau)
    return u


def _pauli_coefficients(h: np.ndarray):
    c = 0.5 * (h[0, 0] + h[1, 1]).real
    x = 0.5 * (h[0, 1] + h[1, 0]).real
    y = 0.5 * (1j * (h[0, 1] - h[1, 0])).real
    z = 0.5 * (h[0, 0] - h[1, 1]).real
    return c, x, y, z


@dataclass(frozen=True)
class OpenQubitModel:
    """Qubit with gap axis sweeping z -> x over total time T.

    H(t) = J(t) [cos(pi t / 2T) sz + sin(pi t / 2T) sx] in the basis where
    sz |0> = -|0>.  Eigenvalues are -J (ground) and +J (excited); the
    tracked state is the excited one, prepared as |1> at t = 0.  The
    mixing angle of the eigenvectors is pi t / (4T), independent of J.
    """

    control: ControlSignal
    total_time: float

    target_level = 1  # excited state

    def mixing_angle(self, t: float) -> float:
        return pi * t / (4.0 * self.total_time)

    @property
    def mixing_rate(self) -> float:
        return pi / (4.0 * self.total_time)

    def hamiltonian(self, t: float) -> np.ndarray:
        th = 2.0 * self.mixing_angle(t)
        return self.control.sample_j(t) * (cos(th) * SZ_OPEN + sin(th) * SX)

    def direction(self, t: float) -> np.ndarray:
        """Unit Pauli axis of H(t); impulse kicks act along it."""
        th = 2.0 * self.mixing_angle(t)
        return cos(th) * SZ_OPEN + sin(th) * SX

    def eigenvector_columns(self, t: float, gauge: str = "transport") -> np.ndarray:
        """Columns (ground, excited); 'golden' flips the ground vector sign
        so the frame matches the closed-form reference superoperators."""
        v = self.mixing_angle(t)
        ground = np.array([cos(v), -sin(v)], dtype=complex)
        excited = np.array([sin(v), cos(v)], dtype=complex)
        if gauge == "golden":
            ground = -ground
        elif gauge != "transport":
            raise ValueError(f"unknown gauge {gauge!r}")
        return np.column_stack([ground, excited])

    def eigenvector_derivatives(self, t: float, gauge: str = "transport") -> np.ndarray:
        v = self.mixing_angle(t)
        rate = self.mixing_rate
        dground = rate * np.array([-sin(v), -cos(v)], dtype=complex)
        dexcited = rate * np.array([cos(v), -sin(v)], dtype=complex)
        if gauge == "golden":
            dground = -dground
        return np.column_stack([dground, dexcited])

    def energies(self, t: float) -> np.ndarray:
        j = self.control.sample_j(t)
        return np.array([-j, j])

    def analytic_frame(self, t: float, gauge: str = "transport"):
        return (
            self.energies(t),
            self.eigenvector_columns(t, gauge),
            self.eigenvector_derivatives(t, gauge),
        )

    def excited_projector(self, t: float) -> np.ndarray:
        v = self.eigenvector_columns(t)[:, 1]
        return np.outer(v, v.conj())

    def lowering_operator(self, t: float) -> np.ndarray:
        """|ground><excited| built from projectors, hence gauge-free in
        every quadratic combination."""
        cols = self.eigenvector_columns(t)
        return np.outer(cols[:, 0], cols[:, 1].conj())

    def dissipator_superop(self, kappa, lamb_shift):
        """Lab-basis decoherence superoperator t -> D(t) from sampled decay
        rate kappa(t) and frequency shift S(t) (both callables)."""

        def dis(t: float) -> np.ndarray:
            sz_t = 2.0 * self.excited_projector(t) - np.eye(2)
            lower = self.lowering_operator(t)
            out = -1j * lamb_shift(t) * superop.hamiltonian_superop(sz_t)
            out = out + superop.lindblad_dissipator(lower, kappa(t))
            return out

        return dis

    def liouvillian(self, kappa, lamb_shift):
        """Full lab-basis generator t -> -i[H, .] + D(t) (smooth part of J
        only; impulse kicks must be applied separately as unitaries)."""
        dis = self.dissipator_superop(kappa, lamb_shift)

        def liou(t: float) -> np.ndarray:
            return -1j * superop.hamiltonian_superop(self.hamiltonian(t)) + dis(t)

        return liou

    # -- closed-system limit -------------------------------------------------
    def target_vector(self, t: float) -> np.ndarray:
        return self.eigenvector_columns(t)[:, 1]

    def closed_kernel_u(self, times: np.ndarray) -> np.ndarray:
        """Separable factor u with h(t,t')|_11 = u(t) conj(u(t')) in the
        closed (dissipation-free) limit."""
        phases = self.control.phase_profile(times)
        return self.mixing_rate * np.exp(2j * phases)

    def closed_selfcoupling(self, times: np.ndarray) -> np.ndarray:
        return np.zeros(len(times), dtype=complex)

    def target_dynamical_phase(self, times: np.ndarray) -> np.ndarray:
        return self.control.phase_profile(times)

    def exact_amplitude(self, grid: TimeGrid) -> TrajectoryResult:
        """Exact tracked amplitude (closed limit) via the frame co-rotating
        with the gap axis, where the generator J(t) sz + (pi/4T) sy is
        piecewise constant; every segment is a closed-form SU(2) step."""
        rate = self.mixing_rate
        pts = grid.points
        t_end = pts[-1]
        control = self.control
        events = list(control.breakpoints(pts[0], t_end))
        imp_t, imp_a = control.impulses(pts[0], t_end)
        kick_amp = dict(zip(imp_t.tolist(), imp_a.tolist()))
        times = np.unique(np.concatenate([pts, np.asarray(events), imp_t]))

        psi = np.array([0.0, 1.0], dtype=complex)  # target at t = 0
        raw = np.empty(len(pts), dtype=complex)
        raw[0] = 1.0 + 0.0j
        next_grid = 1
        for a, b in zip(times[:-1], times[1:]):
            j = control.sample_j(0.5 * (a + b))
            # frame generator: J sz_open + (pi/4T) sy  ->  (x, y, z) = (0, rate, -J)
            psi = _su2_step(0.0, 0.0, rate, -j, b - a) @ psi
            amp = kick_amp.get(float(b))
            if amp is not None:
                psi = _su2_step(0.0, 0.0, 0.0, -amp, 1.0) @ psi
            while next_grid < len(pts) and abs(b - pts[next_grid]) < 1e-12 * max(1.0, t_end):
                raw[next_grid] = psi[1]
                next_grid += 1

        values = np.exp(1j * self.target_dynamical_phase(pts)) * raw
        return TrajectoryResult(
            times=pts,
            values=values,
            kind="c0",
            fidelity=float(abs(values[-1])),
            extras={"method": "co-rotating exact"},
        )


def open_qubit_frame(
    model: OpenQubitModel, grid: TimeGrid, gauge: str = "transport"
) -> SpectralFrame:
    """Analytic spectral frame for the open-qubit model (golden reference
    for the numeric frame builder; eigenvectors depend only on t/T)."""
    return build_spectral_frame(
        None, grid, analytic=lambda t: model.analytic_frame(t, gauge)
    )


@dataclass(frozen=True)
class RotatingFieldQubit:
    """H(t) = J(t) [cos(Wt) sx + sin(Wt) sy + (w/2) sz], closed system.

    The transverse component has unit magnitude, so k = sqrt(w^2 + 4) and
    the eigenvector mixing angle gamma is constant.  The tracked state is
    the k/2 eigenvector (the state continuously connected to the t = 0
    preparation); its gap to the companion state is J(t) k.
    """

    control: ControlSignal
    rabi: float
    z_field: float

    target_level = 0

    @property
    def k_value(self) -> float:
        return sqrt(self.z_field**2 + 4.0)

    @property
    def gamma_angle(self) -> float:
        k, w = self.k_value, self.z_field
        return acos((k + w) / sqrt(2 * k * k + 2 * k * w))

    def hamiltonian(self, t: float) -> np.ndarray:
        return self.control.sample_j(t) * self.direction(t)

    def direction(self, t: float) -> np.ndarray:
        a, b = cos(self.rabi * t), sin(self.rabi * t)
        return a * SX + b * SY + 0.5 * self.z_field * SZ

    def target_vector(self, t: float) -> np.ndarray:
        g = self.gamma_angle
        return np.array([np.exp(-1j * self.rabi * t) * cos(g), sin(g)])

    def companion_vector(self, t: float) -> np.ndarray:
        g = self.gamma_angle
        return np.array([-np.exp(-1j * self.rabi * t) * sin(g), cos(g)])

    @property
    def kernel_frequency(self) -> float:
        """Oscillation rate of the transition kernel under steady J0: the
        gap J0 k minus the mixing-frame correction W cos(2 gamma)."""
        return self.control.j0 * self.k_value - self.rabi * cos(2 * self.gamma_angle)

    def closed_kernel_u(self, times: np.ndarray) -> np.ndarray:
        k, g, w_rabi = self.k_value, self.gamma_angle, self.rabi
        phases = k * self.control.phase_profile(times) - w_rabi * cos(2 * g) * (
            times - times[0]
        )
        return (w_rabi / k) * np.exp(1j * phases)

    def closed_selfcoupling(self, times: np.ndarray) -> np.ndarray:
        g = self.gamma_angle
        return np.full(len(times), -1j * self.rabi * cos(g) ** 2)

    def closed_free_integral(self, t: float) -> complex:
        """Running kernel integral int_0^t h(t,t')|_11 dt' for steady J0."""
        w_rabi, k = self.rabi, self.k_value
        phi = self.kernel_frequency
        return 1j * w_rabi**2 * (1.0 - np.exp(1j * phi * t)) / (k * k * phi)

    def target_dynamical_phase(self, times: np.ndarray) -> np.ndarray:
        return 0.5 * self.k_value * self.control.phase_profile(times)

    def exact_amplitude(self, grid: TimeGrid) -> TrajectoryResult:
        """Exact tracked amplitude via the frame co-rotating at the drive
        rate, where H is piecewise constant and every segment advances by a
        closed-form SU(2) rotation; impulse kicks are exact unitaries."""
        w_rabi, w_z, k = self.rabi, self.z_field, self.k_value
        g = self.gamma_angle
        v0 = np.array([cos(g), sin(g)], dtype=complex)
        psi = v0.copy()
        pts = grid.points
        out = np.empty(len(pts), dtype=complex)
        out[0] = 1.0 + 0.0j

        t_end = pts[-1]
        events = list(self.control.breakpoints(pts[0], t_end))
        imp_t, imp_a = self.control.impulses(pts[0], t_end)
        kick_amp = dict(zip(imp_t.tolist(), imp_a.tolist()))
        times = np.unique(np.concatenate([pts, np.asarray(events), imp_t]))

        next_grid = 1
        for a, b in zip(times[:-1], times[1:]):
            j = self.control.sample_j(0.5 * (a + b))
            # rotating-frame generator: J (sx + (w/2) sz) - (W/2) sz
            psi = _su2_step(0.0, j, 0.0, 0.5 * (j * w_z - w_rabi), b - a) @ psi
            amp = kick_amp.get(float(b))
            if amp is not None:
                psi = _su2_step(0.0, amp, 0.0, 0.5 * amp * w_z, 1.0) @ psi
            while next_grid < len(pts) and abs(b - pts[next_grid]) < 1e-12 * max(1.0, t_end):
                out[next_grid] = np.exp(0.5j * w_rabi * pts[next_grid]) * np.vdot(v0, psi)
                next_grid += 1

        phases = np.exp(1j * self.target_dynamical_phase(pts))
        values = phases * out
        return TrajectoryResult(
            times=pts,
            values=values,
            kind="c0",
            fidelity=float(abs(values[-1])),
            extras={"method": "rotating-frame exact"},
        )


def rotating_h11(model: RotatingFieldQubit, t: float, t_prime: float) -> complex:
    """Closed-form transition kernel (1,1) element for the rotating-field
    qubit, control phases included."""
    if t_prime > t:
        raise ValueError(f"need t >= t', got ({t}, {t_prime})")
    k, g, w_rabi = model.k_value, model.gamma_angle, model.rabi
    phase = k * model.control.phase_integral(t_prime, t) - w_rabi * cos(2 * g) * (
        t - t_prime
    )
    return (w_rabi**2 / k**2) * np.exp(1j * phase)


@dataclass(frozen=True)
class TwoQubitEffectiveModel:
    """Exchange-coupled qubit pair reduced to an effective single qubit.

    The parent Hamiltonian is J [d s1+ s2- + d* s1- s2+ + B1 s1z + B2 s2z]
    with B1 = B + w/4, B2 = B - w/4.  On the span of (up,down), (down,up)
    the symmetric field B acts trivially (decoherence-free subspace), and
    with d = t/T, w/2 = 1 - t/T the effective qubit sweeps from a pure z
    field to a pure exchange coupling.  k(0) = k(T) = 2, k(T/2) = sqrt(2).
    """

    control: ControlSignal
    total_time: float

    target_level = 0

    def drive(self, t: float) -> float:
        return t / self.total_time

    def half_z(self, t: float) -> float:
        return 1.0 - t / self.total_time

    def k_value(self, t: float) -> float:
        tt = self.total_time
        return 2.0 * sqrt(tt * tt - 2 * t * tt + 2 * t * t) / tt

    def gamma_angle(self, t: float) -> float:
        return 0.5 * atan2(2.0 * self.drive(t), 2.0 * self.half_z(t))

    def hamiltonian(self, t: float) -> np.ndarray:
        return self.control.sample_j(t) * self.direction(t)

    def direction(self, t: float) -> np.ndarray:
        return self.drive(t) * SX + self.half_z(t) * SZ

    def parent_block(self, t: float, noise_field: float) -> np.ndarray:
        """Projection of the parent two-qubit Hamiltonian (divided by J)
        onto span{|ud>, |du>}; independent of ``noise_field``."""
        d = self.drive(t)
        b1 = noise_field + 0.5 * self.half_z(t)
        b2 = noise_field - 0.5 * self.half_z(t)
        # basis (|ud>, |du>): s1z -> diag(1, -1), s2z -> diag(-1, 1),
        # s1+ s2- maps |du> -> |ud>.
        return np.array([[b1 - b2, d], [d, b2 - b1]], dtype=complex)

    def target_vector(self, t: float) -> np.ndarray:
        g = self.gamma_angle(t)
        return np.array([cos(g), sin(g)], dtype=complex)

    def k_antiderivative(self, t: float) -> float:
        """Closed-form primitive of k(x)."""
        tt = self.total_time
        c = 0.5 * tt

        def prim(u: float) -> float:
            r = sqrt(u * u + c * c)
            return 0.5 * (u * r + c * c * asinh(u / c))

        return (2.0 * sqrt(2.0) / tt) * (prim(t - 0.5 * tt) - prim(-0.5 * tt))

    def weighted_phase(self, t1: float, t2: float) -> float:
        """int_{t1}^{t2} J(x) k(x) dx, exact for pulse trains and impulses."""
        return self.control.weighted_phase_integral(
            t1, t2, antiderivative=self.k_antiderivative, weight=self.k_value
        )

    def closed_kernel_u(self, times: np.ndarray) -> np.ndarray:
        tt = self.total_time
        out = np.empty(len(times), dtype=complex)
        acc = 0.0
        prev = times[0]
        for i, t in enumerate(times):
            acc += self.weighted_phase(prev, t)
            kk = self.k_value(t)
            out[i] = (2.0 / (tt * kk * kk)) * np.exp(1j * acc)
            prev = t
        return out

    def closed_selfcoupling(self, times: np.ndarray) -> np.ndarray:
        return np.zeros(len(times), dtype=complex)

    def target_dynamical_phase(self, times: np.ndarray) -> np.ndarray:
        out = np.empty(len(times))
        acc = 0.0
        prev = times[0]
        for i, t in enumerate(times):
            acc += 0.5 * self.weighted_phase(prev, t)
            out[i] = acc
            prev = t
        return out


def twoqubit_h11(model: TwoQubitEffectiveModel, t: float, t_prime: float) -> complex:
    """Closed-form transition kernel for the two-qubit effective model."""
    if t_prime > t:
        raise ValueError(f"need t >= t', got ({t}, {t_prime})")
    tt = model.total_time
    k_t, k_p = model.k_value(t), model.k_value(t_prime)
    pref = 4.0 / (tt * tt * k_t * k_t * k_p * k_p)
    return pref * np.exp(1j * model.weighted_phase(t_prime, t))


def exact_closed_amplitude(
    model, grid: TimeGrid, rate_cap: float = 0.05
) -> TrajectoryResult:
    """Tracked amplitude from direct unitary integration in the lab frame.

    Steps use midpoint-rule exponentials between control events, with
    substeps capped so each advances at most ``rate_cap`` radians of
    spectral phase; impulses apply their exact kick unitaries.  Serves as
    the brute-force oracle for the closed-system machinery.
    """
    pts = grid.points
    t_end = pts[-1]
    control = model.control
    events = list(control.breakpoints(pts[0], t_end))
    imp_t, imp_a = control.impulses(pts[0], t_end)
    kick_amp = dict(zip(imp_t.tolist(), imp_a.tolist()))
    times = np.unique(np.concatenate([pts, np.asarray(events), imp_t]))

    psi = model.target_vector(pts[0]).astype(complex)
    raw = np.empty(len(pts), dtype=complex)
    raw[0] = 1.0 + 0.0j
    next_grid = 1
    for a, b in zip(times[:-1], times[1:]):
        seg = b - a
        h_mid = model.hamiltonian(0.5 * (a + b))
        c, x, y, z = _pauli_coefficients(h_mid)
        rate = sqrt(x * x + y * y + z * z)
        nsub = max(1, ceil(rate * seg / rate_cap))
        h = seg / nsub
        for s in range(nsub):
            tm = a + (s + 0.5) * h
            c, x, y, z = _pauli_coefficients(model.hamiltonian(tm))
            psi = _su2_step(c, x, y, z, h) @ psi
        amp = kick_amp.get(float(b))
        if amp is not None:
            c, x, y, z = _pauli_coefficients(model.direction(b))
            psi = _su2_step(amp * c, amp * x, amp * y, amp * z, 1.0) @ psi
        while next_grid < len(pts) and abs(b - pts[next_grid]) < 1e-12 * max(1.0, t_end):
            raw[next_grid] = np.vdot(model.target_vector(pts[next_grid]), psi)
            next_grid += 1

    values = np.exp(1j * model.target_dynamical_phase(pts)) * raw
    return TrajectoryResult(
        times=pts,
        values=values,
        kind="c0",
        fidelity=float(abs(values[-1])),
        extras={"method": "lab-frame unitary"},
    )


@dataclass(frozen=True)
class AdiabaticEstimate:
    """max over (s, q != target) of |<E_q| dH/ds |E_tgt>| / gap^2, with the
    total time it should be compared against."""

    value: float
    time_of_max: float
    total_time: float
    excluded_instants: int = 0

    @property
    def satisfied_margin(self) -> float:
        """Total time over the estimator; >> 1 means safely adiabatic."""
        return self.total_time / self.value if self.value > 0 else np.inf


def adiabatic_condition(
    hamiltonian,
    grid: TimeGrid,
    target_level: int = 0,
    policy=DEFAULT_POLICY,
) -> AdiabaticEstimate:
    """Evaluate the gap-based adiabatic-condition estimator on the grid.

    dH/ds is taken by central differences in the normalized time s = t/T.
    Instants with a closing gap are excluded with a warning.
    """
    frame = build_spectral_frame(hamiltonian, grid, policy=policy)
    pts = grid.points
    t_total = grid.duration
    dt = grid.dt
    best, best_t = 0.0, pts[0]
    excluded = 0
    for i in range(len(pts)):
        if frame.degenerate[i]:
            excluded += 1
            continue
        lo = max(i - 1, 0)
        hi = min(i + 1, len(pts) - 1)
        dh_ds = (
            np.asarray(hamiltonian(pts[hi]), dtype=complex)
            - np.asarray(hamiltonian(pts[lo]), dtype=complex)
        ) / ((hi - lo) * dt) * t_total
        v = frame.vectors[i]
        e = frame.energies[i]
        for q in range(frame.n_levels):
            if q == target_level:
                continue
            gap = e[q] - e[target_level]
            val = abs(np.vdot(v[:, q], dh_ds @ v[:, target_level])) / gap**2
            if val > best:
                best, best_t = val, pts[i]
    if excluded:
        warnings.warn(f"adiabatic estimator skipped {excluded} degenerate instants")
    return AdiabaticEstimate(best, best_t, t_total, excluded)
