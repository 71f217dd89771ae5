"""Driven three-level dynamics under the Born-Markov master equation.

The qutrit (cavity already decoupled dispersively) evolves as

    drho/dt = -i[H, rho] + sum_k c_k D[O_k] rho,
    D[O] rho = 2 O rho O+ - O+ O rho - rho O+ O,

with downward jump operators |0><1|, |0><2|, |1><2| at half the relaxation
rates and pure-dephasing projectors |l><l| at the dephasing rates.  With this
convention the off-diagonal decay rates come out as

    gamma_10 = Gamma_10/2 + dephase_00 + dephase_11
    gamma_20 = (Gamma_20 + Gamma_21)/2 + dephase_00 + dephase_22
    gamma_21 = (Gamma_10 + Gamma_20 + Gamma_21)/2 + dephase_11 + dephase_22

(the last one is needed by the steady-state populations but is fixed by the
same Lindblad algebra).  The rotating frame puts the shared probe/control
detuning delta on levels 1 and 2 and the two drives on the 2-1 and 2-0 bonds.

Everything is angular frequency (rad/s).  Density matrices are plain complex
3x3 numpy arrays; the steady state is obtained from the null space of the
9x9 Liouvillian, and time evolution uses a fixed-step classical 4th-order
integrator acting on the vectorized state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

__all__ = [
    "ThreeLevelRates",
    "DriveConfig",
    "Trajectory",
    "NoUniqueSteadyState",
    "PoleAtOrigin",
    "DegenerateDenominator",
    "TraceDriftError",
    "WeakProbeWarning",
    "rotating_frame_hamiltonian",
    "liouvillian_matrix",
    "evolve",
    "steady_state",
    "coherence_rho20_analytic",
    "populations_analytic",
    "rabi_trace",
    "validate_density_matrix",
]

WEAK_PROBE_WARN_RATIO = 0.1
TRACE_DRIFT_TOL = 1e-6


class NoUniqueSteadyState(Exception):
    """The Liouvillian null space is empty or has dimension > 1."""


class PoleAtOrigin(Exception):
    """Analytic coherence denominator vanished."""


class DegenerateDenominator(Exception):
    """Steady-state population denominator vanished."""


class TraceDriftError(Exception):
    """Integrator trace drift exceeded tolerance."""


class WeakProbeWarning(UserWarning):
    """Probe strength outside the weak-probe validity of the analytics."""


@dataclass(frozen=True)
class ThreeLevelRates:
    """Relaxation and pure-dephasing rates (rad/s), all non-negative.

    relax_ij is the population decay rate Gamma_ij of |i> -> |j>; dephase_ll
    the pure dephasing of level l.  Coherence decay rates are derived
    properties, never stored independently.
    """

    relax_10: float
    relax_20: float
    relax_21: float
    dephase_00: float = 0.0
    dephase_11: float = 0.0
    dephase_22: float = 0.0

    def __post_init__(self):
        for name in ("relax_10", "relax_20", "relax_21",
                     "dephase_00", "dephase_11", "dephase_22"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def coherence_10(self) -> float:
        return 0.5 * self.relax_10 + self.dephase_00 + self.dephase_11

    @property
    def coherence_20(self) -> float:
        return 0.5 * (self.relax_20 + self.relax_21) + self.dephase_00 + self.dephase_22

    @property
    def coherence_21(self) -> float:
        return (0.5 * (self.relax_10 + self.relax_20 + self.relax_21)
                + self.dephase_11 + self.dephase_22)

    @property
    def max_rate(self) -> float:
        return max(self.relax_10, self.relax_20, self.relax_21,
                   self.dephase_00, self.dephase_11, self.dephase_22)


@dataclass(frozen=True)
class DriveConfig:
    """Control/probe drive strengths and their shared detuning (rad/s).

    The control is resonant with the 2-1 transition, so the probe and control
    detunings coincide in the rotating frame (a single delta).
    """

    control: float
    probe: float
    detuning: float = 0.0

    def __post_init__(self):
        if self.control < 0 or self.probe < 0:
            raise ValueError("drive strengths must be >= 0")

    @property
    def weak_probe(self) -> bool:
        return self.control == 0.0 or self.probe <= WEAK_PROBE_WARN_RATIO * self.control

    @property
    def max_rate(self) -> float:
        return max(self.control, self.probe, abs(self.detuning))


@dataclass(frozen=True)
class Trajectory:
    """Sampled density-matrix trajectory."""

    times: np.ndarray
    states: np.ndarray  # shape (n, 3, 3)


def _proj(i: int, j: int) -> np.ndarray:
    out = np.zeros((3, 3), dtype=complex)
    out[i, j] = 1.0
    return out


def rotating_frame_hamiltonian(drive: DriveConfig) -> np.ndarray:
    """Qutrit Hamiltonian in the doubly rotating frame (rad/s).

    delta (|1><1| + |2><2|) - (Omega_c |2><1| + Omega_p |2><0| + h.c.);
    the cavity mode is dispersively decoupled and carries no term here.
    """
    h = np.zeros((3, 3), dtype=complex)
    h[1, 1] = drive.detuning
    h[2, 2] = drive.detuning
    h[2, 1] = h[1, 2] = -drive.control
    h[2, 0] = h[0, 2] = -drive.probe
    return h


def _jump_terms(rates: ThreeLevelRates):
    return (
        (0.5 * rates.relax_10, _proj(0, 1)),
        (0.5 * rates.relax_20, _proj(0, 2)),
        (0.5 * rates.relax_21, _proj(1, 2)),
        (rates.dephase_00, _proj(0, 0)),
        (rates.dephase_11, _proj(1, 1)),
        (rates.dephase_22, _proj(2, 2)),
    )


def master_equation_rhs(rho: np.ndarray, rates: ThreeLevelRates,
                        drive: DriveConfig) -> np.ndarray:
    """Right-hand side of the master equation for one state."""
    h = rotating_frame_hamiltonian(drive)
    out = -1j * (h @ rho - rho @ h)
    for coef, op in _jump_terms(rates):
        if coef == 0.0:
            continue
        opd = op.conj().T
        out += coef * (2.0 * op @ rho @ opd - opd @ op @ rho - rho @ opd @ op)
    return out


def liouvillian_matrix(rates: ThreeLevelRates, drive: DriveConfig) -> np.ndarray:
    """9x9 superoperator L with L @ vec(rho) = vec(drho/dt) (row-major vec)."""
    liou = np.zeros((9, 9), dtype=complex)
    for col in range(9):
        basis = np.zeros(9, dtype=complex)
        basis[col] = 1.0
        liou[:, col] = master_equation_rhs(
            basis.reshape(3, 3), rates, drive
        ).reshape(9)
    return liou


def evolve(rho0: np.ndarray, rates: ThreeLevelRates, drive: DriveConfig,
           duration: float, step: float | None = None,
           sample_stride: int = 1) -> Trajectory:
    """Fixed-step 4th-order evolution of rho0 over ``duration`` seconds.

    The default step is 1/(200 * max(rates, drives)).  The trajectory is
    sampled every ``sample_stride`` steps (always including start and end);
    trace drift beyond 1e-6 at any sample aborts with a step-size diagnostic.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    scale = max(rates.max_rate, drive.max_rate)
    if step is None:
        step = (1.0 / (200.0 * scale)) if scale > 0 else duration / 1000.0
    if step <= 0 or duration < step:
        raise ValueError("need 0 < step <= duration")
    if sample_stride < 1:
        raise ValueError("sample_stride must be >= 1")

    n_steps = int(round(duration / step))
    dt = duration / n_steps

    # For the linear autonomous master equation the classical RK4 update is
    # exactly the degree-4 Taylor polynomial of exp(dt L).
    liou = liouvillian_matrix(rates, drive)
    ldt = liou * dt
    stepper = np.eye(9, dtype=complex)
    term = np.eye(9, dtype=complex)
    for order in range(1, 5):
        term = term @ ldt / order
        stepper = stepper + term

    vec = np.asarray(rho0, dtype=complex).reshape(9).copy()
    times = [0.0]
    states = [vec.reshape(3, 3).copy()]
    for k in range(1, n_steps + 1):
        vec = stepper @ vec
        if k % sample_stride == 0 or k == n_steps:
            rho = vec.reshape(3, 3)
            drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
            if drift > TRACE_DRIFT_TOL:
                raise TraceDriftError(
                    f"trace drifted by {drift:.2e} at t = {k * dt:.3e} s with "
                    f"step {dt:.3e} s; reduce the step size"
                )
            times.append(k * dt)
            states.append(rho.copy())
    return Trajectory(times=np.array(times), states=np.array(states))


def steady_state(rates: ThreeLevelRates, drive: DriveConfig) -> np.ndarray:
    """Unique trace-one solution of L[rho] = 0 via null-space extraction."""
    if rates.max_rate == 0.0:
        raise NoUniqueSteadyState("all dissipation rates are zero")
    liou = liouvillian_matrix(rates, drive)
    kernel = null_space(liou, rcond=1e-10)
    if kernel.shape[1] == 0:
        # borderline numerical rank; retry with a looser cutoff before failing
        kernel = null_space(liou, rcond=1e-7)
    if kernel.shape[1] == 0:
        raise NoUniqueSteadyState("Liouvillian has numerically empty null space")
    if kernel.shape[1] > 1:
        raise NoUniqueSteadyState(
            f"Liouvillian null space has dimension {kernel.shape[1]}"
        )
    rho = kernel[:, 0].reshape(3, 3)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise NoUniqueSteadyState("null vector is traceless")
    rho = rho / tr
    return 0.5 * (rho + rho.conj().T)


def _warn_if_strong_probe(drive: DriveConfig):
    if drive.control > 0 and not drive.weak_probe:
        warnings.warn(
            f"probe/control = {drive.probe / drive.control:.3g} exceeds the "
            f"weak-probe ratio {WEAK_PROBE_WARN_RATIO}; analytic steady-state "
            "expressions are first order in the probe",
            WeakProbeWarning,
            stacklevel=3,
        )


def coherence_rho20_analytic(rates: ThreeLevelRates, drive: DriveConfig) -> complex:
    """Closed-form steady-state rho_20 to first order in the probe.

    rho_20 = Omega_p / (delta - i gamma_20 - Omega_c^2 / (delta - i gamma_10)).
    """
    _warn_if_strong_probe(drive)
    g10, g20 = rates.coherence_10, rates.coherence_20
    inner = drive.detuning - 1j * g10
    if drive.control > 0 and abs(inner) < 1e-30:
        raise PoleAtOrigin("detuning and gamma_10 both vanish under a control drive")
    den = drive.detuning - 1j * g20
    if drive.control > 0:
        den = den - drive.control**2 / inner
    if abs(den) < 1e-30:
        raise PoleAtOrigin("coherence denominator vanished")
    return drive.probe / den


def populations_analytic(rates: ThreeLevelRates, drive: DriveConfig,
                         im_rho20: float) -> tuple[float, float]:
    """Steady-state (rho_11, rho_22) to leading order in the probe.

    Eliminating the 2-1 coherence from the stationary population equations
    gives a 2x2 linear system driven by the probe pump P = 2 Omega_p Im(rho_20)
    and by the control-probe cross term S routed through gamma_21:

        rho_11 = [P (W + Gamma_21) - S Gamma_20] / D
        rho_22 = [P (W + Gamma_10) + S Gamma_10] / D
        W = 2 Omega_c^2 / gamma_21
        D = W (Gamma_10 + Gamma_20) + Gamma_10 (Gamma_20 + Gamma_21)
        S = P * (Omega_c^2 / gamma_21) * (delta^2 - gamma_10 gamma_20 - Omega_c^2)
              / (gamma_20 (delta^2 + gamma_10^2) + Omega_c^2 gamma_10)

    where the S ratio follows from the closed-form coherence.  The lambda
    (Gamma_10 = 0) configuration is supported whenever the control drive keeps
    D nonzero.  Validated against the Liouvillian null-space solution.
    """
    _warn_if_strong_probe(drive)
    g10, g20, g21 = rates.coherence_10, rates.coherence_20, rates.coherence_21
    r10, r20, r21 = rates.relax_10, rates.relax_20, rates.relax_21
    oc, op, det = drive.control, drive.probe, drive.detuning

    pump = 2.0 * op * im_rho20
    if oc > 0 and g21 == 0:
        raise DegenerateDenominator("gamma_21 vanished under a control drive")
    w = 2.0 * oc**2 / g21 if oc > 0 else 0.0
    denom = w * (r10 + r20) + r10 * (r20 + r21)
    if denom <= 0:
        raise DegenerateDenominator(
            "population denominator vanished (no decay path to the ground state)"
        )
    if oc > 0:
        kden = g20 * (det**2 + g10**2) + oc**2 * g10
        cross = pump * (oc**2 / g21) * (det**2 - g10 * g20 - oc**2) / kden
    else:
        cross = 0.0
    rho11 = (pump * (w + r21) - cross * r20) / denom
    rho22 = (pump * (w + r10) + cross * r10) / denom
    return rho11, rho22


def rabi_trace(rates: ThreeLevelRates, probe: float, times) -> np.ndarray:
    """Excited-state population rho_22(t) under a resonant 0-2 probe drive.

    The control channel is off; the trace starts from the ground state and is
    returned at exactly the requested times (strictly increasing, starting at
    a non-negative instant).  Intended for damped-sinusoid fitting.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("times must be a 1-D array with at least two points")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("times must be strictly increasing and non-negative")
    drive = DriveConfig(control=0.0, probe=probe, detuning=0.0)

    scale = max(rates.max_rate, drive.max_rate)
    base_dt = (1.0 / (200.0 * scale)) if scale > 0 else (times[-1] - times[0]) / 1000.0

    liou = liouvillian_matrix(rates, drive)
    vec = np.zeros(9, dtype=complex)
    vec[0] = 1.0  # vec of |0><0|

    out = np.empty(times.size)
    current = 0.0
    for idx, target in enumerate(times):
        gap = target - current
        if gap > 0:
            n_sub = max(1, int(np.ceil(gap / base_dt)))
            dt = gap / n_sub
            ldt = liou * dt
            stepper = np.eye(9, dtype=complex)
            term = np.eye(9, dtype=complex)
            for order in range(1, 5):
                term = term @ ldt / order
                stepper = stepper + term
            for _ in range(n_sub):
                vec = stepper @ vec
            current = target
        out[idx] = vec.reshape(3, 3)[2, 2].real
    return out


def validate_density_matrix(rho: np.ndarray, hermit_tol: float = 1e-12,
                            trace_tol: float = 1e-9,
                            positivity_tol: float = 1e-9) -> None:
    """Raise ValueError unless rho is Hermitian, unit-trace, and PSD within tolerance."""
    rho = np.asarray(rho)
    if rho.shape != (3, 3):
        raise ValueError("density matrix must be 3x3")
    scale = max(1.0, float(np.max(np.abs(rho))))
    if np.max(np.abs(rho - rho.conj().T)) > hermit_tol * scale:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise ValueError("density matrix trace deviates from 1 beyond tolerance")
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if eigs.min() < -positivity_tol:
        raise ValueError("density matrix has a negative eigenvalue beyond tolerance")
