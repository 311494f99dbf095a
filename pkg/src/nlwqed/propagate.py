"""Norm-preserving sparse time evolution: exp(-i H t) applied to a state.

Two interchangeable engines:

  * "chebyshev" - polynomial expansion of the propagator with Bessel
    coefficients; the order is chosen from the requested tolerance and
    certified spectral bounds. Best for long horizons at fixed H.
  * "krylov"    - Lanczos projection with adaptive substepping; better
    when snapshots are dense or the spectral range is unknown.

Both only ever touch H through sparse matrix-vector products.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import jv

from .errors import NoConvergence, StepRejected
from .hilbert import StateVector

CHEBYSHEV = "chebyshev"
KRYLOV = "krylov"


@dataclass(frozen=True)
class EvolutionConfig:
    total_time: float
    time_step: float = 10.0  # snapshot spacing when snapshot_times not given
    method: str = CHEBYSHEV
    tolerance: float = 1e-9
    spectral_bounds: tuple[float, float] | None = None
    snapshot_times: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.method not in (CHEBYSHEV, KRYLOV):
            raise ValueError(f"unknown method {self.method!r}")
        if not (1e-14 < self.tolerance <= 1e-6):
            raise ValueError("tolerance must lie in (1e-14, 1e-6]")
        if self.time_step <= 0 or self.total_time < 0:
            raise ValueError("time_step must be > 0 and total_time >= 0")

    def times(self) -> np.ndarray:
        if self.snapshot_times is not None:
            t = np.asarray(self.snapshot_times, dtype=float)
            if np.any(np.diff(t) <= 0) or (len(t) and t[0] < 0):
                raise ValueError("snapshot_times must be strictly increasing and >= 0")
            return t
        n = int(math.ceil(self.total_time / self.time_step - 1e-12))
        return np.arange(1, n + 1) * self.time_step


def gershgorin_bounds(H: sp.spmatrix) -> tuple[float, float]:
    """Certified (if loose) spectral interval from Gershgorin discs."""
    Ha = H.tocsr()
    diag = np.real(Ha.diagonal())
    radii = np.asarray(np.abs(Ha).sum(axis=1)).ravel() - np.abs(Ha.diagonal())
    return float(np.min(diag - radii)), float(np.max(diag + radii))


def estimate_spectral_bounds(
    H: sp.spmatrix, *, seed: int = 7, iterations: int = 90
) -> tuple[float, float]:
    """Certified-by-padding spectral interval of a Hermitian sparse operator.

    Extremal Ritz values from a fixed-budget Lanczos sweep with a
    deterministic start vector, padded by 5% of the range (Ritz values
    underestimate the extremes) and clipped to the Gershgorin interval,
    which always contains the spectrum.
    """
    dim = H.shape[0]
    if dim == 1:
        e = float(np.real(H.toarray()[0, 0]))
        return e - 0.5, e + 0.5
    g_lo, g_hi = gershgorin_bounds(H)
    rng = np.random.RandomState(seed)
    v = rng.standard_normal(dim) + 0j
    v /= np.linalg.norm(v)
    m = min(iterations, dim)
    alphas = np.zeros(m)
    betas = np.zeros(max(m - 1, 0))
    v_prev = np.zeros_like(v)
    beta = 0.0
    for j in range(m):
        w = H @ v
        alphas[j] = float(np.real(np.vdot(v, w)))
        w = w - alphas[j] * v - beta * v_prev
        if j == m - 1:
            break
        beta = float(np.linalg.norm(w))
        if beta < 1e-13:
            m = j + 1
            break
        betas[j] = beta
        v_prev, v = v, w / beta
    T = np.diag(alphas[:m]) + np.diag(betas[: m - 1], 1) + np.diag(betas[: m - 1], -1)
    ritz = np.linalg.eigvalsh(T)
    if not np.all(np.isfinite(ritz)):
        raise NoConvergence("Lanczos sweep for spectral bounds produced non-finite values")
    lo, hi = float(ritz[0]), float(ritz[-1])
    pad = 0.05 * max(hi - lo, 1e-12) + 1e-12
    return max(lo - pad, g_lo), min(hi + pad, g_hi)


def _chebyshev_coefficients(z: float, tol: float) -> np.ndarray:
    """Bessel coefficients J_m(z) truncated when the tail is below tol."""
    m_max = int(z + 60 + 12.0 * z ** (1.0 / 3.0)) + 8
    ms = np.arange(m_max + 1)
    bes = jv(ms, z)
    small = np.abs(bes) < tol / 20.0
    order = None
    run = 0
    for m in range(len(bes)):
        if m > z and small[m]:
            run += 1
            if run >= 3:
                order = m
                break
        else:
            run = 0
    if order is None:
        raise StepRejected(
            f"Chebyshev order cap reached at z = {z:.3g}; shrink the step"
        )
    return bes[: order + 1]


def chebyshev_apply(
    H: sp.spmatrix,
    psi: np.ndarray,
    dt: float,
    bounds: tuple[float, float],
    tol: float,
) -> np.ndarray:
    """exp(-i H dt) psi via the Chebyshev expansion on certified bounds."""
    lo, hi = bounds
    a = 0.5 * (hi - lo)
    b = 0.5 * (hi + lo)
    z = abs(a * dt)
    if z < 1e-14:
        return psi * np.exp(-1j * b * dt)
    bes = _chebyshev_coefficients(z, tol)
    scale = 1.0 / a
    shift = -b / a
    unit = -1j if dt >= 0 else 1j  # J_m(-z) expansions fold into the phase

    def hs(v: np.ndarray) -> np.ndarray:
        return scale * (H @ v) + shift * v

    phi_prev = psi
    phi_cur = hs(psi)
    acc = bes[0] * phi_prev + (2.0 * unit * bes[1]) * phi_cur
    phase = unit
    for m in range(2, len(bes)):
        phase *= unit
        phi_next = 2.0 * hs(phi_cur) - phi_prev
        acc += (2.0 * phase * bes[m]) * phi_next
        phi_prev, phi_cur = phi_cur, phi_next
    return acc * np.exp(-1j * b * dt)


def lanczos_apply(
    H: sp.spmatrix,
    psi: np.ndarray,
    dt: float,
    tol: float,
    *,
    krylov_dim: int = 30,
    _depth: int = 0,
) -> np.ndarray:
    """exp(-i H dt) psi via a Lanczos projection, substepping on demand."""
    if _depth > 24:
        raise StepRejected("Krylov substepping failed to reach the tolerance")
    beta0 = np.linalg.norm(psi)
    if beta0 == 0.0:
        return psi.copy()
    m = min(krylov_dim, len(psi))
    V = np.empty((m, len(psi)), dtype=complex)
    alphas = np.zeros(m)
    betas = np.zeros(m - 1) if m > 1 else np.zeros(0)
    V[0] = psi / beta0
    w = H @ V[0]
    alphas[0] = float(np.real(np.vdot(V[0], w)))
    w = w - alphas[0] * V[0]
    k = 1
    for j in range(1, m):
        beta = np.linalg.norm(w)
        if beta < 1e-14 * max(1.0, abs(alphas[0])):
            break  # happy breakdown: exact in the Krylov space
        betas[j - 1] = beta
        V[j] = w / beta
        w = H @ V[j]
        alphas[j] = float(np.real(np.vdot(V[j], w)))
        w = w - alphas[j] * V[j] - betas[j - 1] * V[j - 1]
        # one Gram-Schmidt sweep keeps the small basis orthonormal
        w -= V[: j + 1].T @ (np.conj(V[: j + 1]) @ w)
        k = j + 1
    T = np.diag(alphas[:k]) + np.diag(betas[: k - 1], 1) + np.diag(betas[: k - 1], -1)
    evals, evecs = np.linalg.eigh(T)
    small = evecs @ (np.exp(-1j * dt * evals) * np.conj(evecs[0, :]))
    if k == m and k > 2:
        # same projection at half the order estimates the truncation error
        Th = T[: k - 2, : k - 2]
        eh, vh = np.linalg.eigh(Th)
        sh = vh @ (np.exp(-1j * dt * eh) * np.conj(vh[0, :]))
        err = float(np.linalg.norm(small[: k - 2] - sh)) + float(abs(small[-1]))
        if err > tol:
            half = lanczos_apply(H, psi, dt / 2, tol / 2, krylov_dim=krylov_dim, _depth=_depth + 1)
            return lanczos_apply(H, half, dt / 2, tol / 2, krylov_dim=krylov_dim, _depth=_depth + 1)
    return beta0 * (V[:k].T @ small)


def iter_evolve(state: StateVector, H: sp.spmatrix, config: EvolutionConfig):
    """Yield (time, StateVector) at each snapshot time; lazy and in order.

    Norm drift is monitored against the contract
    |norm - 1| < 10 * tolerance * steps and violations raise StepRejected.
    """
    if H.shape[0] != state.basis.dimension:
        raise ValueError("operator dimension does not match the basis")
    bounds = config.spectral_bounds
    if config.method == CHEBYSHEV and bounds is None:
        bounds = estimate_spectral_bounds(H)
    psi = state.data.copy()
    t_prev = state.time
    start_norm = np.linalg.norm(psi)
    for step, t in enumerate(config.times(), start=1):
        dt = float(t) - t_prev
        if dt < 0:
            raise ValueError("snapshot times must not precede the state time")
        if config.method == CHEBYSHEV:
            psi = chebyshev_apply(H, psi, dt, bounds, config.tolerance)
        else:
            psi = lanczos_apply(H, psi, dt, config.tolerance)
        t_prev = float(t)
        drift = abs(np.linalg.norm(psi) / start_norm - 1.0)
        if drift > 10.0 * config.tolerance * step:
            raise StepRejected(
                f"norm drift {drift:.3e} exceeds 10*tol*steps at t={t:g}"
            )
        yield float(t), StateVector(state.basis, psi, float(t))


def evolve(
    state: StateVector, H: sp.spmatrix, config: EvolutionConfig
) -> list[tuple[float, StateVector]]:
    """Materialized snapshot list; use iter_evolve for long runs."""
    return [(t, s.copy()) for t, s in iter_evolve(state, H, config)]


# ---------------------------------------------------------------------------
# snapshot persistence
# ---------------------------------------------------------------------------

class SnapshotWriter:
    """Binary state dumps plus a JSON manifest; appendable and resumable."""

    def __init__(self, directory, basis_hash: str, config: dict):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.directory / "snapshots.json"
        self.entries: list[dict] = []
        self.meta = {"basis_hash": basis_hash, "config": config}
        if self.manifest_path.exists():
            loaded = json.loads(self.manifest_path.read_text())
            if loaded.get("basis_hash") != basis_hash:
                raise ValueError("snapshot directory belongs to another basis")
            self.entries = loaded.get("snapshots", [])

    def write(self, time: float, data: np.ndarray) -> Path:
        idx = len(self.entries)
        path = self.directory / f"state_{idx:05d}.npy"
        np.save(path, data)
        self.entries.append({"index": idx, "time": float(time), "file": path.name})
        payload = dict(self.meta, snapshots=self.entries)
        self.manifest_path.write_text(json.dumps(payload, indent=1, sort_keys=True))
        return path

    def latest(self) -> dict | None:
        return self.entries[-1] if self.entries else None


def resume_state(directory, basis) -> StateVector | None:
    """Rebuild the most recent persisted snapshot, or None if none exists."""
    directory = Path(directory)
    manifest_path = directory / "snapshots.json"
    if not manifest_path.exists():
        return None
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("basis_hash") != basis.basis_hash():
        raise ValueError("snapshot directory belongs to another basis")
    snaps = manifest.get("snapshots", [])
    if not snaps:
        return None
    last = snaps[-1]
    data = np.load(directory / last["file"])
    return StateVector(basis, data, float(last["time"]))
