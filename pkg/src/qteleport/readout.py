"""Phenomenological single-shot dispersive readout.

Every prepared label produces a Gaussian cluster in the IQ plane. An excited
qubit may relax during the integration window; the integrated signal is then
the time average of the cluster means visited, so decays smear a cluster
toward the ground-state cluster.

Two discriminators exist:

``phase_sensitive``
    Only the real quadrature carries signal and noise. A threshold separates
    the ground label from everything else; the remaining labels are split by
    nearest mean and are low-confidence.
``phase_preserving``
    Both quadratures are used. After shifting by ``center`` and rotating by
    ``-angle`` the plane is cut into quadrants, one per two-qubit label.

Fidelity conventions: a two-class discrimination (Q3, or 00 against the rest)
is scored as ``P(A|A) + P(B|B) - 1``; the four-way discriminator is scored
as the mean probability of identifying a prepared label correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .linalg import DensityMatrix, DomainError, ket, projector

PHASE_SENSITIVE = "phase_sensitive"
PHASE_PRESERVING = "phase_preserving"
MODES = (PHASE_SENSITIVE, PHASE_PRESERVING)

INTEGRATION_TIME = 250e-9

# Real-axis positions (arbitrary units) of the 00, 01, 10, 11 clusters for the
# phase-sensitive joint readout; 00 and 01 are the most separated pair.
JOINT_SENSITIVE_POSITIONS = (0.0, 1.0, 0.6, 0.8)
QUADRANT_MEANS = (-1 - 1j, 1 - 1j, -1 + 1j, 1 + 1j)
SINGLE_POSITIONS = (0.0, 1.0)

_GL_NODES = 48


def _phi(x):
    return special.ndtr(x)


@dataclass(frozen=True)
class DiscriminatorModel:
    mode: str
    labels: tuple
    means: tuple
    sigma: float
    threshold: float | None = None
    center: complex = 0j
    angle: float = 0.0
    integration_time: float = INTEGRATION_TIME

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        labels = tuple(str(x) for x in self.labels)
        if list(labels) != sorted(labels) or len(set(labels)) != len(labels):
            raise DomainError("labels must be distinct and sorted")
        nb = len(labels[0])
        if labels != tuple(format(i, f"0{nb}b") for i in range(2**nb)):
            raise DomainError(f"labels must enumerate all {nb}-bit strings")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "means", tuple(complex(m) for m in self.means))
        if len(self.means) != len(labels):
            raise DomainError("one mean per label is required")
        if not self.sigma >= 0:
            raise DomainError("sigma must be non-negative")
        if self.mode == PHASE_SENSITIVE:
            if self.threshold is None:
                raise DomainError("phase_sensitive model needs a threshold")
            pos = np.real(self.means)
            if len(set(pos[1:])) != len(pos) - 1:
                raise DomainError("excited-label clusters need distinct real positions")
        elif len(labels) != 4:
            raise DomainError("phase_preserving discrimination is defined for two-qubit labels")
        if self.integration_time <= 0:
            raise DomainError("integration_time must be positive")

    @property
    def num_bits(self) -> int:
        return len(self.labels[0])

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown label {label!r}") from None

    def to_dict(self) -> dict:
        d = {
            "mode": self.mode,
            "labels": list(self.labels),
            "means": [[m.real, m.imag] for m in self.means],
            "sigma": self.sigma,
            "integration_time": self.integration_time,
        }
        if self.mode == PHASE_SENSITIVE:
            d["threshold"] = self.threshold
        else:
            d["center"] = [self.center.real, self.center.imag]
            d["angle"] = self.angle
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DiscriminatorModel":
        kw = dict(d)
        kw["means"] = tuple(complex(re, im) for re, im in kw["means"])
        kw["labels"] = tuple(kw["labels"])
        if "center" in kw:
            kw["center"] = complex(*kw["center"])
        return cls(**kw)


# ---------------------------------------------------------------------------
# discrimination
# ---------------------------------------------------------------------------


def _sensitive_indices(x: np.ndarray, model: DiscriminatorModel) -> np.ndarray:
    pos = np.real(model.means)
    out = np.zeros(x.shape, dtype=np.int64)
    excited = x > model.threshold
    if len(pos) > 1 and excited.any():
        # argmin keeps the first of equal distances, i.e. the lower label
        dist = np.abs(x[excited, None] - pos[None, 1:])
        out[excited] = 1 + np.argmin(dist, axis=1)
    return out


# (u > 0, v > 0) -> label index; 00 at (-,-), 01 at (+,-), 10 at (-,+), 11 at (+,+)
_QUADRANT = np.array([[0, 2], [1, 3]])


def normalized_coordinates(samples: np.ndarray, model: DiscriminatorModel) -> tuple[np.ndarray, np.ndarray]:
    w = (np.asarray(samples, dtype=complex) - model.center) * np.exp(-1j * model.angle)
    return w.real, w.imag


def _preserving_indices(samples: np.ndarray, model: DiscriminatorModel) -> np.ndarray:
    u, v = normalized_coordinates(samples, model)
    bu, bv = (u > 0).astype(int), (v > 0).astype(int)
    idx = _QUADRANT[bu, bv]
    # samples on a boundary line go to the lower of the adjacent labels
    on_u, on_v = u == 0, v == 0
    idx = np.where(on_u, np.minimum(_QUADRANT[0, bv], _QUADRANT[1, bv]), idx)
    idx = np.where(on_v, np.minimum(_QUADRANT[bu, 0], _QUADRANT[bu, 1]), idx)
    idx = np.where(on_u & on_v, 0, idx)
    return idx


def discriminate_indices(samples, model: DiscriminatorModel) -> np.ndarray:
    samples = np.asarray(samples, dtype=complex)
    if model.mode == PHASE_SENSITIVE:
        return _sensitive_indices(samples.real, model)
    return _preserving_indices(samples, model)


def discriminate(sample, model: DiscriminatorModel):
    """Assigned label for a sample (or an array of labels for an array of samples)."""
    idx = discriminate_indices(np.atleast_1d(sample), model)
    labels = np.array(model.labels)[idx]
    return str(labels[0]) if np.ndim(sample) == 0 else labels


def is_low_confidence(label: str, model: DiscriminatorModel) -> bool:
    """Excited sub-labels of the phase-sensitive joint readout are not resolved reliably."""
    return model.mode == PHASE_SENSITIVE and model.num_bits > 1 and label != model.labels[0]


# ---------------------------------------------------------------------------
# decay during the integration window
# ---------------------------------------------------------------------------


def window_mean(decay_times, model: DiscriminatorModel) -> np.ndarray:
    """Time-averaged cluster mean for given per-bit decay times.

    ``decay_times`` has shape (..., num_bits) and holds, for each bit, the
    time it stays excited within the window: 0 for a ground bit, the
    integration time for a bit that survives.
    """
    tau = np.asarray(decay_times, dtype=float)
    nb = model.num_bits
    T = model.integration_time
    means = np.asarray(model.means)
    weights = 2 ** np.arange(nb - 1, -1, -1)
    starts = np.concatenate([np.zeros(tau.shape[:-1] + (1,)), np.sort(tau, axis=-1)], axis=-1)
    ends = np.concatenate([np.sort(tau, axis=-1), np.full(tau.shape[:-1] + (1,), T)], axis=-1)
    total = np.zeros(tau.shape[:-1], dtype=complex)
    for j in range(nb + 1):
        s = starts[..., j]
        excited = tau > s[..., None]
        idx = (excited * weights).sum(axis=-1)
        total = total + (ends[..., j] - s) * means[idx]
    return total / T


def excited_bits(label_idx: np.ndarray, num_bits: int) -> np.ndarray:
    label_idx = np.asarray(label_idx)
    shifts = np.arange(num_bits - 1, -1, -1)
    return (label_idx[..., None] >> shifts) & 1


def decay_times_from_uniforms(label_idx, uniforms, t1s: Sequence[float] | None, model: DiscriminatorModel) -> np.ndarray:
    """Per-bit excited durations from uniforms in (0, 1); ``t1s=None`` disables decay."""
    bits = excited_bits(label_idx, model.num_bits)
    T = model.integration_time
    if t1s is None:
        return bits * T
    t1 = np.asarray(t1s, dtype=float)
    with np.errstate(divide="ignore"):
        tau = -t1 * np.log(np.asarray(uniforms))
    return bits * np.minimum(tau, T)


def samples_from_uniforms(label_idx, decay_uniforms, normals, model: DiscriminatorModel, t1s=None) -> np.ndarray:
    """Integrated IQ samples from pre-drawn randomness.

    ``decay_uniforms`` has shape (N, num_bits); ``normals`` has shape (N, 2).
    """
    label_idx = np.asarray(label_idx)
    tau = decay_times_from_uniforms(label_idx, decay_uniforms, t1s, model)
    mu = window_mean(tau, model)
    z = np.asarray(normals, dtype=float)
    if model.mode == PHASE_SENSITIVE:
        return mu + model.sigma * z[..., 0]
    return mu + model.sigma * (z[..., 0] + 1j * z[..., 1])


def sample_readout(true_label, model: DiscriminatorModel, qubit_t1s=None, rng=None, size=None):
    """Draw integrated readout samples for a prepared label.

    ``qubit_t1s`` lists one T1 per label bit (``None`` for no decay).
    Returns a complex scalar when ``size`` is None.
    """
    rng = np.random.default_rng() if rng is None else rng
    n = 1 if size is None else int(size)
    idx = np.full(n, model.index(true_label))
    u = 1.0 - rng.random((n, model.num_bits))  # in (0, 1]
    z = rng.standard_normal((n, 2))
    s = samples_from_uniforms(idx, u, z, model, qubit_t1s)
    return complex(s[0]) if size is None else s


# ---------------------------------------------------------------------------
# analytic assignment probabilities
# ---------------------------------------------------------------------------


def region_probabilities(mu: np.ndarray, model: DiscriminatorModel) -> np.ndarray:
    """P(assigned label | cluster centred at ``mu``) for Gaussian noise, shape (..., L)."""
    if not model.sigma > 0:
        raise DomainError("analytic probabilities need sigma > 0")
    mu = np.asarray(mu, dtype=complex)
    s = model.sigma
    L = len(model.labels)
    if model.mode == PHASE_SENSITIVE:
        x = mu.real[..., None]
        pos = np.real(model.means)
        edges_lo = np.empty(L)
        edges_hi = np.empty(L)
        edges_lo[0], edges_hi[0] = -np.inf, model.threshold
        others = np.arange(1, L)
        order = others[np.argsort(pos[1:], kind="stable")]
        p_sorted = pos[order]
        mids = 0.5 * (p_sorted[1:] + p_sorted[:-1])
        lo = np.concatenate([[-np.inf], mids])
        hi = np.concatenate([mids, [np.inf]])
        edges_lo[order] = np.maximum(lo, model.threshold)
        edges_hi[order] = np.maximum(hi, model.threshold)
        return np.clip(_phi((edges_hi - x) / s) - _phi((edges_lo - x) / s), 0.0, 1.0)
    u, v = normalized_coordinates(mu, model)
    pu = np.stack([_phi(-u / s), _phi(u / s)], axis=-1)  # P(u<0), P(u>0)
    pv = np.stack([_phi(-v / s), _phi(v / s)], axis=-1)
    out = np.empty(mu.shape + (4,))
    for bu in (0, 1):
        for bv in (0, 1):
            out[..., _QUADRANT[bu, bv]] = pu[..., bu] * pv[..., bv]
    return out


def _gauss_legendre(a: float, b: float, n: int = _GL_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def decay_quadrature(label_idx: int, t1s, model: DiscriminatorModel, n: int = _GL_NODES):
    """Quadrature points (excited durations) and weights for one prepared label.

    The weights integrate exactly over the exponential decay-time densities,
    including the atoms of surviving qubits; the two-decay square is split
    along its diagonal so each piece is smooth.
    """
    nb = model.num_bits
    T = model.integration_time
    bits = excited_bits(np.array(label_idx), nb)
    exc = [k for k in range(nb) if bits[k]]
    base = np.zeros(nb)
    if t1s is None or not exc:
        base[exc] = T
        return base[None, :], np.ones(1)
    t1 = np.asarray(t1s, dtype=float)

    def dens(k, t):
        return np.exp(-t / t1[k]) / t1[k]

    def surv(k):
        return math.exp(-T / t1[k])

    pts, wts = [], []
    x, w = _gauss_legendre(0.0, T, n)
    if len(exc) == 1:
        (k,) = exc
        for tk, wk in [(np.array([T]), np.array([surv(k)])), (x, w * dens(k, x))]:
            p = np.tile(base, (len(tk), 1))
            p[:, k] = tk
            pts.append(p)
            wts.append(wk)
    elif len(exc) == 2:
        a, b = exc
        p = base.copy()
        p[[a, b]] = T
        pts.append(p[None, :])
        wts.append(np.array([surv(a) * surv(b)]))
        for k, other in ((a, b), (b, a)):
            p = np.tile(base, (n, 1))
            p[:, k] = x
            p[:, other] = T
            pts.append(p)
            wts.append(w * dens(k, x) * surv(other))
        # both decay inside the window: first decayer k at t_first < t_second
        xs, ws = np.polynomial.legendre.leggauss(n)
        s = 0.5 * (xs + 1)
        ws = 0.5 * ws
        ss, tt = np.meshgrid(s, s, indexing="ij")
        wss, wtt = np.meshgrid(ws, ws, indexing="ij")
        t_second = (T * ss).ravel()
        t_first = (t_second * tt.ravel())
        jac = (T * T * ss).ravel() * (wss * wtt).ravel()
        for first, second in ((a, b), (b, a)):
            p = np.tile(base, (len(t_first), 1))
            p[:, first] = t_first
            p[:, second] = t_second
            pts.append(p)
            wts.append(jac * dens(first, t_first) * dens(second, t_second))
    else:
        raise DomainError("decay quadrature supports at most two excited qubits")
    return np.concatenate(pts), np.concatenate(wts)


def assignment_row(true_label: "str | int", model: DiscriminatorModel, t1s=None) -> np.ndarray:
    """Analytic P(assigned | prepared) including decay during integration."""
    idx = model.index(true_label) if isinstance(true_label, str) else int(true_label)
    pts, wts = decay_quadrature(idx, t1s, model)
    mu = window_mean(pts, model)
    return wts @ region_probabilities(mu, model)


def confusion_matrix(model: DiscriminatorModel, t1s=None) -> np.ndarray:
    """Rows: prepared label; columns: assigned label."""
    return np.array([assignment_row(i, model, t1s) for i in range(len(model.labels))])


def binary_fidelity(confusion: np.ndarray) -> float:
    """P(ground|ground) + P(rest|rest) - 1, averaging the rest over prepared labels."""
    c = np.asarray(confusion)
    p_gg = c[0, 0]
    p_rest = np.mean(1.0 - c[1:, 0])
    return float(p_gg + p_rest - 1.0)


def four_way_fidelity(confusion: np.ndarray) -> float:
    return float(np.mean(np.diag(confusion)))


def assignment_fidelity(model: DiscriminatorModel, t1s=None, confusion: np.ndarray | None = None) -> float:
    """Fidelity in the convention matching the model's mode (see module docstring)."""
    c = confusion_matrix(model, t1s) if confusion is None else confusion
    if model.mode == PHASE_PRESERVING:
        return four_way_fidelity(c)
    return binary_fidelity(c)


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------


def _base_model(mode: str, num_bits: int, integration_time: float) -> DiscriminatorModel:
    labels = tuple(format(i, f"0{num_bits}b") for i in range(2**num_bits))
    if mode == PHASE_PRESERVING:
        if num_bits != 2:
            raise DomainError("phase_preserving calibration needs two-qubit labels")
        return DiscriminatorModel(mode, labels, QUADRANT_MEANS, 1.0, integration_time=integration_time)
    pos = JOINT_SENSITIVE_POSITIONS if num_bits == 2 else SINGLE_POSITIONS
    if num_bits not in (1, 2):
        raise DomainError("phase_sensitive calibration supports one or two qubits")
    return DiscriminatorModel(mode, labels, pos, 1.0, threshold=0.5 * min(pos[1:]), integration_time=integration_time)


def perfect_discriminator(mode: str, num_bits: int = 2, integration_time: float = INTEGRATION_TIME) -> DiscriminatorModel:
    """Noise-free model with the default cluster geometry."""
    return replace(_base_model(mode, num_bits, integration_time), sigma=0.0)


def _best_threshold(model: DiscriminatorModel, t1s) -> DiscriminatorModel:
    pos = np.real(model.means)
    lo, hi = pos[0], min(pos[1:])
    res = optimize.minimize_scalar(
        lambda t: -assignment_fidelity(replace(model, threshold=t), t1s),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-9 * (hi - lo)},
    )
    return replace(model, threshold=float(res.x))


def _model_at(base: DiscriminatorModel, sigma: float, t1s, optimize_threshold: bool) -> DiscriminatorModel:
    m = replace(base, sigma=sigma)
    if m.mode == PHASE_SENSITIVE and optimize_threshold:
        m = _best_threshold(m, t1s)
    return m


def calibrate_discriminator(
    target_fidelity: float,
    mode: str,
    num_bits: int = 2,
    t1s: Sequence[float] | None = None,
    integration_time: float = INTEGRATION_TIME,
    optimize_threshold: bool = True,
) -> DiscriminatorModel:
    """Cluster width that makes the analytic assignment fidelity hit ``target_fidelity``.

    Cluster positions are fixed in arbitrary units and the noise width is
    solved by root finding. With ``t1s`` the fidelity includes decay during
    the integration window. For phase-sensitive readout the threshold is
    re-optimised at every trial width.
    """
    if not 0.5 < target_fidelity < 1:
        raise DomainError("target fidelity must lie in (0.5, 1)")
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    if t1s is not None and len(t1s) != num_bits:
        raise DomainError(f"need {num_bits} T1 values, got {len(t1s)}")
    base = _base_model(mode, num_bits, integration_time)

    def gap(log_sigma):
        m = _model_at(base, math.exp(log_sigma), t1s, optimize_threshold)
        return assignment_fidelity(m, t1s) - target_fidelity

    lo, hi = math.log(1e-4), math.log(1e2)
    if gap(lo) < 0:
        best = gap(lo) + target_fidelity
        raise DomainError(f"target {target_fidelity} unreachable; best attainable fidelity {best:.4f}")
    if gap(hi) > 0:
        raise DomainError(f"target {target_fidelity} below the attainable range")
    log_sigma = optimize.brentq(gap, lo, hi, xtol=1e-13, rtol=1e-12)
    return _model_at(base, math.exp(log_sigma), t1s, optimize_threshold)


def symmetric_separation(target_fidelity: float, convention: str = "binary") -> float:
    """Half-separation over sigma for two equal-width clusters split at the midpoint.

    ``binary``: 2 Phi(x) - 1 = F; ``fraction``: Phi(x) = F.
    """
    if convention == "binary":
        return float(special.ndtri((1 + target_fidelity) / 2))
    if convention == "fraction":
        return float(special.ndtri(target_fidelity))
    raise DomainError(f"unknown convention {convention!r}")


def monte_carlo_confusion(model: DiscriminatorModel, t1s=None, shots: int = 10**6, rng=None) -> np.ndarray:
    rng = np.random.default_rng(0) if rng is None else rng
    L = len(model.labels)
    c = np.zeros((L, L))
    for i, label in enumerate(model.labels):
        s = sample_readout(label, model, t1s, rng, size=shots)
        c[i] = np.bincount(discriminate_indices(s, model), minlength=L) / shots
    return c


# ---------------------------------------------------------------------------
# thermal initialisation and Q3
# ---------------------------------------------------------------------------


def excitation_probability_for_discard(rate: float, num_qubits: int = 3) -> float:
    """Per-qubit thermal population p with 1 - (1 - p)^n = rate."""
    if not 0 <= rate < 1:
        raise DomainError("discard rate must lie in [0, 1)")
    return 1.0 - (1.0 - rate) ** (1.0 / num_qubits)


def false_reject_for_discard(rate: float, excitation_prob: float, num_qubits: int = 3) -> float:
    """Extra rejection of ground-state runs lifting the discard fraction to ``rate``."""
    clean = (1 - excitation_prob) ** num_qubits
    excited = 1 - clean
    if rate < excited:
        raise DomainError(f"discard rate {rate} below the thermal floor {excited:.4f}")
    return (rate - excited) / clean


def thermal_flags(uniforms: np.ndarray, excitation_probs, false_reject: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised initialisation check.

    ``uniforms`` has shape (N, num_qubits + 1); the last column drives the
    false rejection. Returns ``(init_ok, excited_bits)``.
    """
    u = np.asarray(uniforms)
    p = np.asarray(excitation_probs, dtype=float)
    excited = u[:, : len(p)] < p
    ok = ~excited.any(axis=1) & (u[:, len(p)] >= false_reject)
    return ok, excited


def thermal_init_filter(rng, per_qubit_excitation_prob, false_reject: float = 0.0) -> tuple[bool, DensityMatrix]:
    """One initialisation draw: (init_ok, initial register state)."""
    p = np.broadcast_to(np.asarray(per_qubit_excitation_prob, dtype=float), (3,))
    if np.any((p < 0) | (p >= 1)):
        raise DomainError("excitation probabilities must lie in [0, 1)")
    ok, excited = thermal_flags(rng.random((1, 4)), p, false_reject)
    label = "".join("1" if e else "0" for e in excited[0])
    return bool(ok[0]), DensityMatrix(projector(ket(label)))


def readout_q3(true_bit: int, model_q3: DiscriminatorModel, rng, t1: float | None = None) -> int:
    t1s = None if t1 is None else (t1,)
    s = sample_readout(str(int(true_bit)), model_q3, t1s, rng)
    return int(discriminate(s, model_q3))


# ---------------------------------------------------------------------------
# records and histograms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShotRecord:
    init_ok: bool
    bell_outcome: str | None
    iq_q1q2: complex
    tomography_setting: str
    q3_outcome: int
    rng_seed_path: str

    def __post_init__(self):
        if self.init_ok != (self.bell_outcome is not None):
            raise DomainError("bell_outcome must be present exactly when init_ok")


HISTOGRAM_HEADER = "# label,bin_center_I,bin_center_Q,count"


def histogram_rows(samples, labels, bins: int = 60, quadratures: int = 2, value_range=None) -> list[tuple]:
    """(label, I centre, Q centre, count) rows of per-label 2D histograms.

    All labels share one binning so histograms overlay like in a readout plot.
    With ``quadratures=1`` a single Q bin centred on zero is used.
    """
    samples = np.asarray(samples, dtype=complex)
    labels = np.asarray(labels)
    if value_range is None:
        value_range = (
            (samples.real.min(), samples.real.max()),
            (samples.imag.min(), samples.imag.max()) if quadratures == 2 else (-0.5, 0.5),
        )
    rows = []
    q_bins = bins if quadratures == 2 else 1
    for label in sorted(set(labels.tolist())):
        sel = samples[labels == label]
        q = sel.imag if quadratures == 2 else np.zeros(len(sel))
        h, ei, eq = np.histogram2d(sel.real, q, bins=(bins, q_bins), range=value_range)
        ci, cq = 0.5 * (ei[1:] + ei[:-1]), 0.5 * (eq[1:] + eq[:-1])
        for a in range(bins):
            for b in range(q_bins):
                rows.append((str(label), float(ci[a]), float(cq[b]), int(h[a, b])))
    return rows


def write_histogram(path, rows) -> None:
    with open(path, "w") as fh:
        fh.write(HISTOGRAM_HEADER + "\n")
        for label, i, q, n in rows:
            fh.write(f"{label},{i:.6e},{q:.6e},{n}\n")


def read_histogram(path) -> list[tuple]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != HISTOGRAM_HEADER:
            raise DomainError(f"unexpected histogram header {header!r}")
        for line in fh:
            label, i, q, n = line.strip().split(",")
            rows.append((label, float(i), float(q), int(n)))
    return rows
