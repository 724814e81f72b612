"""Exact 4x4 spinor algebra: gamma matrices, dispersion matrix, eigensystem,
band projectors, scattering weights, and the anticommutator cancellation
constants.

The gamma matrices are built in the chiral (Weyl) representation

    gamma^0 = [[0, I2], [I2, 0]],   gamma^k = [[0, sigma_k], [-sigma_k, 0]],

which is the representation in which the closed-form eigenvectors of the
dispersion matrix used throughout this package are exact.  Every entry is one
of 0, +-1, +-i, so all gamma identities hold in exact (Gaussian-integer)
arithmetic.  Nothing downstream depends on the entries, only on the
anticommutation relations.

Index convention: ``k = 0..3`` labels the four potential components; the
product ``gamma^0 gamma^0 = I4`` plays the role of the k = 0 coupling matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_I2 = np.eye(2, dtype=complex)
_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_Z2 = np.zeros((2, 2), dtype=complex)

I4 = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class PhysicalConstants:
    """Rest mass, speed of light, unit charge.  Requires m0*c > 0 strictly,
    which keeps the eigenvector denominators sqrt(2*lam*(lam - xi3)) away
    from zero."""

    m0: float = 1.0
    c: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        if not (self.m0 * self.c > 0):
            raise ValueError(f"m0*c must be strictly positive, got {self.m0 * self.c}")

    @property
    def mc(self) -> float:
        return self.m0 * self.c


@dataclass(frozen=True)
class GammaSet:
    """The four Dirac matrices plus the precomputed products gamma^0 gamma^k.

    ``g0gk[0]`` is the identity (the scalar-potential coupling); ``g0gk[k]``
    for k = 1..3 are the Hermitian magnetic couplings.
    """

    gamma: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    g0gk: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def build_gamma_set() -> GammaSet:
    """Construct the gamma matrices (chiral representation) exactly."""
    g0 = np.block([[_Z2, _I2], [_I2, _Z2]])
    gk = tuple(np.block([[_Z2, s], [-s, _Z2]]) for s in _SIGMA)
    gamma = (g0,) + gk
    g0gk = (I4.copy(),) + tuple(g0 @ g for g in gk)
    for m in gamma + g0gk:
        m.setflags(write=False)
    return GammaSet(gamma=gamma, g0gk=g0gk)


GAMMA = build_gamma_set()


def _as_xi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 3:
        raise ValueError("momentum must have 3 components on the last axis")
    return xi


def lambda_plus(xi, consts: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Positive band energy sqrt(m0^2 c^2 + |xi|^2).  Batched over leading axes."""
    xi = _as_xi(xi)
    return np.sqrt(consts.mc**2 + np.sum(xi * xi, axis=-1))


def dispersion_matrix(xi, consts: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Hermitian dispersion matrix Q(xi) = sum_k gamma^0 gamma^k xi_k + m0 c gamma^0.

    Accepts a single 3-vector or an arbitrary batch (..., 3) and returns
    (..., 4, 4).
    """
    xi = _as_xi(xi)
    out = np.tensordot(xi[..., 0], GAMMA.g0gk[1], axes=0)
    out = out + np.tensordot(xi[..., 1], GAMMA.g0gk[2], axes=0)
    out = out + np.tensordot(xi[..., 2], GAMMA.g0gk[3], axes=0)
    out = out + consts.mc * GAMMA.gamma[0]
    return out


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-decomposition of Q(xi) at one momentum point.

    x1, x2 span the electron band (lambda_plus); y1, y2 the positron band
    (lambda_minus = -lambda_plus).  pi_plus/pi_minus are the orthogonal band
    projectors 0.5*(I4 +- Q/lambda_plus).
    """

    xi: np.ndarray
    lambda_plus: float
    lambda_minus: float
    x1: np.ndarray
    x2: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    pi_plus: np.ndarray
    pi_minus: np.ndarray

    @property
    def basis(self) -> np.ndarray:
        """4x4 unitary with columns (x1, x2, y1, y2)."""
        return np.stack([self.x1, self.x2, self.y1, self.y2], axis=-1)


def eigenbasis(xi, consts: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Batched closed-form eigenvectors of Q(xi).

    Returns (..., 4, 4) unitaries whose columns are (x1, x2, y1, y2).  The
    formulas stay finite for every xi because lambda_plus > |xi3| whenever
    m0*c > 0 (in particular on the xi1 = xi2 = 0 line).
    """
    xi = _as_xi(xi)
    if not (consts.mc > 0):
        raise ValueError("eigenbasis requires m0*c > 0")
    mc = consts.mc
    lam = lambda_plus(xi, consts)
    x1c, x2c, x3c = xi[..., 0], xi[..., 1], xi[..., 2]
    # lam - xi3, evaluated without cancellation when xi3 > 0
    lam_m_x3 = np.where(x3c > 0,
                        (mc**2 + x1c**2 + x2c**2) / (lam + x3c),
                        lam - x3c)
    den = np.sqrt(2 * lam * lam_m_x3)
    a = mc / den
    b = (x1c - 1j * x2c) / den
    bb = (x1c + 1j * x2c) / den
    g = np.sqrt(lam_m_x3 / (2 * lam))
    zero = np.zeros_like(a)

    X1 = np.stack([zero, a, b, g + 0j], axis=-1)
    X2 = np.stack([g + 0j, -bb, a + 0j, zero], axis=-1)
    Y1 = np.stack([a + 0j, zero, -g + 0j, bb], axis=-1)
    Y2 = np.stack([b, g + 0j, zero, -a + 0j], axis=-1)
    return np.stack([X1, X2, Y1, Y2], axis=-1)


def eigensystem(xi, consts: PhysicalConstants = PhysicalConstants()) -> EigenSystem:
    """Full eigensystem of Q(xi) at a single momentum point."""
    xi = _as_xi(xi)
    if xi.ndim != 1:
        raise ValueError("eigensystem takes a single momentum point; use eigenbasis for batches")
    B = eigenbasis(xi, consts)
    lam = float(lambda_plus(xi, consts))
    q = dispersion_matrix(xi, consts)
    pi_plus = 0.5 * (I4 + q / lam)
    pi_minus = 0.5 * (I4 - q / lam)
    return EigenSystem(
        xi=xi, lambda_plus=lam, lambda_minus=-lam,
        x1=B[:, 0], x2=B[:, 1], y1=B[:, 2], y2=B[:, 3],
        pi_plus=pi_plus, pi_minus=pi_minus,
    )


def projectors(xi, consts: PhysicalConstants = PhysicalConstants()) -> tuple[np.ndarray, np.ndarray]:
    """Batched band projectors (pi_plus, pi_minus) with shape (..., 4, 4)."""
    q = dispersion_matrix(xi, consts)
    lam = lambda_plus(xi, consts)[..., None, None]
    pi_plus = 0.5 * (I4 + q / lam)
    return pi_plus, I4 - pi_plus


@dataclass(frozen=True)
class ScatteringWeights:
    """Intra-band weights omega_k and inter-band weights omega_tilde_k.

    omega_k + omega_tilde_k = 1, each lies in [0, 1], and both are symmetric
    under exchange of the two momenta.
    """

    omega: np.ndarray
    omega_tilde: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.omega_tilde is None:
            object.__setattr__(self, "omega_tilde", 1.0 - self.omega)


def scattering_weights(xi, q, consts: PhysicalConstants = PhysicalConstants()) -> ScatteringWeights:
    """Closed-form weights for momenta xi -> q.

    Batched: xi and q may carry broadcastable leading axes; ``omega`` then has
    shape (4, ...) indexed by the component k first.
    """
    xi = _as_xi(xi)
    q = _as_xi(q)
    if not (consts.mc > 0):
        raise ValueError("scattering_weights requires m0*c > 0")
    m2 = consts.mc**2
    lx = lambda_plus(xi, consts)
    lq = lambda_plus(q, consts)
    denom = 2 * lq * lx
    p11 = xi[..., 0] * q[..., 0]
    p22 = xi[..., 1] * q[..., 1]
    p33 = xi[..., 2] * q[..., 2]
    w0 = (lq * lx + p11 + p22 + p33 + m2) / denom
    w1 = (lq * lx + p11 - p22 - p33 - m2) / denom
    w2 = (lq * lx - p11 + p22 - p33 - m2) / denom
    w3 = (lq * lx - p11 - p22 + p33 - m2) / denom
    return ScatteringWeights(omega=np.stack([w0, w1, w2, w3]))


def scattering_weights_trace(xi, q, consts: PhysicalConstants = PhysicalConstants()) -> ScatteringWeights:
    """Independent oracle for the weights via projector traces:

        omega_k       = 0.5 Tr(Pi+(xi) g0g^k Pi+(q) g0g^k)
        omega_tilde_k = 0.5 Tr(Pi+(xi) g0g^k Pi-(q) g0g^k)

    Used to cross-check the closed forms; do not use in hot loops.
    """
    pp_xi, _ = projectors(xi, consts)
    pp_q, pm_q = projectors(q, consts)
    w = []
    wt = []
    for k in range(4):
        a = GAMMA.g0gk[k]
        w.append(0.5 * np.trace(pp_xi @ a @ pp_q @ a, axis1=-2, axis2=-1).real)
        wt.append(0.5 * np.trace(pp_xi @ a @ pm_q @ a, axis1=-2, axis2=-1).real)
    return ScatteringWeights(omega=np.stack(w), omega_tilde=np.stack(wt))


def cancellation_constant(k: int, xi, q, consts: PhysicalConstants = PhysicalConstants()) -> float:
    """Scalar c_k with

        g0g^k Q(xi) g0g^k Q(q) + Q(q) g0g^k Q(xi) g0g^k = c_k I4.

    Closed form: c_0 = 2(xi.q + m0^2 c^2) and, for k = 1..3,
    c_k = 2(2 xi_k q_k - xi.q - m0^2 c^2).
    """
    if k not in (0, 1, 2, 3):
        raise ValueError("component index k must be in 0..3")
    xi = _as_xi(xi)
    q = _as_xi(q)
    dot = np.sum(xi * q, axis=-1)
    m2 = consts.mc**2
    if k == 0:
        return 2 * (dot + m2)
    return 2 * (2 * xi[..., k - 1] * q[..., k - 1] - dot - m2)


def cancellation_anticommutator(k: int, xi, q, consts: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """The dense anticommutator matrix of the cancellation identity (oracle side)."""
    a = GAMMA.g0gk[k]
    qx = dispersion_matrix(xi, consts)
    qq = dispersion_matrix(q, consts)
    return a @ qx @ a @ qq + qq @ a @ qx @ a
