"""Gauss-Hermite quadrature and the Hermite-function spectral basis on a 2D tensor grid.

The basis functions are the eigenfunctions of ``-1/2 Laplacian + 1/2 gamma^2 |x|^2``::

    h_n(z) = (gamma/pi)^(1/4) / sqrt(2^n n!) * exp(-gamma z^2 / 2) * H_n(sqrt(gamma) z)
    h_{k,l}(x, y) = h_k(x) h_l(y),     eigenvalue mu_{k,l} = gamma (k + l + 1)

The polynomial argument is ``sqrt(gamma) z``. This is the only choice for which the
family is orthonormal (and for which ``G @ E == I`` holds on the scaled grid) when
``gamma != 1``; for ``gamma == 1`` all common conventions coincide.

Grid fields are ``(M+1, M+1)`` complex arrays with ``field[r, s] = psi(z_r, z_s)``;
spectral fields are ``(M+1, M+1)`` arrays of coefficients ``a[k, l]``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from math import pi, sqrt

import mpmath
import numpy as np

__all__ = [
    "QuadratureRule",
    "SpectralBasis",
    "build_rule",
    "build_basis",
    "hermite_functions",
    "eval_hermite_function",
    "basis_function",
    "forward",
    "inverse",
    "mass_norm",
    "quartic_integral",
    "hamiltonian",
    "chemical_potential",
]

_NEWTON_MAXITER = 100
_EXTENDED_DPS = 30
# mpmath's default context is global state; propagators are built in a private one.
_MP_LOCK = threading.Lock()


@dataclass(frozen=True)
class QuadratureRule:
    """Scaled Gauss-Hermite rule with ``M + 1`` nodes for trap frequency ``gamma``.

    ``weights`` are function-space weights: ``sum(w * f(z))`` approximates
    ``integral f(z) dz`` and is exact for ``f = p(z) exp(-gamma z^2)`` with
    ``deg p <= 2M + 1``.
    """

    gamma: float
    M: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Hermite-function basis of ``H_{M,2}`` sampled on the tensor quadrature grid.

    Attributes
    ----------
    rule : QuadratureRule
    E : ndarray, shape (M+1, M+1)
        Evaluation table, ``E[r, k] = h_k(z_r)``.
    G : ndarray, shape (M+1, M+1)
        Transform matrix, ``G[k, r] = h_k(z_r) w_r``; real, so ``G* = G.T``.
    mu : ndarray, shape (M+1, M+1)
        Eigenvalues ``gamma (k + l + 1)``.
    """

    rule: QuadratureRule
    E: np.ndarray
    G: np.ndarray
    mu: np.ndarray
    _propagators: dict = field(default_factory=dict, repr=False)

    @property
    def gamma(self) -> float:
        return self.rule.gamma

    @property
    def M(self) -> int:
        return self.rule.M

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M + 1, self.M + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` with ``X[r, s] = z_r`` and ``Y[r, s] = z_s``."""
        return np.meshgrid(self.nodes, self.nodes, indexing="ij")

    def propagator(self, tau: float, imaginary: bool) -> np.ndarray:
        """Symmetric factor ``B`` of the exact linear propagator over a step ``tau``.

        With ``U[r, k] = h_k(z_r) sqrt(w_r)`` (an orthogonal matrix) and
        ``S = sqrt(w_r w_s)``, the map ``inverse(exp(-s mu tau) * forward(psi))``
        equals ``(B @ (S * psi) @ B.T) / S`` where
        ``B = U @ diag(exp(-s gamma (k + 1/2) tau)) @ U.T`` and ``s`` is 1 or i.
        ``B`` is formed in extended precision and rounded once. The dissipative
        factor is returned in double. The unitary factor is returned as
        ``clongdouble``: a unitary ``B`` rounded to double is off by one ulp in a
        fixed direction, and that bias accumulates linearly in the mass over
        long runs. Cached per ``(tau, imaginary)``.
        """
        key = (float(tau), bool(imaginary))
        B = self._propagators.get(key)
        if B is None:
            with _MP_LOCK:
                B = self._propagators.get(key)
                if B is None:
                    B = _extended_propagator(self, float(tau), bool(imaginary))
                    B.setflags(write=False)
                    self._propagators[key] = B
        return B

    def sqrt_weights(self, dtype=float) -> np.ndarray:
        """``S[r, s] = sqrt(w_r w_s)`` in the requested float type."""
        key = ("sqrt_weights", np.dtype(dtype).str)
        S = self._propagators.get(key)
        if S is None:
            s = np.sqrt(self.weights.astype(dtype))
            S = self._propagators[key] = np.outer(s, s)
            S.setflags(write=False)
        return S


def _check_shape(basis: SpectralBasis, arr: np.ndarray, what: str) -> None:
    if np.shape(arr) != basis.shape:
        raise ValueError(f"{what} has shape {np.shape(arr)}, basis expects {basis.shape}")


def hermite_functions(n_max: int, gamma: float, z) -> np.ndarray:
    """Table ``T[n, ...] = h_n(z)`` for ``0 <= n <= n_max``.

    Uses the three-term recurrence of the normalized functions, so the Gaussian
    factor and the normalization are carried along from ``h_0`` and nothing
    overflows for large ``n``.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    z = np.asarray(z, dtype=float)
    x = sqrt(gamma) * z
    out = np.empty((n_max + 1,) + z.shape)
    out[0] = (gamma / pi) ** 0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = sqrt(2.0) * x * out[0]
    for n in range(2, n_max + 1):
        out[n] = sqrt(2.0 / n) * x * out[n - 1] - sqrt((n - 1) / n) * out[n - 2]
    return out


def eval_hermite_function(n: int, gamma: float, z: float) -> float:
    """Value of the scaled Hermite function ``h_n`` at ``z``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return float(hermite_functions(n, gamma, z)[n])


def _unscaled_rule(M: int) -> tuple[np.ndarray, np.ndarray]:
    n = M + 1
    if n == 1:
        return np.zeros(1), np.array([sqrt(pi)])
    # Golub-Welsch eigenvalues as starting points, then Newton on h_n.
    off = np.sqrt(np.arange(1, n) / 2.0)
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    x = np.sort(np.linalg.eigvalsh(jacobi))
    for _ in range(_NEWTON_MAXITER):
        h = hermite_functions(n, 1.0, x)
        # h_n' = sqrt(2n) h_{n-1} - x h_n
        dx = h[n] / (sqrt(2.0 * n) * h[n - 1] - x * h[n])
        x = x - dx
        if np.all(np.abs(dx) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(x))):
            break
    else:
        bad = int(np.argmax(np.abs(dx)))
        raise RuntimeError(
            f"Gauss-Hermite node {bad} of {n} did not converge (last update {dx[bad]:.3e})"
        )
    x = 0.5 * (x - x[::-1])
    hm = hermite_functions(M, 1.0, x)[M]
    # Equivalent to sqrt(pi) 2^M (M+1)! e^{x^2} / ((M+1)^2 H_M(x)^2).
    w = 1.0 / (n * hm * hm)
    w = 0.5 * (w + w[::-1])
    return x, w


def _mp_context():
    mp = mpmath.MPContext()
    mp.dps = _EXTENDED_DPS
    return mp


def _extended_orthogonal(basis: SpectralBasis):
    """``(context, U)`` with ``U[r][k] = h_k(x_r) sqrt(w_r)`` of the unscaled rule as mpmath numbers.

    The scaling by ``gamma`` cancels in ``U``, so only ``M`` matters.
    """
    cached = basis._propagators.get("extended_U")
    if cached is not None:
        return cached
    M = basis.M
    mp = _mp_context()
    c0 = mp.pi ** mp.mpf(-0.25)
    steps = [(mp.sqrt(mp.mpf(2) / n), mp.sqrt(mp.mpf(n - 1) / n)) for n in range(1, M + 2)]

    def table(x):
        h = [c0 * mp.exp(-x * x / 2)]
        h.append(mp.sqrt(2) * x * h[0])
        for n in range(2, M + 2):
            a, b = steps[n - 1]
            h.append(a * x * h[n - 1] - b * h[n - 2])
        return h

    U = []
    root = mp.sqrt(2 * (M + 1))
    for x0 in basis.nodes * sqrt(basis.gamma):
        x = mp.mpf(float(x0))
        for _ in range(3):
            h = table(x)
            x -= h[M + 1] / (root * h[M] - x * h[M + 1])
        h = table(x)
        sw = 1 / (mp.sqrt(M + 1) * abs(h[M]))
        U.append([h[k] * sw for k in range(M + 1)])
    basis._propagators["extended_U"] = (mp, U)
    return mp, U


def _to_longdouble(v) -> np.longdouble:
    hi = float(v)
    return np.longdouble(hi) + np.longdouble(float(v - hi))


def _extended_propagator(basis: SpectralBasis, tau: float, imaginary: bool) -> np.ndarray:
    mp, U = _extended_orthogonal(basis)
    n = basis.M + 1
    rate = [basis.gamma * (mp.mpf(k) + mp.mpf(0.5)) * mp.mpf(tau) for k in range(n)]
    d = [mp.expj(-r) if imaginary else mp.exp(-r) for r in rate]
    Ud = [[U[r][k] * d[k] for k in range(n)] for r in range(n)]
    B = np.empty((n, n), dtype=np.clongdouble if imaginary else float)
    for r in range(n):
        for s in range(r, n):
            v = mp.fsum(Ud[r][k] * U[s][k] for k in range(n))
            if imaginary:
                v = _to_longdouble(v.real) + 1j * _to_longdouble(v.imag)
            else:
                v = float(v)
            B[r, s] = B[s, r] = v
    return B


def build_rule(gamma: float, M: int) -> QuadratureRule:
    """Gauss-Hermite rule on the roots of ``H_{M+1}``, scaled by ``gamma^(-1/2)``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if int(M) != M or M < 0:
        raise ValueError("M must be a nonnegative integer")
    M = int(M)
    x, w = _unscaled_rule(M)
    s = gamma ** -0.5
    nodes, weights = s * x, s * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(float(gamma), M, nodes, weights)


def build_basis(gamma: float, M: int) -> SpectralBasis:
    rule = build_rule(gamma, M)
    E = hermite_functions(M, gamma, rule.nodes).T.copy()
    G = E.T * rule.weights
    k = np.arange(M + 1)
    mu = gamma * (k[:, None] + k[None, :] + 1.0)
    for arr in (E, G, mu):
        arr.setflags(write=False)
    return SpectralBasis(rule, E, G, mu)


def basis_function(basis: SpectralBasis, k: int, l: int) -> np.ndarray:
    """Grid samples of ``h_{k,l}`` as a complex grid field."""
    return np.outer(basis.E[:, k], basis.E[:, l]).astype(complex)


def forward(basis: SpectralBasis, field: np.ndarray) -> np.ndarray:
    """Hermite coefficients ``a = G @ field @ G.T`` by tensor Gauss quadrature."""
    _check_shape(basis, field, "grid field")
    return basis.G @ field @ basis.G.T


def inverse(basis: SpectralBasis, coeffs: np.ndarray) -> np.ndarray:
    """Evaluate the truncated series ``sum a[k,l] h_k(z_r) h_l(z_s)`` on the grid."""
    _check_shape(basis, coeffs, "spectral field")
    return basis.E @ coeffs @ basis.E.T


def mass_norm(basis: SpectralBasis, field: np.ndarray) -> float:
    """Discrete L2 norm: the Frobenius norm of the coefficient matrix."""
    return float(np.linalg.norm(forward(basis, field)))


def quartic_integral(basis: SpectralBasis, field: np.ndarray, exact: bool = False) -> float:
    """Approximate ``integral |psi|^4`` for the function represented by ``field``.

    By default the native tensor rule is used, ``sum |psi_rs|^4 w_r w_s``. With
    ``exact=True`` the truncated series is resampled on a ``2M+1``-point rule
    built for ``2 gamma``, which integrates ``|psi|^4`` exactly for ``psi`` in the
    span; this is for verification and is not used by the solvers.
    """
    _check_shape(basis, field, "grid field")
    if not exact:
        w = basis.weights
        return float(np.sum(np.abs(field) ** 4 * np.outer(w, w)))
    fine = build_rule(2.0 * basis.gamma, 2 * basis.M)
    Ef = hermite_functions(basis.M, basis.gamma, fine.nodes).T
    psi = Ef @ forward(basis, field) @ Ef.T
    return float(np.sum(np.abs(psi) ** 4 * np.outer(fine.weights, fine.weights)))


def _quadratic_energy(basis: SpectralBasis, field: np.ndarray) -> float:
    a = forward(basis, field)
    return float(np.sum(basis.mu * (a.real**2 + a.imag**2)))


def hamiltonian(basis: SpectralBasis, field: np.ndarray, beta: float, exact_quartic: bool = False) -> float:
    """Energy ``1/2 |grad psi|^2 + V |psi|^2 + beta/2 |psi|^4`` integrated over the plane.

    The quadratic part is evaluated spectrally as ``sum mu_{k,l} |a_{k,l}|^2``.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    quad = _quadratic_energy(basis, field)
    if beta == 0:
        return quad
    return quad + 0.5 * beta * quartic_integral(basis, field, exact_quartic)


def chemical_potential(basis: SpectralBasis, field: np.ndarray, beta: float, c: float,
                       rtol: float = 1e-10) -> float:
    """Chemical potential of a state of norm ``c``.

    Same integrals as :func:`hamiltonian` divided by ``c^2``, except the quartic
    term enters with ``beta`` instead of ``beta/2``.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    norm = mass_norm(basis, field)
    if abs(norm - c) > rtol * c:
        raise ValueError(f"state has norm {norm!r}, expected {c!r}")
    quad = _quadratic_energy(basis, field)
    quart = quartic_integral(basis, field) if beta else 0.0
    return (quad + beta * quart) / c**2
