"""Complex-matrix numerics and reproducible random-number streams.

Everything downstream (channel draws, precoders, combiners) is built on the
small set of primitives in this module: seeded counter-based RNG substreams,
complex Gaussian sampling, a clamping Hermitian square root, rank-revealing
one-sided pseudo-inverses, and the zero-order Bessel function J0 used by the
spatial-correlation model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Condition-number ceiling for the Gram matrix of a pseudo-inverse input.
GRAM_CONDITION_LIMIT = 1e12


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a Gram matrix is rank deficient or too ill-conditioned."""


@dataclass(frozen=True)
class RngStream:
    """Independent substream of a master seed.

    Streams are derived with the counter-based Philox generator keyed by
    (master_seed, stream_index), so any two streams with distinct indices are
    statistically independent by construction and a given (seed, index) pair
    always reproduces the same draw sequence, bit for bit, regardless of how
    many other streams exist or in which order they are consumed.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if self.master_seed < 0:
            raise ValueError("master_seed must be a nonnegative integer")
        if self.stream_index < 0:
            raise ValueError("stream_index must be a nonnegative integer")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this substream."""
        seq = np.random.SeedSequence(self.master_seed,
                                     spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(seq))


def _complex_gaussian(gen: np.random.Generator, rows: int, cols: int,
                      variance: float) -> np.ndarray:
    """Draw a rows x cols matrix of i.i.d. CN(0, variance) entries."""
    if variance == 0.0:
        return np.zeros((rows, cols), dtype=complex)
    scale = np.sqrt(variance / 2.0)
    real = gen.standard_normal((rows, cols))
    imag = gen.standard_normal((rows, cols))
    return scale * (real + 1j * imag)


def sample_complex_gaussian(rows: int, cols: int, variance: float,
                            rng: RngStream) -> np.ndarray:
    """Circularly symmetric complex Gaussian matrix from a stream.

    The stream is consumed from its start, so calling twice with an equal
    (master_seed, stream_index) pair returns bit-identical matrices.
    """
    if rows < 0 or cols < 0:
        raise ValueError("matrix dimensions must be nonnegative")
    if not np.isfinite(variance) or variance < 0.0:
        raise ValueError("variance must be finite and nonnegative")
    return _complex_gaussian(rng.generator(), rows, cols, variance)


def hermitian_sqrt(a: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues that are slightly negative due to roundoff (down to
    -1e-8 times the largest eigenvalue) are clamped to zero; anything more
    negative means the input is genuinely indefinite and is rejected.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("hermitian_sqrt expects a square matrix")
    norm = np.linalg.norm(a)
    asym = np.linalg.norm(a - a.conj().T)
    if asym > 1e-10 * max(norm, 1e-300):
        raise ValueError("input is not Hermitian to within 1e-10 relative")
    vals, vecs = np.linalg.eigh(a)
    scale = max(float(vals[-1]), 0.0)
    if vals[0] < -1e-8 * scale or (scale == 0.0 and vals[0] < 0.0):
        raise ValueError(
            f"matrix is indefinite: eigenvalue {vals[0]:.3e} below "
            f"-1e-8 * {scale:.3e}")
    clamped = np.clip(vals, 0.0, None)
    root = (vecs * np.sqrt(clamped)) @ vecs.conj().T
    return root


def _svd_pseudo_inverse(a: np.ndarray, gram_name: str) -> np.ndarray:
    """Moore-Penrose inverse via SVD with a condition guard on the Gram."""
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s[-1] <= 0.0:
        raise SingularMatrixError(
            f"Gram matrix {gram_name} is singular (zero singular value)")
    cond_gram = (s[0] / s[-1]) ** 2
    if not np.isfinite(cond_gram) or cond_gram >= GRAM_CONDITION_LIMIT:
        raise SingularMatrixError(
            f"Gram matrix {gram_name} is ill-conditioned: condition number "
            f"{cond_gram:.3e} exceeds {GRAM_CONDITION_LIMIT:.1e}")
    return (vh.conj().T / s) @ u.conj().T


def right_pseudo_inverse(a: np.ndarray) -> np.ndarray:
    """Right inverse A^H (A A^H)^{-1} of a full-row-rank wide matrix.

    Computed from a rank-revealing SVD rather than by forming the Gram
    matrix, so the residual ||A X - I|| stays near machine precision even
    for moderately ill-conditioned inputs.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] > a.shape[1]:
        raise ValueError("right inverse needs rows <= cols")
    return _svd_pseudo_inverse(a, "A·Aᴴ")


def left_pseudo_inverse(a: np.ndarray) -> np.ndarray:
    """Left inverse (A^H A)^{-1} A^H of a full-column-rank tall matrix."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise ValueError("left inverse needs rows >= cols")
    return _svd_pseudo_inverse(a, "Aᴴ·A")


# J0 evaluation: power series on |x| <= _J0_SERIES_CUTOFF, Hankel asymptotic
# expansion beyond.  The cutoff balances series cancellation (grows with x)
# against the asymptotic error floor (shrinks with x); 13 keeps the absolute
# error under 1e-10 across |x| <= 100.
_J0_SERIES_CUTOFF = 13.0


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 80):
        term = term * q / (k * k)
        total = total + term
        if np.all(np.abs(term) < 1e-18):
            break
    return total


def _j0_asymptotic(x: np.ndarray) -> np.ndarray:
    # J0(x) = sqrt(2/(pi x)) [P(x) cos(x - pi/4) - Q(x) sin(x - pi/4)]
    # with P = 1 - |a2|/x^2 + |a4|/x^4 - ... and
    #      Q = -|a1|/x + |a3|/x^3 - ..., |a_m| = |a_{m-1}| (2m-1)^2 / (8m).
    inv = 1.0 / x
    p = np.ones_like(x)
    q = np.zeros_like(x)
    coeff = 1.0
    power = np.ones_like(x)
    for m in range(1, 25):
        coeff *= (2 * m - 1) ** 2 / (8.0 * m)
        power = power * inv
        sign = -1.0 if ((m + 1) // 2) % 2 else 1.0
        if m % 2:
            q = q + sign * coeff * power
        else:
            p = p + sign * coeff * power
    chi = x - np.pi / 4.0
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0(x):
    """Bessel function of the first kind of order zero.

    Accepts scalars or arrays; absolute error is below 1e-10 on |x| <= 100.
    """
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    out = np.empty_like(ax)
    small = ax <= _J0_SERIES_CUTOFF
    if np.any(small):
        out[small] = _j0_series(ax[small])
    large = ~small
    if np.any(large):
        out[large] = _j0_asymptotic(ax[large])
    if np.ndim(x) == 0:
        return float(out)
    return out
