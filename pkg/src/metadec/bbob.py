"""The 24 noiseless BBOB2009 benchmark functions.

Each builder draws its shift vector, orthogonal rotations and auxiliary
randomness from a single seeded generator, then returns ``(x_opt, raw)``
where ``raw`` maps a batch ``(n, dim)`` of points to ``(n,)`` values with
``raw(x) >= 0`` everywhere on the box and ``raw(x_opt) == 0`` up to float
round-off.  The instance value ``f_opt`` is added one level up, in
:mod:`metadec.problems`.

Search domain is the standard box [-5, 5]^D.  Boundary penalties that are
part of a function's definition vanish inside the box, so the global-minimum
property holds there.
"""

from __future__ import annotations

import numpy as np

BOUND = 5.0

# Slightly above the true maximum of z*sin(sqrt|z|) on [-500, 500]; keeps the
# Schwefel core non-negative.
_SCHWEFEL_CONST = 418.9828872724339
_SCHWEFEL_XOPT = 4.2096874633


def gram_schmidt_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Orthogonal matrix from Gram-Schmidt on standard Gaussian rows."""
    b = rng.standard_normal((dim, dim))
    for i in range(dim):
        for j in range(i):
            b[i] -= (b[i] @ b[j]) * b[j]
        b[i] /= np.sqrt(b[i] @ b[i])
    return b


def _uniform_xopt(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.uniform(-4.0, 4.0, dim)


def _nonzero_sign(a: np.ndarray) -> np.ndarray:
    return np.where(a >= 0.0, 1.0, -1.0)


def _osc(a):
    """Oscillating monotone transform; fixes 0 and 1, preserves sign."""
    a = np.asarray(a, dtype=float)
    out = a.copy()
    pos = a > 0.0
    neg = a < 0.0
    y = np.log(a[pos]) / 0.1
    out[pos] = np.exp(y + 0.49 * (np.sin(y) + np.sin(0.79 * y))) ** 0.1
    y = np.log(-a[neg]) / 0.1
    out[neg] = -np.exp(y + 0.49 * (np.sin(0.55 * y) + np.sin(0.31 * y))) ** 0.1
    return out


def _asy(a: np.ndarray, beta: float) -> np.ndarray:
    """Asymmetric coordinate warp; identity at 0 and on negative values."""
    dim = a.shape[-1]
    expo = 1.0 + beta * np.linspace(0.0, 1.0, dim) * np.sqrt(np.maximum(a, 0.0))
    return np.where(a > 0.0, np.maximum(a, 0.0) ** expo, a)


def _pen(x: np.ndarray) -> np.ndarray:
    """Quadratic penalty outside the box; zero inside."""
    return np.sum(np.maximum(0.0, np.abs(x) - BOUND) ** 2, axis=-1)


def _lin(dim: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, dim)


def _rosen_core(z: np.ndarray) -> np.ndarray:
    return np.sum(
        100.0 * (z[:, :-1] ** 2 - z[:, 1:]) ** 2 + (z[:, :-1] - 1.0) ** 2, axis=-1
    )


def _build_f1(dim, rng):
    """Sphere."""
    xopt = _uniform_xopt(rng, dim)

    def raw(x):
        return np.sum((x - xopt) ** 2, axis=-1)

    return xopt, raw


def _build_f2(dim, rng):
    """Separable ellipsoid with oscillation, condition 1e6."""
    xopt = _uniform_xopt(rng, dim)
    scales = 1e6 ** _lin(dim)

    def raw(x):
        return _osc(x - xopt) ** 2 @ scales

    return xopt, raw


def _build_f3(dim, rng):
    """Separable Rastrigin with oscillation and asymmetry."""
    xopt = _uniform_xopt(rng, dim)
    scales = np.sqrt(10.0) ** _lin(dim)

    def raw(x):
        z = scales * _asy(_osc(x - xopt), 0.2)
        return 10.0 * (dim - np.sum(np.cos(2.0 * np.pi * z), axis=-1)) + np.sum(
            z**2, axis=-1
        )

    return xopt, raw


def _build_f4(dim, rng):
    """Bueche-Rastrigin: skewed separable Rastrigin."""
    xopt = _uniform_xopt(rng, dim)
    xopt[::2] = np.abs(xopt[::2])
    scales = np.sqrt(10.0) ** _lin(dim)

    def raw(x):
        z = _osc(x - xopt)
        even = z[:, ::2]
        z[:, ::2] = np.where(even > 0.0, 10.0 * even, even)
        z *= scales
        core = 10.0 * (dim - np.sum(np.cos(2.0 * np.pi * z), axis=-1)) + np.sum(
            z**2, axis=-1
        )
        return core + 100.0 * _pen(x)

    return xopt, raw


def _build_f5(dim, rng):
    """Linear slope; optimum at a box corner."""
    xopt = BOUND * _nonzero_sign(_uniform_xopt(rng, dim))
    scales = -_nonzero_sign(xopt) * 10.0 ** _lin(dim)
    offset = BOUND * np.sum(np.abs(scales))

    def raw(x):
        # coordinates past the optimal corner count as if at the corner
        z = np.where(x * xopt > BOUND**2, BOUND * np.sign(x), x)
        return offset + z @ scales

    return xopt, raw


def _build_f6(dim, rng):
    """Attractive sector."""
    xopt = _uniform_xopt(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    r_b = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(np.sqrt(10.0) ** _lin(dim)) @ r_b

    def raw(x):
        z = (x - xopt) @ tf
        z = np.where(z * xopt > 0.0, 100.0 * z, z)
        return _osc(np.sum(z**2, axis=-1)) ** 0.9

    return xopt, raw


def _build_f7(dim, rng):
    """Step ellipsoid, condition 100."""
    xopt = _uniform_xopt(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    r_b = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(np.sqrt(10.0) ** _lin(dim))
    scales = 100.0 ** _lin(dim)

    def raw(x):
        zh = (x - xopt) @ tf
        z1 = np.abs(zh[:, 0])
        zr = np.where(np.abs(zh) > 0.5, np.round(zh), np.round(10.0 * zh) / 10.0)
        z = zr @ r_b
        return 0.1 * np.maximum(1e-4 * z1, z**2 @ scales) + _pen(x)

    return xopt, raw


def _build_f8(dim, rng):
    """Rosenbrock, shifted but not rotated."""
    xopt = 0.75 * _uniform_xopt(rng, dim)
    scale = max(1.0, np.sqrt(dim) / 8.0)

    def raw(x):
        return _rosen_core(scale * (x - xopt) + 1.0)

    return xopt, raw


def _build_f9(dim, rng):
    """Rosenbrock, rotated."""
    scale = max(1.0, np.sqrt(dim) / 8.0)
    tf = scale * gram_schmidt_rotation(rng, dim)
    xopt = (0.5 * np.ones(dim)) @ tf.T / scale**2

    def raw(x):
        return _rosen_core(x @ tf + 0.5)

    return xopt, raw


def _build_f10(dim, rng):
    """Rotated ellipsoid with oscillation, condition 1e6."""
    xopt = _uniform_xopt(rng, dim)
    rot = gram_schmidt_rotation(rng, dim)
    scales = 1e6 ** _lin(dim)

    def raw(x):
        return _osc((x - xopt) @ rot) ** 2 @ scales

    return xopt, raw


def _build_f11(dim, rng):
    """Discus (tablet), condition 1e6."""
    xopt = _uniform_xopt(rng, dim)
    rot = gram_schmidt_rotation(rng, dim)

    def raw(x):
        z = _osc((x - xopt) @ rot)
        return 1e6 * z[:, 0] ** 2 + np.sum(z[:, 1:] ** 2, axis=-1)

    return xopt, raw


def _build_f12(dim, rng):
    """Bent cigar with asymmetric distortion, condition 1e6."""
    xopt = _uniform_xopt(rng, dim)
    rot = gram_schmidt_rotation(rng, dim)

    def raw(x):
        z = _asy((x - xopt) @ rot, 0.5) @ rot
        return z[:, 0] ** 2 + 1e6 * np.sum(z[:, 1:] ** 2, axis=-1)

    return xopt, raw


def _build_f13(dim, rng):
    """Sharp ridge."""
    xopt = _uniform_xopt(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    r_b = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(np.sqrt(10.0) ** _lin(dim)) @ r_b

    def raw(x):
        z = (x - xopt) @ tf
        return z[:, 0] ** 2 + 100.0 * np.sqrt(np.sum(z[:, 1:] ** 2, axis=-1))

    return xopt, raw


def _build_f14(dim, rng):
    """Sum of different powers."""
    xopt = _uniform_xopt(rng, dim)
    rot = gram_schmidt_rotation(rng, dim)
    expo = 2.0 + 4.0 * _lin(dim)

    def raw(x):
        z = (x - xopt) @ rot
        return np.sqrt(np.sum(np.abs(z) ** expo, axis=-1))

    return xopt, raw


def _build_f15(dim, rng):
    """Rastrigin, rotated, with oscillation and asymmetry."""
    xopt = _uniform_xopt(rng, dim)
    r_b = gram_schmidt_rotation(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(np.sqrt(10.0) ** _lin(dim)) @ r_b

    def raw(x):
        z = _asy(_osc((x - xopt) @ r_b), 0.2) @ tf
        return 10.0 * (dim - np.sum(np.cos(2.0 * np.pi * z), axis=-1)) + np.sum(
            z**2, axis=-1
        )

    return xopt, raw


def _build_f16(dim, rng):
    """Weierstrass, condition 100."""
    xopt = _uniform_xopt(rng, dim)
    r_b = gram_schmidt_rotation(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(0.1 ** _lin(dim)) @ r_b
    k = np.arange(12)
    a_k = 0.5**k
    b_k = 3.0**k
    f0 = float(np.sum(a_k * np.cos(2.0 * np.pi * b_k * 0.5)))

    def raw(x):
        z = _osc((x - xopt) @ r_b) @ tf
        w = np.sum(a_k * np.cos(2.0 * np.pi * (z[..., None] + 0.5) * b_k), axis=-1)
        core = 10.0 * (np.sum(w, axis=-1) / dim - f0) ** 3
        return core + (10.0 / dim) * _pen(x)

    return xopt, raw


def _build_schaffers(dim, rng, condition):
    xopt = _uniform_xopt(rng, dim)
    rot = gram_schmidt_rotation(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(np.sqrt(condition) ** _lin(dim))

    def raw(x):
        z = _asy((x - xopt) @ rot, 0.5) @ tf
        s = z[:, :-1] ** 2 + z[:, 1:] ** 2
        core = np.mean(s**0.25 * (np.sin(50.0 * s**0.1) ** 2 + 1.0), axis=-1) ** 2
        return core + 10.0 * _pen(x)

    return xopt, raw


def _build_f17(dim, rng):
    """Schaffers F7, condition 10."""
    return _build_schaffers(dim, rng, 10.0)


def _build_f18(dim, rng):
    """Schaffers F7, condition 1000."""
    return _build_schaffers(dim, rng, 1000.0)


def _build_f19(dim, rng):
    """Composite Griewank-Rosenbrock (F8F2)."""
    scale = max(1.0, np.sqrt(dim) / 8.0)
    tf = scale * gram_schmidt_rotation(rng, dim)
    xopt = tf @ (0.5 * np.ones(dim)) / scale**2

    def raw(x):
        z = x @ tf + 0.5
        f2 = 100.0 * (z[:, :-1] ** 2 - z[:, 1:]) ** 2 + (1.0 - z[:, :-1]) ** 2
        return 10.0 + 10.0 * np.sum(f2 / 4000.0 - np.cos(f2), axis=-1) / (dim - 1.0)

    return xopt, raw


def _build_f20(dim, rng):
    """Schwefel x*sin(sqrt|x|) with tridiagonal variable transform."""
    signs = _nonzero_sign(rng.random(dim) - 0.5)
    xopt = 0.5 * _SCHWEFEL_XOPT * signs
    scales = np.sqrt(10.0) ** _lin(dim)
    t = 2.0 * np.abs(xopt)

    def raw(x):
        xh = 2.0 * signs * x
        xt = xh.copy()
        xt[:, 1:] += 0.25 * (xh[:, :-1] - t[:-1])
        z = 100.0 * (scales * (xt - t) + t)
        pen = 0.01 * np.sum(np.maximum(0.0, np.abs(z) - 500.0) ** 2, axis=-1)
        core = 0.01 * (
            _SCHWEFEL_CONST - np.mean(z * np.sin(np.sqrt(np.abs(z))), axis=-1)
        )
        return core + pen

    return xopt, raw


def _build_gallagher(dim, rng, n_peaks, fac, highpeak_cond):
    rot = gram_schmidt_rotation(rng, dim)
    conditions = 1000.0 ** _lin(n_peaks - 1)
    conditions = np.insert(rng.permutation(conditions), 0, highpeak_cond)
    scales = np.empty((n_peaks, dim))
    span = np.linspace(-0.5, 0.5, dim)
    for i in range(n_peaks):
        scales[i] = rng.permutation(conditions[i] ** span)
    peak_values = np.insert(np.linspace(1.1, 9.1, n_peaks - 1), 0, 10.0)
    local = (fac * (10.0 * rng.random((n_peaks, dim)) - 5.0)) @ rot
    local[0] *= 0.8
    xopt = local[0] @ rot.T

    def raw(x):
        z = x @ rot
        diff = z[:, None, :] - local[None, :, :]
        e = np.sum(scales * diff**2, axis=-1)
        f = peak_values * np.exp((-0.5 / dim) * e)
        return _osc(10.0 - np.max(f, axis=-1)) ** 2 + _pen(x)

    return xopt, raw


def _build_f21(dim, rng):
    """Gallagher with 101 Gaussian peaks."""
    return _build_gallagher(dim, rng, 101, 1.0, np.sqrt(1000.0))


def _build_f22(dim, rng):
    """Gallagher with 21 Gaussian peaks."""
    return _build_gallagher(dim, rng, 21, 0.98, 1000.0)


def _build_f23(dim, rng):
    """Katsuura."""
    xopt = _uniform_xopt(rng, dim)
    r_b = gram_schmidt_rotation(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(10.0 ** _lin(dim)) @ r_b
    pow2 = 2.0 ** np.arange(1, 33)
    fac = 10.0 / dim**2

    def raw(x):
        z = (x - xopt) @ tf
        a = z[..., None] * pow2
        s = np.sum(np.abs(a - np.round(a)) / pow2, axis=-1)
        prod = np.prod(
            (1.0 + np.arange(1, dim + 1) * s) ** (10.0 / dim**1.2), axis=-1
        )
        return fac * (prod - 1.0) + _pen(x)

    return xopt, raw


def _build_f24(dim, rng):
    """Lunacek bi-Rastrigin."""
    mu1 = 2.5
    signs = _nonzero_sign(rng.standard_normal(dim))
    xopt = 0.5 * mu1 * signs
    r_b = gram_schmidt_rotation(rng, dim)
    r_a = gram_schmidt_rotation(rng, dim)
    tf = r_a @ np.diag(10.0 ** _lin(dim)) @ r_b
    s = 1.0 - 0.5 / (np.sqrt(dim + 20.0) - 4.1)
    mu2 = -np.sqrt((mu1**2 - 1.0) / s)

    def raw(x):
        xh = 2.0 * signs * x
        sphere = np.minimum(
            np.sum((xh - mu1) ** 2, axis=-1),
            dim + s * np.sum((xh - mu2) ** 2, axis=-1),
        )
        rast = 10.0 * (dim - np.sum(np.cos(2.0 * np.pi * ((xh - mu1) @ tf)), axis=-1))
        return sphere + rast + 1e4 * _pen(x)

    return xopt, raw


BUILDERS = {
    1: _build_f1,
    2: _build_f2,
    3: _build_f3,
    4: _build_f4,
    5: _build_f5,
    6: _build_f6,
    7: _build_f7,
    8: _build_f8,
    9: _build_f9,
    10: _build_f10,
    11: _build_f11,
    12: _build_f12,
    13: _build_f13,
    14: _build_f14,
    15: _build_f15,
    16: _build_f16,
    17: _build_f17,
    18: _build_f18,
    19: _build_f19,
    20: _build_f20,
    21: _build_f21,
    22: _build_f22,
    23: _build_f23,
    24: _build_f24,
}

FUNCTION_NAMES = {
    1: "sphere",
    2: "separable ellipsoid",
    3: "separable Rastrigin",
    4: "Bueche-Rastrigin",
    5: "linear slope",
    6: "attractive sector",
    7: "step ellipsoid",
    8: "Rosenbrock",
    9: "rotated Rosenbrock",
    10: "rotated ellipsoid",
    11: "discus",
    12: "bent cigar",
    13: "sharp ridge",
    14: "different powers",
    15: "rotated Rastrigin",
    16: "Weierstrass",
    17: "Schaffers F7 (cond 10)",
    18: "Schaffers F7 (cond 1000)",
    19: "Griewank-Rosenbrock",
    20: "Schwefel",
    21: "Gallagher 101 peaks",
    22: "Gallagher 21 peaks",
    23: "Katsuura",
    24: "Lunacek bi-Rastrigin",
}
