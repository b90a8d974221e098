"""Counter-based Gaussian streams keyed by ``(seed, stream)``.

Raw bits come from the Philox-4x64 counter-based generator with the 128-bit key
``seed + 2**64 * stream``, so any stream can be regenerated without touching
the others.  Uniforms are mapped to normals by Wichura's AS 241 (PPND16)
rational approximation, which uses only arithmetic, ``log`` and ``sqrt``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

GENERATOR = "philox4x64-10+as241"

_MASK64 = (1 << 64) - 1

# AS 241 coefficients, central region |p - 0.5| <= 0.425
_A = (3.387132872796366608, 133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125, 45921.953931549871457, 67265.770927008700853,
      33430.575583588128105, 2509.0809287301226727)
_B = (1.0, 42.313330701600911252, 687.1870074920579083, 5394.1960214247511077,
      21213.794301586595867, 39307.89580009271061, 28729.085735721942674,
      5226.495278852545925)
# intermediate tail, r = sqrt(-log(min(p, 1-p))) <= 5
_C = (1.42343711074968357734, 4.6303378461565452959, 5.7694972214606914055,
      3.64784832476320460504, 1.27045825245236838258, 0.24178072517745061177,
      0.0227238449892691845833, 7.7454501427834140764e-4)
_D = (1.0, 2.05319162663775882187, 1.6763848301838038494, 0.68976733498510000455,
      0.14810397642748007459, 0.0151986665636164571966, 5.475938084995344946e-4,
      1.05075007164441684324e-9)
# far tail
_E = (6.6579046435011037772, 5.4637849111641143699, 1.7848265399172913358,
      0.29656057182850489123, 0.026532189526576123093, 0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 0.59983220655588793769, 0.13692988092273580531, 0.0148753612908506148525,
      7.868691311456132591e-4, 1.8463183175100546818e-5, 1.4215117583164458887e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, x):
    out = np.full_like(x, coeffs[-1])
    for c in coeffs[-2::-1]:
        out *= x
        out += c
    return out


_CHUNK = 1 << 15


def normal_ppf(p) -> np.ndarray:
    """Inverse standard normal CDF for p in (0, 1)."""
    p = np.asarray(p, dtype=float)
    flat = p.ravel()
    if flat.size <= _CHUNK:
        return _ppf_flat(flat).reshape(p.shape)
    out = np.empty_like(flat)
    # cache-sized chunks; elementwise, so chunking does not change any value
    for start in range(0, flat.size, _CHUNK):
        out[start:start + _CHUNK] = _ppf_flat(flat[start:start + _CHUNK])
    return out.reshape(p.shape)


def _ppf_flat(p: np.ndarray) -> np.ndarray:
    q = p - 0.5
    # the central formula is evaluated everywhere; tails are overwritten below
    r = 0.180625 - q * q
    out = _poly(_A, r)
    out /= _poly(_B, r)
    out *= q
    tail = np.flatnonzero(np.abs(q) > 0.425)
    if tail.size:
        qt = q[tail]
        rt = np.where(qt < 0, p[tail], 1.0 - p[tail])
        rt = np.sqrt(-np.log(rt))
        near = rt <= 5.0
        val = np.empty_like(rt)
        rn = rt[near] - 1.6
        val[near] = _poly(_C, rn) / _poly(_D, rn)
        rf = rt[~near] - 5.0
        val[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tail] = np.where(qt < 0, -val, val)
    return out


def _key(seed: int, stream: int) -> int:
    seed, stream = int(seed), int(stream)
    if seed < 0 or stream < 0:
        raise DomainError("seed and stream must be nonnegative integers")
    return (seed & _MASK64) | ((stream & _MASK64) << 64)


def uniforms(seed: int, stream: int, n: int) -> np.ndarray:
    """n uniforms in the open interval (0, 1) from stream ``(seed, stream)``."""
    raw = np.random.Philox(key=_key(seed, stream)).random_raw(int(n))
    # top 53 bits, shifted by half an ulp so 0 and 1 are never produced
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def normals(seed: int, stream: int, n: int) -> np.ndarray:
    return normal_ppf(uniforms(seed, stream, n))


def normals_batch(seed: int, streams, n: int) -> np.ndarray:
    """Array of shape ``(len(streams), n)``; row i equals ``normals(seed, streams[i], n)``."""
    streams = list(streams)
    u = np.empty((len(streams), int(n)))
    for i, s in enumerate(streams):
        u[i] = uniforms(seed, s, n)
    return normal_ppf(u)
