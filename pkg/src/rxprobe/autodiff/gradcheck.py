"""Central finite differences, used as the independent oracle for backward."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


def finite_diff(f: Callable[..., float], xs: Sequence[np.ndarray], eps: float = 1e-6) -> list[np.ndarray]:
    """Numeric gradient of the scalar ``f(*xs)`` w.r.t. each array in ``xs``.

    Complex arrays get ``df/dRe + i df/dIm``, the same convention the tape uses.
    """
    xs = [np.array(x, dtype=np.complex128 if np.iscomplexobj(x) else np.float64) for x in xs]
    grads = []
    for k, x in enumerate(xs):
        g = np.zeros_like(x)
        flat = x.reshape(-1)
        gflat = g.reshape(-1)
        steps = (1.0, 1j) if np.iscomplexobj(x) else (1.0,)
        for i in range(flat.size):
            for step in steps:
                orig = flat[i]
                flat[i] = orig + eps * step
                fp = float(f(*xs))
                flat[i] = orig - eps * step
                fm = float(f(*xs))
                flat[i] = orig
                gflat[i] += (fp - fm) / (2.0 * eps) * step
        grads.append(g)
    return grads


def rel_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-12) -> float:
    """max |a - b| / max(|a|, |b|, floor), taken over all entries."""
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), floor)
    return float(np.max(np.abs(a - b), initial=0.0) / scale)
