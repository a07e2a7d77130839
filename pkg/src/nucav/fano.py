"""Fano line-shape fits of nuclear reflectance spectra.

    R(Delta) = sigma0 |q + e|^2 / (1 + e^2),   e = (Delta - delta1) / (gamma1 / 2)

with a complex asymmetry parameter q.  Only |Im q| is identifiable, so fits
are reported with Im q >= 0 and gamma1 > 0.
"""

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin


class FanoFitError(RuntimeError):
    pass


def fano_profile(detuning, sigma0, q, delta1, gamma1):
    e = (np.asarray(detuning, dtype=float) - delta1) / (gamma1 / 2.0)
    return sigma0 * np.abs(q + e) ** 2 / (1.0 + e**2)


def canonical(sigma0, q, delta1, gamma1):
    """Representative of the (q, gamma1) -> (-conj q, -gamma1) and Im q sign ambiguities."""
    q = complex(q)
    if gamma1 < 0:
        q, gamma1 = -q.conjugate(), -gamma1
    return sigma0, complex(q.real, abs(q.imag)), delta1, gamma1


def _initial_guesses(x, y):
    edges = np.concatenate([y[: max(1, len(y) // 20)], y[-max(1, len(y) // 20):]])
    sigma0 = float(np.median(edges))
    dev = y - sigma0
    k = int(np.argmax(np.abs(dev)))
    center = float(x[k])
    half = sigma0 + dev[k] / 2.0
    beyond = np.flatnonzero((y - half) * np.sign(dev[k]) < 0)
    left, right = beyond[beyond < k], beyond[beyond > k]
    lo = x[left[-1]] if left.size else x[0]
    hi = x[right[0]] if right.size else x[-1]
    width = max(float(hi - lo), 2.0 * float(np.min(np.diff(x))))
    scale = np.sqrt(max(y[k], 0.0) / sigma0) if sigma0 > 0 else 1.0
    qs = [0.0, scale, -scale, 1j * scale, 1.0 + 1.0j, -1.0 + 1.0j]
    return [(sigma0, q, center, width) for q in qs]


class FanoFit(RegressorMixin, BaseEstimator):
    """Least-squares Fano fit; X is the detuning grid (n,) or (n, 1), y the reflectance.

    Fitted attributes: sigma0_, q_, delta1_, gamma1_, residual_ (RMS of y - model).
    """

    def __init__(self, max_nfev=500, tol=1e-10):
        self.max_nfev = max_nfev
        self.tol = tol

    def fit(self, X, y):
        x = _as_detuning(X)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.size < 5:
            raise ValueError("need at least 5 matching (detuning, reflectance) samples")
        order = np.argsort(x)
        x, y = x[order], y[order]

        def residual(p):
            return fano_profile(x, p[0], complex(p[1], p[2]), p[3], p[4]) - y

        best = None
        for sigma0, q, center, width in _initial_guesses(x, y):
            q = complex(q)
            p0 = np.array([sigma0, q.real, q.imag, center, width])
            try:
                res = least_squares(residual, p0, method="lm", max_nfev=self.max_nfev,
                                    ftol=self.tol, xtol=self.tol, gtol=self.tol)
            except ValueError:
                continue
            if not np.all(np.isfinite(res.x)) or res.x[4] == 0:
                continue
            if best is None or res.cost < best.cost:
                best = res
        if best is None:
            raise FanoFitError("no starting point converged")
        p = best.x
        self.sigma0_, self.q_, self.delta1_, self.gamma1_ = canonical(p[0], complex(p[1], p[2]), p[3], p[4])
        self.residual_ = float(np.sqrt(np.mean(best.fun**2)))
        self.nfev_ = int(best.nfev)
        self.converged_ = bool(best.status > 0)
        return self

    def predict(self, X):
        return fano_profile(_as_detuning(X), self.sigma0_, self.q_, self.delta1_, self.gamma1_)

    @property
    def params_(self):
        return (self.sigma0_, self.q_, self.delta1_, self.gamma1_)


def _as_detuning(X):
    x = np.asarray(X, dtype=float)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise ValueError("X must have a single detuning column")
        x = x[:, 0]
    return x
