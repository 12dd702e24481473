"""Mean-field estimates of Ising couplings and fields from measured moments.

Three estimators share the inverse equal-time correlation matrix:

* equilibrium:  ``J = diag(1 / (1 - m^2)) - C(0)^-1``            (symmetric)
* synchronous:  ``J = diag(1 / (1 - m^2)) C(tau) C(0)^-1``       (directed)
* asynchronous: ``J = diag(1 / (1 - m^2)) dC/dtau|0 C(0)^-1``    (directed)

and the fields ``h_i = atanh(m_i) - sum_{j != i} J_ij m_j``.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMatrixError, ValidationError
from .stats import MomentSet

METHODS = ("equilibrium", "synchronous", "asynchronous")
SHORT_NAMES = {"eq": "equilibrium", "syn": "synchronous", "asyn": "asynchronous"}
DEFAULT_COND_BOUND = 1e12


@dataclass
class CouplingModel:
    method: str
    j: np.ndarray
    h: np.ndarray
    stocks: tuple
    directed: bool = field(default=None)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        if self.directed is None:
            self.directed = self.method != "equilibrium"
        if self.method == "equilibrium" and self.directed:
            raise ValidationError("equilibrium couplings are undirected")
        if not (np.all(np.isfinite(self.j)) and np.all(np.isfinite(self.h))):
            raise ValidationError(f"{self.method} couplings or fields are not finite")
        self.stocks = tuple(self.stocks)

    @property
    def n(self) -> int:
        return self.j.shape[0]

    def couplings_csv(self) -> str:
        buf = io.StringIO()
        buf.write("," + ",".join(self.stocks) + "\n")
        for t, row in zip(self.stocks, self.j):
            buf.write(t + "," + ",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    def fields_csv(self) -> str:
        return "ticker,value\n" + "".join(
            f"{t},{float(v)!r}\n" for t, v in zip(self.stocks, self.h)
        )

    def sidecar_json(self) -> str:
        return json.dumps(
            {"method": self.method, "directed": self.directed, "n": self.n,
             "stocks": list(self.stocks), **self.params},
            indent=1,
        )


def invert_c0(c0: np.ndarray, lam: float = 0.0,
              cond_bound: float = DEFAULT_COND_BOUND) -> np.ndarray:
    """Inverse of ``c0 + lam * I``.

    Raises
    ------
    SingularMatrixError
        If the 2-norm condition number exceeds ``cond_bound``.
    """
    c0 = np.asarray(c0, dtype=float)
    if c0.ndim != 2 or c0.shape[0] != c0.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {c0.shape}")
    if lam < 0:
        raise ValidationError(f"ridge term must be >= 0, got {lam}")
    a = c0 + lam * np.eye(len(c0))
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_bound:
        raise SingularMatrixError(float(cond), cond_bound, lam)
    return np.linalg.inv(a)


def _check_m(m):
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(m) >= 1):
        bad = np.flatnonzero(np.abs(m) >= 1).tolist()
        raise ValidationError(f"magnetization of +/-1 for stock indices {bad}; "
                              "filter degenerate stocks first")
    return m


def infer_fields(j: np.ndarray, m: np.ndarray) -> np.ndarray:
    """``h_i = atanh(m_i) - sum_{j != i} J_ij m_j``."""
    m = _check_m(m)
    j = np.asarray(j, dtype=float)
    return np.arctanh(m) - (j @ m - np.diag(j) * m)


def _params(mom, lam, tau=None):
    p = mom.params
    return {
        "dt": None if p is None else p.dt,
        "chi": None if p is None else p.chi,
        "ds": None if p is None else p.ds,
        "tau_samples": tau,
        "tau_time": None if tau is None else tau * mom.spacing,
        "lambda": lam,
        "n_samples": mom.n_samples,
        "dropped": list(mom.dropped),
    }


def infer_equilibrium(mom: MomentSet, lam: float = 0.0) -> CouplingModel:
    """Naive mean-field couplings from equal-time correlations (undirected)."""
    m = _check_m(mom.m)
    inv = invert_c0(mom.c0, lam)
    j = np.diag(1.0 / (1.0 - m**2)) - inv
    # the inverse of a symmetric matrix is symmetric only up to rounding
    j = 0.5 * (j + j.T)
    return CouplingModel("equilibrium", j, infer_fields(j, m), mom.stocks,
                         directed=False, params=_params(mom, lam))


def infer_synchronous(mom: MomentSet, tau: int, lam: float = 0.0) -> CouplingModel:
    """Directed couplings for parallel-update dynamics from ``C(tau)`` (tau in samples)."""
    m = _check_m(mom.m)
    if tau == 0:
        c_tau = mom.c0
    elif tau in mom.lags:
        c_tau = mom.lags[tau]
    else:
        raise ValidationError(f"no lagged correlation for tau={tau}; have {sorted(mom.lags)}")
    inv = invert_c0(mom.c0, lam)
    j = (c_tau @ inv) / (1.0 - m**2)[:, None]
    return CouplingModel("synchronous", j, infer_fields(j, m), mom.stocks,
                         directed=True, params=_params(mom, lam, tau))


def infer_asynchronous(mom: MomentSet, lam: float = 0.0) -> CouplingModel:
    """Directed couplings for continuous-time dynamics from ``dC/dtau`` at zero lag."""
    m = _check_m(mom.m)
    if mom.dc is None:
        raise ValidationError("moment set carries no lag derivative; compute it with dt")
    inv = invert_c0(mom.c0, lam)
    j = (mom.dc @ inv) / (1.0 - m**2)[:, None]
    return CouplingModel("asynchronous", j, infer_fields(j, m), mom.stocks,
                         directed=True, params=_params(mom, lam))


def infer(mom: MomentSet, method: str, tau: int | None = None, lam: float = 0.0) -> CouplingModel:
    method = SHORT_NAMES.get(method, method)
    if method == "equilibrium":
        return infer_equilibrium(mom, lam)
    if method == "synchronous":
        if tau is None:
            raise ValidationError("synchronous inference needs a lag tau")
        return infer_synchronous(mom, tau, lam)
    if method == "asynchronous":
        return infer_asynchronous(mom, lam)
    raise ValidationError(f"unknown method {method!r}")
