"""Percolated Galton-Watson model quantities.

Bond percolation with retaining probability p thins an offspring law
{p_k} into {pbar_l}. This module solves for the extinction probability
rho of the thinned process, and derives from (law, p, rho) the backbone
law ptilde, the bush law phat, the mean bush size M and the expected
excursion count N(p, k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .offspring import (
    SUPPORT_CAP,
    TAIL_MASS,
    LawError,
    OffspringLaw,
)

DEFAULT_TOL = 1e-12
MAX_FIXED_POINT_ITER = 10**6


class ConvergenceError(RuntimeError):
    """Fixed-point / Newton iteration failed to converge within the cap."""


class ModelError(ValueError):
    """Model parameters outside the supercritical regime the theory covers."""


def solve_rho(law: OffspringLaw, p: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Smallest fixed point rho of rho = f(1 - p + p*rho), plus lambda.

    Monotone fixed-point iteration from 0 converges to the smallest root;
    a few Newton steps on g(x) = f(1-p+px) - x polish it to solver
    precision. Returns (rho, lambda) with lambda = 1 - p + p*rho.
    """
    if tol <= 0:
        raise ModelError(f"tol must be positive, got {tol}")
    m = law.mean()
    if m <= 1.0:
        raise ModelError(f"law mean {m} <= 1: no supercritical phase")
    if not 1.0 / m < p <= 1.0:
        raise ModelError(f"retaining probability p={p} not in (1/m, 1] = ({1.0 / m}, 1]")
    if law.is_degenerate:
        raise ModelError("degenerate law f(s) = s has no meaningful extinction problem")

    rho = 0.0
    for _ in range(MAX_FIXED_POINT_ITER):
        nxt = law.pgf_derivative(1.0 - p + p * rho, 0)
        if abs(nxt - rho) <= tol:
            rho = nxt
            break
        rho = nxt
    else:
        raise ConvergenceError(
            f"fixed-point iteration for rho did not reach tol={tol} within "
            f"{MAX_FIXED_POINT_ITER} iterations (p={p} too close to 1/m?)"
        )

    # Newton polish on g(x) = f(1-p+px) - x; g'(x) = p f'(lambda) - 1
    for _ in range(50):
        lam = 1.0 - p + p * rho
        g = law.pgf_derivative(lam, 0) - rho
        gp = p * law.pgf_derivative(lam, 1) - 1.0
        if gp == 0.0:
            break
        step = g / gp
        rho -= step
        if abs(step) <= tol * 0.01:
            break
    rho = min(max(rho, 0.0), 1.0)

    lam = 1.0 - p + p * rho
    if abs(rho - law.pgf_derivative(lam, 0)) > 10 * tol:
        raise ConvergenceError(f"rho residual exceeds {10 * tol} after refinement (p={p})")
    return rho, lam


@dataclass(frozen=True)
class PercolatedModel:
    """An offspring law together with a retaining probability p and the
    solved extinction quantities rho, lambda = 1-p+p*rho, mhat = p f'(lambda)."""

    law: OffspringLaw
    p: float
    rho: float = field(init=False)
    lam: float = field(init=False)
    m_hat: float = field(init=False)
    tol: float = DEFAULT_TOL

    def __init__(self, law: OffspringLaw, p: float, tol: float = DEFAULT_TOL):
        rho, lam = solve_rho(law, p, tol)
        object.__setattr__(self, "law", law)
        object.__setattr__(self, "p", float(p))
        object.__setattr__(self, "tol", float(tol))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "m_hat", p * law.pgf_derivative(lam, 1))

    def f(self, s: float, order: int = 0) -> float:
        return self.law.pgf_derivative(s, order)


def thinned_pmf(model: PercolatedModel, l: int) -> float:
    """pbar_l: probability of l retained children after p-thinning.

    pbar_l = sum_r p_{l+r} p^l (1-p)^r C(l+r, r) = p^l f^(l)(1-p) / l!.
    """
    if l < 0:
        raise ValueError(f"l must be >= 0, got {l}")
    p = model.p
    fl = model.f(1.0 - p, l)
    if fl == 0.0:
        return 0.0
    if l < 170:
        return p**l * fl / math.factorial(l)
    # log space avoids factorial overflow deep in the tail
    return math.exp(l * math.log(p) + math.log(fl) - math.lgamma(l + 1))


def rho_derivative(model: PercolatedModel) -> float:
    """d(rho)/dp = -(1-rho) f'(lambda) / (1 - p f'(lambda)); always <= 0."""
    fp = model.f(model.lam, 1)
    denom = 1.0 - model.p * fp
    if abs(denom) <= 1e-12:
        raise ModelError("p f'(lambda) = 1: model at criticality, derivative diverges")
    return -(1.0 - model.rho) * fp / denom


def backbone_pmf(model: PercolatedModel, k: int) -> float:
    """ptilde_k = f^(k)(lambda) / k! * p^k (1-rho)^(k-1); ptilde_0 = 0."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return 0.0
    fk = model.f(model.lam, k)
    if fk == 0.0:
        return 0.0
    if k < 170:
        return fk / math.factorial(k) * model.p**k * (1.0 - model.rho) ** (k - 1)
    return math.exp(
        math.log(fk)
        - math.lgamma(k + 1)
        + k * math.log(model.p)
        + (k - 1) * math.log1p(-model.rho)
    )


def bush_pmf(model: PercolatedModel, k: int) -> float:
    """phat_k = pbar_k rho^(k-1), the red-vertex offspring law."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if model.rho == 0.0:
        raise ModelError("rho = 0: no bushes exist, bush law undefined")
    return thinned_pmf(model, k) * model.rho ** (k - 1)


def bush_mean_size(model: PercolatedModel) -> float:
    """M = 1/(1 - mhat), the mean total size of a bush (root included)."""
    if model.m_hat >= 1.0 - 1e-12:
        raise ModelError(f"mhat = {model.m_hat} at/above 1: bushes not subcritical")
    return 1.0 / (1.0 - model.m_hat)


def mean_excursions(model: PercolatedModel, k: int) -> float:
    """N(p, k) = p rho / (k+1) * f^(k+1)(lambda) / f^(k)(lambda)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    fk = model.f(model.lam, k)
    fk1 = model.f(model.lam, k + 1)
    if fk == 0.0:
        raise ModelError(f"f^({k})(lambda) = 0: backbone degree {k + 1} impossible")
    if fk1 == 0.0:
        return 0.0
    return model.p * model.rho / (k + 1) * fk1 / fk


def thinned_pmf_iter(model: PercolatedModel):
    """Yield (l, pbar_l) covering all but TAIL_MASS of the thinned law."""
    cap = model.law.max_support
    cum = 0.0
    l = 0
    while True:
        pl = thinned_pmf(model, l)
        yield l, pl
        cum += pl
        if cap is not None and l >= cap:
            return
        if cap is None and (1.0 - cum) < TAIL_MASS:
            return
        if cap is None and pl < 1e-17 and cum > 0.5:
            return  # roundoff keeps cum short of 1; terms are negligible
        if l >= SUPPORT_CAP:
            return
        l += 1


def backbone_pmf_iter(model: PercolatedModel):
    """Yield (k, ptilde_k) for k >= 1 covering all but TAIL_MASS."""
    cap = model.law.max_support
    cum = 0.0
    k = 1
    while True:
        pk = backbone_pmf(model, k)
        yield k, pk
        cum += pk
        if cap is not None and k >= cap:
            return
        if cap is None and (1.0 - cum) < TAIL_MASS:
            return
        if cap is None and pk < 1e-17 and cum > 0.5:
            return  # roundoff keeps cum short of 1; terms are negligible
        if k >= SUPPORT_CAP:
            return
        k += 1


def bush_pmf_iter(model: PercolatedModel):
    """Yield (k, phat_k) for k >= 0 covering all but TAIL_MASS."""
    cap = model.law.max_support
    cum = 0.0
    k = 0
    while True:
        pk = bush_pmf(model, k)
        yield k, pk
        cum += pk
        if cap is not None and k >= cap:
            return
        if cap is None and (1.0 - cum) < TAIL_MASS:
            return
        if cap is None and pk < 1e-17 and cum > 0.5:
            return  # roundoff keeps cum short of 1; terms are negligible
        if k >= SUPPORT_CAP:
            return
        k += 1
