"""Bivariate Levy models with finite-activity jumps.

A model is stored by its *genuine* linear drift b = (b_U, b_L), the
Gaussian covariance rate matrix, and a jump specification given as an
intensity times a normalized jump law.  For finite activity this is
equivalent to the usual characteristic triplet; the triplet location is
gamma = b + intensity * E[z 1_{|z| <= 1}] and is exposed through
:meth:`LevyModel2.gamma`.

Two standing assumptions about the first jump coordinate matter
throughout:

* condition (A): jumps of the first component never equal -1, which makes
  the driven linear SDE solvable;
* condition (B): jumps of the first component stay strictly above -1,
  which keeps the stochastic exponential positive, makes the process
  stochastically monotone and is exactly when a Siegmund dual exists.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConditionError",
    "Marginal",
    "JumpLaw2",
    "LevyModel2",
    "characteristic_exponent",
    "dual_model",
    "detect_degeneracy",
    "degeneracy_margin",
]

_PSD_TOL = 1e-12


class ConditionError(ValueError):
    """A model violates the hypothesis required by the requested operation."""


# ---------------------------------------------------------------------------
# scalar marginals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Marginal:
    """One-dimensional jump-size law.

    Supported kinds: ``points`` (finite mixture of point masses),
    ``exponential`` (sign * Exp(rate)), ``uniform`` on (a, b), and
    ``truncated_normal`` restricted to (lower, inf).
    """

    kind: str
    params: tuple

    # -- constructors ------------------------------------------------------

    @staticmethod
    def points(atoms) -> "Marginal":
        atoms = tuple((float(v), float(p)) for v, p in atoms)
        total = sum(p for _, p in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"point-mass probabilities sum to {total}, not 1")
        if any(p < 0 for _, p in atoms):
            raise ValueError("negative probability")
        return Marginal("points", atoms)

    @staticmethod
    def exponential(rate: float, sign: int = 1) -> "Marginal":
        if rate <= 0:
            raise ValueError("rate must be positive")
        if sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        return Marginal("exponential", (float(rate), int(sign)))

    @staticmethod
    def uniform(a: float, b: float) -> "Marginal":
        if not a < b:
            raise ValueError("need a < b")
        return Marginal("uniform", (float(a), float(b)))

    @staticmethod
    def truncated_normal(mu: float, sigma: float, lower: float) -> "Marginal":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        return Marginal("truncated_normal", (float(mu), float(sigma), float(lower)))

    # -- support -----------------------------------------------------------

    def support_bounds(self) -> tuple[float, float]:
        if self.kind == "points":
            vals = [v for v, p in self.params if p > 0]
            return (min(vals), max(vals))
        if self.kind == "exponential":
            rate, sign = self.params
            return (0.0, math.inf) if sign > 0 else (-math.inf, 0.0)
        if self.kind == "uniform":
            a, b = self.params
            return (a, b)
        mu, sigma, lower = self.params
        return (lower, math.inf)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        if self.kind == "points":
            return any(abs(v - x) <= tol and p > 0 for v, p in self.params)
        lo, hi = self.support_bounds()
        return lo - tol <= x <= hi + tol

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "points":
            vals = np.array([v for v, _ in self.params])
            probs = np.array([p for _, p in self.params])
            idx = rng.choice(len(vals), size=size, p=probs / probs.sum())
            return vals[idx]
        if self.kind == "exponential":
            rate, sign = self.params
            return sign * rng.exponential(1.0 / rate, size=size)
        if self.kind == "uniform":
            a, b = self.params
            return rng.uniform(a, b, size=size)
        mu, sigma, lower = self.params
        # rejection; fine for the moderate truncations used here
        out = np.empty(size)
        filled = 0
        while filled < size:
            draw = rng.normal(mu, sigma, size=max(size - filled, 16))
            keep = draw[draw > lower]
            take = min(keep.size, size - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out

    # -- characteristic function -------------------------------------------

    def cf(self, t: float) -> complex:
        """E exp(i t X)."""
        if self.kind == "points":
            return sum(p * cmath.exp(1j * t * v) for v, p in self.params)
        if self.kind == "exponential":
            rate, sign = self.params
            return rate / (rate - 1j * sign * t)
        if self.kind == "uniform":
            a, b = self.params
            if t == 0:
                return 1.0 + 0j
            return (cmath.exp(1j * t * b) - cmath.exp(1j * t * a)) / (1j * t * (b - a))
        return _quadrature_cf(self, t)

    def mean(self) -> float:
        if self.kind == "points":
            return sum(v * p for v, p in self.params)
        if self.kind == "exponential":
            rate, sign = self.params
            return sign / rate
        if self.kind == "uniform":
            a, b = self.params
            return 0.5 * (a + b)
        mu, sigma, lower = self.params
        from scipy.stats import truncnorm

        return float(truncnorm.mean((lower - mu) / sigma, np.inf, loc=mu, scale=sigma))


def _quadrature_cf(marg: Marginal, t: float) -> complex:
    from scipy.integrate import quad
    from scipy.stats import truncnorm

    mu, sigma, lower = marg.params
    dist = truncnorm((lower - mu) / sigma, np.inf, loc=mu, scale=sigma)

    def integrand_re(x):
        return math.cos(t * x) * dist.pdf(x)

    def integrand_im(x):
        return math.sin(t * x) * dist.pdf(x)

    hi = mu + 12 * sigma + abs(t) * 0  # pdf support effectively bounded
    re, re_err = quad(integrand_re, lower, hi, limit=200)
    im, im_err = quad(integrand_im, lower, hi, limit=200)
    if max(re_err, im_err) > 1e-8:
        raise ArithmeticError(
            f"characteristic-function quadrature did not converge (err={max(re_err, im_err):.2e})"
        )
    return complex(re, im)


# ---------------------------------------------------------------------------
# bivariate jump laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpLaw2:
    """Distribution of a single bivariate jump (dU, dL).

    Variants: ``point_mass``, ``independent`` (product of marginals),
    ``linked`` (dL = intercept + slope * dU), and ``dual`` (the pushforward
    of a base law under the dual jump map, see :func:`dual_model`).
    """

    kind: str
    atoms: tuple = ()
    marg_u: Marginal | None = None
    marg_l: Marginal | None = None
    link: tuple[float, float] | None = None  # (intercept, slope)
    base: "JumpLaw2 | None" = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point_mass(atoms) -> "JumpLaw2":
        atoms = tuple(((float(u), float(l)), float(p)) for (u, l), p in atoms)
        total = sum(p for _, p in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities sum to {total}, not 1")
        if any(p < 0 for _, p in atoms):
            raise ValueError("negative atom probability")
        law = JumpLaw2("point_mass", atoms=atoms)
        law._check_minus_one()
        return law

    @staticmethod
    def independent(marg_u: Marginal, marg_l: Marginal) -> "JumpLaw2":
        law = JumpLaw2("independent", marg_u=marg_u, marg_l=marg_l)
        law._check_minus_one()
        return law

    @staticmethod
    def linked(marg_u: Marginal, intercept: float, slope: float) -> "JumpLaw2":
        law = JumpLaw2("linked", marg_u=marg_u, link=(float(intercept), float(slope)))
        law._check_minus_one()
        return law

    def _check_minus_one(self) -> None:
        if self.kind == "point_mass":
            if any(u == -1.0 and p > 0 for (u, _), p in self.atoms):
                raise ConditionError("jump law puts mass on dU = -1 (condition (A) fails)")
        else:
            mu = self.marg_u
            if mu.kind == "points" and mu.contains(-1.0):
                raise ConditionError("jump law puts mass on dU = -1 (condition (A) fails)")
            # continuous marginals put zero mass on any single point

    # -- predicates ---------------------------------------------------------

    def _du_support(self) -> tuple[float, float]:
        if self.kind == "point_mass":
            us = [u for (u, _), p in self.atoms if p > 0]
            return (min(us), max(us))
        if self.kind == "dual":
            lo, hi = self.base._du_support()
            # x -> -x/(1+x) is decreasing on (-1, inf)
            f = lambda x: -x / (1.0 + x) if math.isfinite(x) else -1.0
            return (min(f(hi), f(lo)), max(f(hi), f(lo)))
        return self.marg_u.support_bounds()

    @property
    def condition_b(self) -> bool:
        """True when the dU-support lies in (-1, inf)."""
        lo, _ = self._du_support()
        return lo > -1.0

    def _dl_support(self) -> tuple[float, float]:
        if self.kind == "point_mass":
            ls = [l for (_, l), p in self.atoms if p > 0]
            return (min(ls), max(ls))
        if self.kind == "linked":
            c, s = self.link
            lo, hi = self.marg_u.support_bounds()
            vals = sorted([c + s * lo, c + s * hi])
            return (vals[0], vals[1])
        if self.kind == "dual":
            # dL' = -dL/(1+dU); sign flips, magnitude rescales
            lo, hi = self.base._dl_support()
            if not self.base.condition_b:
                return (-math.inf, math.inf)
            return (-math.inf if hi > 0 else 0.0, math.inf if lo < 0 else 0.0) if (lo < 0 or hi > 0) else (0.0, 0.0)
        return self.marg_l.support_bounds()

    @property
    def dl_nonnegative(self) -> bool:
        lo, _ = self._dl_support()
        return lo >= 0.0

    @property
    def dl_nonpositive(self) -> bool:
        _, hi = self._dl_support()
        return hi <= 0.0

    # -- sampling and expectations ------------------------------------------

    def sample(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "point_mass":
            us = np.array([u for (u, _), _ in self.atoms])
            ls = np.array([l for (_, l), _ in self.atoms])
            probs = np.array([p for _, p in self.atoms])
            idx = rng.choice(len(us), size=size, p=probs / probs.sum())
            return us[idx], ls[idx]
        if self.kind == "independent":
            return self.marg_u.sample(rng, size), self.marg_l.sample(rng, size)
        if self.kind == "linked":
            du = self.marg_u.sample(rng, size)
            c, s = self.link
            return du, c + s * du
        du, dl = self.base.sample(rng, size)
        return -du / (1.0 + du), -dl / (1.0 + du)

    def expectation(self, f) -> float:
        """Exact E f(dU, dL); point-mass (or dual of point-mass) laws only."""
        if self.kind == "point_mass":
            return sum(p * f(u, l) for (u, l), p in self.atoms)
        if self.kind == "dual" and self.base.kind == "point_mass":
            return sum(
                p * f(-u / (1.0 + u), -l / (1.0 + u)) for (u, l), p in self.base.atoms
            )
        raise NotImplementedError(f"exact expectation unsupported for {self.kind} laws")

    def cf(self, t1: float, t2: float) -> complex:
        """E exp(i (t1 dU + t2 dL))."""
        if self.kind == "point_mass":
            return sum(p * cmath.exp(1j * (t1 * u + t2 * l)) for (u, l), p in self.atoms)
        if self.kind == "independent":
            return self.marg_u.cf(t1) * self.marg_l.cf(t2)
        if self.kind == "linked":
            c, s = self.link
            return cmath.exp(1j * t2 * c) * self.marg_u.cf(t1 + s * t2)
        if self.kind == "dual" and self.base.kind == "point_mass":
            return sum(
                p * cmath.exp(1j * (t1 * (-u / (1 + u)) + t2 * (-l / (1 + u))))
                for (u, l), p in self.base.atoms
            )
        raise NotImplementedError(
            "characteristic function of a transformed non-atomic law is not available"
        )

    def dual(self) -> "JumpLaw2":
        """Pushforward under (dU, dL) -> (-dU/(1+dU), -dL/(1+dU)).

        Exact atom transform for point masses; other variants are wrapped
        and sampled by mapping base draws.
        """
        if not self.condition_b:
            raise ConditionError("dual jump law requires dU > -1 almost surely")
        if self.kind == "point_mass":
            return JumpLaw2.point_mass(
                [((-u / (1.0 + u), -l / (1.0 + u)), p) for (u, l), p in self.atoms]
            )
        if self.kind == "dual":
            return self.base
        return JumpLaw2("dual", base=self)


# ---------------------------------------------------------------------------
# the model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevyModel2:
    """Bivariate Levy process: genuine drift, Gaussian covariance rate,
    finite-activity jumps (intensity times a jump law)."""

    drift: tuple[float, float]
    gaussian_cov: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))
    jump_intensity: float = 0.0
    jump_law: JumpLaw2 | None = None

    def __post_init__(self):
        b = (float(self.drift[0]), float(self.drift[1]))
        object.__setattr__(self, "drift", b)
        (a, c), (c2, d) = self.gaussian_cov
        if abs(c - c2) > _PSD_TOL:
            raise ValueError("gaussian_cov must be symmetric")
        if a < -_PSD_TOL or d < -_PSD_TOL or a * d - c * c < -1e-10:
            raise ValueError("gaussian_cov must be positive semidefinite")
        object.__setattr__(
            self, "gaussian_cov", ((float(a), float(c)), (float(c), float(d)))
        )
        if self.jump_intensity < 0:
            raise ValueError("jump_intensity must be nonnegative")
        if self.jump_intensity > 0 and self.jump_law is None:
            raise ValueError("positive jump intensity requires a jump law")

    # -- shorthands ----------------------------------------------------------

    @property
    def sigma_u_sq(self) -> float:
        return self.gaussian_cov[0][0]

    @property
    def sigma_ul(self) -> float:
        return self.gaussian_cov[0][1]

    @property
    def sigma_l_sq(self) -> float:
        return self.gaussian_cov[1][1]

    @property
    def has_jumps(self) -> bool:
        return self.jump_intensity > 0 and self.jump_law is not None

    @property
    def has_gaussian(self) -> bool:
        return any(abs(v) > 0 for row in self.gaussian_cov for v in row)

    @property
    def is_zero(self) -> bool:
        return (
            self.drift == (0.0, 0.0) and not self.has_gaussian and not self.has_jumps
        )

    @property
    def condition_b(self) -> bool:
        """dU > -1 almost surely (no jumps counts as true)."""
        return (not self.has_jumps) or self.jump_law.condition_b

    @property
    def l_subordinator(self) -> bool:
        """L has nondecreasing paths: b_L >= 0, no Gaussian L part, dL >= 0."""
        if self.drift[1] < 0 or self.sigma_l_sq != 0.0:
            return False
        return (not self.has_jumps) or self.jump_law.dl_nonnegative

    @property
    def neg_l_subordinator(self) -> bool:
        if self.drift[1] > 0 or self.sigma_l_sq != 0.0:
            return False
        return (not self.has_jumps) or self.jump_law.dl_nonpositive

    # -- triplet accessor ------------------------------------------------------

    def gamma(self) -> tuple[float, float]:
        """Triplet location gamma = b + intensity * E[z 1_{|z| <= 1}].

        Exact for point-mass laws; the truncation uses the Euclidean norm
        of the bivariate jump.
        """
        if not self.has_jumps:
            return self.drift
        comp = self.jump_law.expectation(
            lambda u, l: np.array([u, l]) * (math.hypot(u, l) <= 1.0)
        )
        return (
            self.drift[0] + self.jump_intensity * float(comp[0]),
            self.drift[1] + self.jump_intensity * float(comp[1]),
        )

    @staticmethod
    def from_gamma(gamma, gaussian_cov, jump_intensity=0.0, jump_law=None) -> "LevyModel2":
        """Build a model from the triplet location instead of genuine drift."""
        probe = LevyModel2(
            drift=(float(gamma[0]), float(gamma[1])),
            gaussian_cov=gaussian_cov,
            jump_intensity=jump_intensity,
            jump_law=jump_law,
        )
        if not probe.has_jumps:
            return probe
        comp = jump_law.expectation(
            lambda u, l: np.array([u, l]) * (math.hypot(u, l) <= 1.0)
        )
        b = (
            gamma[0] - jump_intensity * float(comp[0]),
            gamma[1] - jump_intensity * float(comp[1]),
        )
        return LevyModel2(b, gaussian_cov, jump_intensity, jump_law)


# ---------------------------------------------------------------------------
# triplet-level operations
# ---------------------------------------------------------------------------


def characteristic_exponent(model: LevyModel2, theta) -> complex:
    """psi(theta) with E exp(i theta . (U_t, L_t)) = exp(t psi(theta)).

    With genuine drift the jump term is simply
    intensity * (E exp(i theta . dZ) - 1); no compensator appears.
    """
    t1, t2 = float(theta[0]), float(theta[1])
    if not (math.isfinite(t1) and math.isfinite(t2)):
        raise ValueError("theta must be finite")
    b_u, b_l = model.drift
    (suu, sul), (_, sll) = model.gaussian_cov
    psi = 1j * (t1 * b_u + t2 * b_l)
    psi -= 0.5 * (t1 * t1 * suu + 2 * t1 * t2 * sul + t2 * t2 * sll)
    if model.has_jumps:
        psi += model.jump_intensity * (model.jump_law.cf(t1, t2) - 1.0)
    return psi


def dual_model(model_ul: LevyModel2) -> LevyModel2:
    """Law of the dual driving pair (W, K).

    Jumps map through (dU, dL) -> (-dU/(1+dU), -dL/(1+dU)); the genuine
    drift becomes (-b_U + sigma_U^2, -b_L + sigma_UL) and the Gaussian
    covariance is unchanged.  Requires condition (B).
    """
    if not model_ul.condition_b:
        raise ConditionError(
            "dual process does not exist: jump law puts mass on dU <= -1 "
            "(stochastic monotonicity fails)"
        )
    b_w = -model_ul.drift[0] + model_ul.sigma_u_sq
    b_k = -model_ul.drift[1] + model_ul.sigma_ul
    law = model_ul.jump_law.dual() if model_ul.has_jumps else None
    return LevyModel2(
        drift=(b_w, b_k),
        gaussian_cov=model_ul.gaussian_cov,
        jump_intensity=model_ul.jump_intensity,
        jump_law=law,
    )


def gamma_w_cutoff_form(model_ul: LevyModel2) -> float:
    """Triplet location of W computed with the z >= -1/2 cutoff form.

    gamma_W = -gamma_U + sigma_U^2
              + int (z 1_{|z|<=1} - z/(1+z) 1_{z >= -1/2}) nu_U(dz).
    The cutoff region {z >= -1/2} is exactly {|F(z)| <= 1}, so this agrees
    with the standard |z| <= 1 truncation of nu_W; both forms are exposed
    and tested against each other.  Point-mass laws only (marginal nu_U
    uses the scalar |z| <= 1 truncation).
    """
    if model_ul.has_jumps and model_ul.jump_law.kind != "point_mass":
        raise NotImplementedError("cutoff form implemented for point-mass laws")
    gamma_u = model_ul.drift[0]
    corr = 0.0
    if model_ul.has_jumps:
        gamma_u += model_ul.jump_intensity * model_ul.jump_law.expectation(
            lambda u, l: u * (abs(u) <= 1.0)
        )
        corr = model_ul.jump_intensity * model_ul.jump_law.expectation(
            lambda u, l: u * (abs(u) <= 1.0) - (u / (1.0 + u)) * (u >= -0.5)
        )
    return -gamma_u + model_ul.sigma_u_sq + corr


def gamma_w_direct_form(model_ul: LevyModel2) -> float:
    """Triplet location of W from the dual model's genuine drift."""
    dm = dual_model(model_ul)
    if not dm.has_jumps:
        return dm.drift[0]
    return dm.drift[0] + dm.jump_intensity * dm.jump_law.expectation(
        lambda w, k: w * (abs(w) <= 1.0)
    )


# ---------------------------------------------------------------------------
# degeneracy detection
# ---------------------------------------------------------------------------


def _candidate_k(model: LevyModel2) -> float | None:
    b_u, b_l = model.drift
    if b_u != 0.0:
        return -b_l / b_u
    if model.sigma_u_sq > 0.0:
        return -model.sigma_ul / model.sigma_u_sq
    if model.has_jumps and model.jump_law.kind == "point_mass":
        for (u, l), p in model.jump_law.atoms:
            if p > 0 and u != 0.0:
                return -l / u
    if model.has_jumps and model.jump_law.kind == "linked":
        c, s = model.jump_law.link
        if c == 0.0 and s != 0.0:
            return -s
    return None


def degeneracy_margin(model: LevyModel2, k: float) -> float:
    """Largest relative violation of k*U = -L for the given k."""
    b_u, b_l = model.drift
    scale = 1.0 + abs(k)
    worst = abs(k * b_u + b_l) / (scale * (1.0 + abs(b_u) + abs(b_l)))
    (suu, sul), (_, sll) = model.gaussian_cov
    gscale = scale * (1.0 + suu + abs(sul) + sll)
    worst = max(worst, abs(sul + k * suu) / gscale, abs(sll - k * k * suu) / gscale)
    if model.has_jumps:
        law = model.jump_law
        if law.kind == "point_mass":
            for (u, l), p in law.atoms:
                if p > 0:
                    worst = max(worst, abs(k * u + l) / (scale * (1.0 + abs(u) + abs(l))))
        elif law.kind == "linked":
            c, s = law.link
            worst = max(worst, (abs(c) + abs(k + s)) / scale)
        else:
            # continuous product laws cannot concentrate on a line
            return math.inf
    return worst


def detect_degeneracy(model: LevyModel2, tol: float = 1e-9) -> float | None:
    """Return k != 0 with k*U = -L almost surely, or None.

    Degeneracy needs every component of the model (drift, Gaussian part,
    all jumps) to live on the line {(u, -k u)}.
    """
    if model.is_zero:
        return None
    b_u, b_l = model.drift
    # an active L-feature without the matching U-feature kills degeneracy fast
    if b_u == 0.0 and b_l != 0.0 and model.sigma_u_sq == 0.0 and not model.has_jumps:
        return None
    k = _candidate_k(model)
    if k is None or k == 0.0:
        return None
    return k if degeneracy_margin(model, k) <= tol else None
