"""Mixing distributions on [0, 1].

A :class:`MixingDistribution` is the law of the Mixup coefficient λ.  Three
kinds are supported:

- ``beta``: the symmetric Beta(α, α) family;
- ``uniform``: Beta(1, 1), handled in closed form;
- ``tabulated``: a user-supplied density on a grid, read with linear
  interpolation between nodes and zero outside the grid.

All queries are exact up to floating point: the Beta CDF is the regularized
incomplete beta function evaluated with Lentz's continued fraction, and the
tabulated CDF and moments integrate the piecewise-linear density in closed
form.

Usage::

    from mixup_optimal.mixing import MixingDistribution

    dist = MixingDistribution.beta(32.0)
    dist.interval_mass(0.45, 0.55)
    dist.interval_first_moment(0.0, 0.5)
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from mixup_optimal.constants import (
    BETACF_EPS,
    BETACF_MAX_ITER,
    BETACF_TINY,
    DENSITY_MASS_TOL,
    MIN_QUADRATURE_NODES,
    MIN_SUPPORTED_ALPHA,
    QUADRATURE_SIGMA_WINDOW,
)
from mixup_optimal.exceptions import (
    ContractError,
    ConvergenceError,
    InvalidDistributionError,
    UnsupportedDistributionWarning,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


class DistributionKind(str, Enum):
    BETA = "beta"
    UNIFORM = "uniform"
    TABULATED = "tabulated"


# ---------------------------------------------------------------------------
# Regularized incomplete beta function
# ---------------------------------------------------------------------------


def _betacf(a: float, b: float, x: FloatArray) -> FloatArray:
    """Continued fraction for I_x(a, b), modified Lentz, vectorised over x."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < BETACF_TINY, BETACF_TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < BETACF_TINY, BETACF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < BETACF_TINY, BETACF_TINY, c)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < BETACF_TINY, BETACF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < BETACF_TINY, BETACF_TINY, c)
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) < BETACF_EPS):
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}",
        iterations=BETACF_MAX_ITER,
    )


def betainc(a: float, b: float, x: ArrayLike) -> FloatArray:
    """Regularized incomplete beta function I_x(a, b).

    Parameters
    ----------
    a, b:
        Positive shape parameters.
    x:
        Points in [0, 1]; values outside are clamped.

    Returns
    -------
    numpy.ndarray:
        I_x(a, b) with the same shape as *x*.
    """
    shape = np.shape(x)
    xs = np.clip(np.atleast_1d(np.asarray(x, dtype=np.float64)), 0.0, 1.0).ravel()
    out = np.zeros_like(xs)
    out[xs >= 1.0] = 1.0
    inner = (xs > 0.0) & (xs < 1.0)
    if not np.any(inner):
        return out.reshape(shape)
    xi = xs[inner]
    log_front = a * np.log(xi) + b * np.log1p(-xi) - special.betaln(a, b)
    front = np.exp(log_front)
    swap = xi > (a + 1.0) / (a + b + 2.0)
    res = np.empty_like(xi)
    if np.any(~swap):
        direct = xi[~swap]
        res[~swap] = front[~swap] * _betacf(a, b, direct) / a
    if np.any(swap):
        mirrored = 1.0 - xi[swap]
        res[swap] = 1.0 - front[swap] * _betacf(b, a, mirrored) / b
    out[inner] = np.clip(res, 0.0, 1.0)
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Distribution value
# ---------------------------------------------------------------------------


def _scalar_or_array(values: FloatArray, *like: Any) -> Any:
    if all(np.ndim(item) == 0 for item in like):
        return float(np.asarray(values).reshape(-1)[0])
    return values


@dataclass(frozen=True, eq=False)
class MixingDistribution:
    """Law of the mixing coefficient λ on [0, 1].

    Build instances with :meth:`beta`, :meth:`uniform`, :meth:`tabulated`
    or :meth:`from_spec`; values are immutable and safe to share.

    Parameters
    ----------
    kind:
        Which family the distribution belongs to.
    alpha:
        Beta(α, α) parameter for ``kind == beta``.
    grid:
        Strictly increasing λ nodes in [0, 1] for ``kind == tabulated``.
    values:
        Density at each node, already renormalised to integrate to one.
    renormalization:
        Factor the user-supplied table was multiplied by (1.0 otherwise).
    """

    kind: DistributionKind
    alpha: float | None = None
    grid: FloatArray | None = field(default=None, repr=False)
    values: FloatArray | None = field(default=None, repr=False)
    renormalization: float = 1.0
    _cum_mass: FloatArray | None = field(default=None, init=False, repr=False)
    _cum_moment: FloatArray | None = field(default=None, init=False, repr=False)
    _symmetric: bool = field(default=True, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind is DistributionKind.BETA:
            alpha = self.alpha
            if alpha is None or not math.isfinite(alpha) or alpha <= 0:
                raise InvalidDistributionError(
                    f"Beta(α, α) requires α > 0, got {alpha!r}"
                )
            if alpha < MIN_SUPPORTED_ALPHA:
                msg = (
                    f"Beta({alpha}, {alpha}) has α < {MIN_SUPPORTED_ALPHA}; "
                    "limit-oracle results are unsupported for this density"
                )
                warnings.warn(msg, UnsupportedDistributionWarning, stacklevel=3)
                logger.warning(msg)
        elif self.kind is DistributionKind.TABULATED:
            if self.grid is None or self.values is None:
                raise InvalidDistributionError(
                    "tabulated density needs grid and values"
                )
            cum_mass, cum_moment = _segment_cumulatives(self.grid, self.values)
            object.__setattr__(self, "_cum_mass", cum_mass)
            object.__setattr__(self, "_cum_moment", cum_moment)
            object.__setattr__(self, "_symmetric", self._detect_symmetry())

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def beta(cls, alpha: float) -> MixingDistribution:
        """Return the symmetric Beta(α, α) distribution."""
        return cls(kind=DistributionKind.BETA, alpha=float(alpha))

    @classmethod
    def uniform(cls) -> MixingDistribution:
        """Return the uniform distribution on [0, 1]."""
        return cls(kind=DistributionKind.UNIFORM)

    @classmethod
    def tabulated(
        cls, lambdas: ArrayLike, densities: ArrayLike
    ) -> MixingDistribution:
        """Build a distribution from density samples on a λ grid.

        The table is read as a piecewise-linear density (trapezoid rule) and
        renormalised to integrate to one; the factor used is kept in
        :attr:`renormalization`.

        Raises
        ------
        InvalidDistributionError
            If the grid is not strictly increasing inside [0, 1], a density is
            negative or non-finite, or the table has zero mass.
        """
        grid = np.asarray(lambdas, dtype=np.float64).ravel()
        dens = np.asarray(densities, dtype=np.float64).ravel()
        if grid.size != dens.size or grid.size < 2:
            raise InvalidDistributionError(
                "tabulated density needs at least two (lambda, density) pairs"
            )
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(dens)):
            raise InvalidDistributionError("tabulated density has non-finite entries")
        if grid[0] < 0.0 or grid[-1] > 1.0 or np.any(np.diff(grid) <= 0.0):
            raise InvalidDistributionError(
                "tabulated lambdas must be strictly increasing inside [0, 1]"
            )
        if np.any(dens < 0.0):
            raise InvalidDistributionError("tabulated density has negative entries")
        total = float(np.sum(np.diff(grid) * (dens[:-1] + dens[1:]) / 2.0))
        if total <= 0.0:
            raise InvalidDistributionError("tabulated density has zero total mass")
        factor = 1.0 / total
        if abs(factor - 1.0) > DENSITY_MASS_TOL:
            logger.info("renormalised tabulated density by factor %.12g", factor)
        grid.setflags(write=False)
        scaled = dens * factor
        scaled.setflags(write=False)
        return cls(
            kind=DistributionKind.TABULATED,
            grid=grid,
            values=scaled,
            renormalization=factor,
        )

    @classmethod
    def from_spec(
        cls,
        kind: str,
        alpha: float | None = None,
        density_csv: str | Path | None = None,
    ) -> MixingDistribution:
        """Resolve a CLI-style mixing spec (``beta``/``uniform``/``tabulated``)."""
        try:
            resolved = DistributionKind(kind)
        except ValueError:
            raise InvalidDistributionError(f"unknown mixing kind {kind!r}") from None
        if resolved is DistributionKind.BETA:
            if alpha is None:
                raise InvalidDistributionError("beta mixing requires alpha")
            return cls.beta(alpha)
        if resolved is DistributionKind.UNIFORM:
            return cls.uniform()
        if density_csv is None:
            raise InvalidDistributionError("tabulated mixing requires a density CSV")
        return load_density_csv(density_csv)

    # ------------------------------------------------------------------
    # Properties
    # ------------------------------------------------------------------

    @property
    def symmetric(self) -> bool:
        """``True`` when P_f([a, b]) = P_f([1−b, 1−a]) for all intervals."""
        return self._symmetric

    @property
    def label(self) -> str:
        """Short human-readable name, e.g. ``beta(32)``."""
        if self.kind is DistributionKind.BETA:
            return f"beta({self.alpha:g})"
        if self.kind is DistributionKind.UNIFORM:
            return "uniform"
        return f"tabulated({len(self.grid) if self.grid is not None else 0})"

    @property
    def mean(self) -> float:
        return float(self.interval_first_moment(0.0, 1.0))

    @property
    def variance(self) -> float:
        """Variance of λ; 1/(8α+4) for Beta(α, α)."""
        if self.kind is DistributionKind.BETA:
            assert self.alpha is not None
            return 1.0 / (8.0 * self.alpha + 4.0)
        if self.kind is DistributionKind.UNIFORM:
            return 1.0 / 12.0
        assert self.grid is not None and self.values is not None
        nodes, weights = np.polynomial.legendre.leggauss(4)
        second = 0.0
        for lo, hi, f_lo, f_hi in zip(
            self.grid[:-1], self.grid[1:], self.values[:-1], self.values[1:]
        ):
            half = 0.5 * (hi - lo)
            lam = 0.5 * (hi + lo) + half * nodes
            dens = f_lo + (f_hi - f_lo) * (lam - lo) / (hi - lo)
            second += float(np.sum(weights * half * lam**2 * dens))
        mean = self.mean
        return second - mean * mean

    # ------------------------------------------------------------------
    # Exact queries
    # ------------------------------------------------------------------

    def density(self, lam: ArrayLike) -> Any:
        """Density f(λ); zero outside [0, 1]."""
        x = np.atleast_1d(np.asarray(lam, dtype=np.float64))
        if self.kind is DistributionKind.UNIFORM:
            out = np.where((x >= 0.0) & (x <= 1.0), 1.0, 0.0)
        elif self.kind is DistributionKind.TABULATED:
            assert self.grid is not None and self.values is not None
            out = np.interp(x, self.grid, self.values, left=0.0, right=0.0)
        else:
            assert self.alpha is not None
            a = self.alpha
            out = np.zeros_like(x)
            inner = (x > 0.0) & (x < 1.0)
            xi = x[inner]
            out[inner] = np.exp(
                (a - 1.0) * (np.log(xi) + np.log1p(-xi)) - special.betaln(a, a)
            )
            edge = (x == 0.0) | (x == 1.0)
            if a == 1.0:
                out[edge] = 1.0
            elif a < 1.0:
                out[edge] = np.inf
        values = np.asarray(out, dtype=np.float64).reshape(np.shape(lam))
        return _scalar_or_array(values, lam)

    def cdf(self, x: ArrayLike) -> Any:
        """Return P_f([0, x]) for *x* in [0, 1].

        Raises
        ------
        ContractError
            If *x* lies outside [0, 1].
        """
        xs = np.asarray(x, dtype=np.float64)
        if np.any(xs < 0.0) or np.any(xs > 1.0) or np.any(np.isnan(xs)):
            raise ContractError(f"cdf argument must lie in [0, 1], got {x!r}")
        return _scalar_or_array(self._cdf(xs), x)

    def interval_mass(self, a: ArrayLike, b: ArrayLike) -> Any:
        """P_f([a, b]) after clamping to [0, 1]; zero when a > b."""
        lo, hi = self._clamp(a, b)
        mass = np.where(hi > lo, self._cdf(hi) - self._cdf(lo), 0.0)
        return _scalar_or_array(np.maximum(mass, 0.0), a, b)

    def interval_first_moment(self, a: ArrayLike, b: ArrayLike) -> Any:
        """∫_a^b λ f(λ) dλ after clamping to [0, 1]; zero when a > b."""
        lo, hi = self._clamp(a, b)
        moment = np.where(hi > lo, self._moment(hi) - self._moment(lo), 0.0)
        return _scalar_or_array(np.maximum(moment, 0.0), a, b)

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one λ from *rng*."""
        return float(self.samples(rng, 1)[0])

    def samples(self, rng: np.random.Generator, size: int) -> FloatArray:
        """Draw *size* values of λ.

        Beta draws use a ``(size, 2)`` array of Gamma(α) variates, so the
        first n values of a longer stream equal a shorter stream from the
        same seed.
        """
        if self.kind is DistributionKind.UNIFORM:
            return rng.random(size)
        if self.kind is DistributionKind.BETA:
            assert self.alpha is not None
            gammas = rng.standard_gamma(self.alpha, size=(size, 2))
            total = gammas.sum(axis=1)
            safe = np.where(total > 0.0, total, 1.0)
            return np.where(total > 0.0, gammas[:, 0] / safe, 0.5)
        return self.ppf(rng.random(size))

    def ppf(self, u: ArrayLike) -> Any:
        """Inverse CDF.  Exact for tabulated and uniform kinds."""
        us = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
        if self.kind is DistributionKind.UNIFORM:
            return _scalar_or_array(us, u)
        if self.kind is DistributionKind.BETA:
            assert self.alpha is not None
            return _scalar_or_array(
                np.asarray(special.betaincinv(self.alpha, self.alpha, us)), u
            )
        assert self.grid is not None and self.values is not None
        assert self._cum_mass is not None
        seg = np.clip(
            np.searchsorted(self._cum_mass, us, side="right") - 1,
            0,
            len(self.grid) - 2,
        )
        lo = self.grid[seg]
        width = self.grid[seg + 1] - lo
        f_lo = self.values[seg]
        slope = (self.values[seg + 1] - f_lo) / width
        rest = np.maximum(us - self._cum_mass[seg], 0.0)
        root = np.sqrt(np.maximum(f_lo * f_lo + 2.0 * slope * rest, 0.0))
        denom = f_lo + root
        step = np.where(denom > 0.0, 2.0 * rest / np.where(denom > 0, denom, 1.0), 0.0)
        return _scalar_or_array(lo + np.clip(step, 0.0, width), u)

    # ------------------------------------------------------------------
    # Quadrature
    # ------------------------------------------------------------------

    def quadrature(self, n_nodes: int) -> tuple[FloatArray, FloatArray]:
        """Gauss–Legendre nodes and density weights for E_λ[·].

        Nodes are placed on the window carrying the mass (Beta: ½ ± 12σ,
        clipped to [0, 1]; tabulated: the grid span) and weights are
        normalised to sum to one.
        """
        if n_nodes < MIN_QUADRATURE_NODES:
            raise ContractError(
                f"quadrature needs at least {MIN_QUADRATURE_NODES} nodes, got {n_nodes}"
            )
        if self.kind is DistributionKind.TABULATED:
            assert self.grid is not None
            lo, hi = float(self.grid[0]), float(self.grid[-1])
        elif self.kind is DistributionKind.BETA:
            half = min(0.5, QUADRATURE_SIGMA_WINDOW * math.sqrt(self.variance))
            lo, hi = 0.5 - half, 0.5 + half
        else:
            lo, hi = 0.0, 1.0
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        half_width = 0.5 * (hi - lo)
        nodes = 0.5 * (hi + lo) + half_width * x
        weights = w * half_width * np.asarray(self.density(nodes), dtype=np.float64)
        return nodes, weights / weights.sum()

    # ------------------------------------------------------------------
    # Serialisation
    # ------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.grid is not None and self.values is not None:
            out["lambdas"] = self.grid.tolist()
            out["density"] = self.values.tolist()
            out["renormalization"] = self.renormalization
        return out

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    @staticmethod
    def _clamp(a: ArrayLike, b: ArrayLike) -> tuple[FloatArray, FloatArray]:
        lo = np.clip(np.asarray(a, dtype=np.float64), 0.0, 1.0)
        hi = np.clip(np.asarray(b, dtype=np.float64), 0.0, 1.0)
        return np.broadcast_arrays(lo, hi)

    def _cdf(self, x: FloatArray) -> FloatArray:
        if self.kind is DistributionKind.UNIFORM:
            return np.clip(x, 0.0, 1.0)
        if self.kind is DistributionKind.BETA:
            assert self.alpha is not None
            return betainc(self.alpha, self.alpha, x)
        return self._tabulated_integral(x, moment=False)

    def _moment(self, x: FloatArray) -> FloatArray:
        if self.kind is DistributionKind.UNIFORM:
            c = np.clip(x, 0.0, 1.0)
            return 0.5 * c * c
        if self.kind is DistributionKind.BETA:
            assert self.alpha is not None
            return 0.5 * betainc(self.alpha + 1.0, self.alpha, x)
        return self._tabulated_integral(x, moment=True)

    def _tabulated_integral(self, x: FloatArray, *, moment: bool) -> FloatArray:
        assert self.grid is not None and self.values is not None
        assert self._cum_mass is not None and self._cum_moment is not None
        grid, vals = self.grid, self.values
        cum = self._cum_moment if moment else self._cum_mass
        xs = np.clip(np.asarray(x, dtype=np.float64), grid[0], grid[-1])
        seg = np.clip(np.searchsorted(grid, xs, side="right") - 1, 0, len(grid) - 2)
        g = grid[seg]
        f = vals[seg]
        slope = (vals[seg + 1] - f) / (grid[seg + 1] - g)
        t = xs - g
        if moment:
            partial = g * f * t + (g * slope + f) * t**2 / 2.0 + slope * t**3 / 3.0
        else:
            partial = f * t + slope * t**2 / 2.0
        return np.asarray(cum[seg] + partial, dtype=np.float64)

    def _detect_symmetry(self) -> bool:
        assert self.grid is not None and self.values is not None
        points = np.union1d(self.grid, 1.0 - self.grid)
        forward = np.interp(points, self.grid, self.values, left=0.0, right=0.0)
        mirrored = np.interp(1.0 - points, self.grid, self.values, left=0.0, right=0.0)
        scale = max(float(np.max(self.values)), 1.0)
        return bool(np.max(np.abs(forward - mirrored)) <= 1e-9 * scale)


def _segment_cumulatives(
    grid: FloatArray, values: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Mass and first moment accumulated up to each grid node."""
    width = np.diff(grid)
    f_lo = values[:-1]
    slope = np.diff(values) / width
    g = grid[:-1]
    mass = f_lo * width + slope * width**2 / 2.0
    moment = (
        g * f_lo * width
        + (g * slope + f_lo) * width**2 / 2.0
        + slope * width**3 / 3.0
    )
    cum_mass = np.concatenate([[0.0], np.cumsum(mass)])
    cum_moment = np.concatenate([[0.0], np.cumsum(moment)])
    return cum_mass, cum_moment


# ---------------------------------------------------------------------------
# Module-level helpers
# ---------------------------------------------------------------------------


def alpha_threshold(eps: float) -> float:
    """Smallest α for which Beta(α, α) puts more than ½ its mass within ε of ½.

    Returns ½(ln 4 / ε² − 1).  Any α strictly above this value satisfies
    P(|λ − ½| ≤ ε) > ½ by the strictly subgaussian tail bound.

    Raises
    ------
    ContractError
        If ``eps <= 0``.
    """
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps!r}")
    return 0.5 * (math.log(4.0) / (eps * eps) - 1.0)


def load_density_csv(path: str | Path) -> MixingDistribution:
    """Read a tabulated density from a CSV with header ``lambda,density``.

    Raises
    ------
    InvalidDistributionError
        On a missing header, non-numeric fields (the message names the line),
        or any table rejected by :meth:`MixingDistribution.tabulated`.
    """
    lambdas: list[float] = []
    densities: list[float] = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["lambda", "density"]:
            raise InvalidDistributionError(
                f"{path}: expected header 'lambda,density', got {header!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InvalidDistributionError(
                    f"{path}:{line_no}: expected 2 fields, got {len(row)}"
                )
            try:
                lambdas.append(float(row[0]))
                densities.append(float(row[1]))
            except ValueError:
                raise InvalidDistributionError(
                    f"{path}:{line_no}: non-numeric field in {row!r}"
                ) from None
    return MixingDistribution.tabulated(lambdas, densities)
