"""Polynomial Hamiltonian data: potentials, derivatives, series truncation.

The kinetic term p^2/2m is implicit; ``PolynomialPotential`` holds the
polynomial part U.  Mixed U(p, q) is restricted to sums of a pure-q and a
pure-p polynomial; general cross terms are an extension point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError


@dataclass(frozen=True)
class PolynomialPotential:
    """U(q) = sum_k coeffs_q[k] q^k, plus optional pure-p terms.

    ``coeffs_p[k]`` is the coefficient of p^k; cross terms p^a q^b with both
    a, b > 0 are not representable in v1.
    """

    coeffs_q: tuple = ()
    coeffs_p: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs_q", _canonical(self.coeffs_q))
        object.__setattr__(self, "coeffs_p", _canonical(self.coeffs_p))

    @property
    def degree(self) -> int:
        dq = len(self.coeffs_q) - 1
        dp = len(self.coeffs_p) - 1
        return max(dq, dp, 0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs_q and not self.coeffs_p

    @property
    def pure_q(self) -> bool:
        return len(self.coeffs_p) == 0

    def __call__(self, q, p=0.0):
        out = np.polynomial.polynomial.polyval(q, self.coeffs_q) if self.coeffs_q else 0.0
        if self.coeffs_p:
            out = out + np.polynomial.polynomial.polyval(p, self.coeffs_p)
        return out

    def scaled(self, factor: float) -> "PolynomialPotential":
        return PolynomialPotential(
            coeffs_q=tuple(factor * c for c in self.coeffs_q),
            coeffs_p=tuple(factor * c for c in self.coeffs_p),
        )

    def __add__(self, other: "PolynomialPotential") -> "PolynomialPotential":
        nq = max(len(self.coeffs_q), len(other.coeffs_q))
        np_ = max(len(self.coeffs_p), len(other.coeffs_p))
        cq = [0.0] * nq
        cp = [0.0] * np_
        for src in (self, other):
            for k, c in enumerate(src.coeffs_q):
                cq[k] += c
            for k, c in enumerate(src.coeffs_p):
                cp[k] += c
        return PolynomialPotential(coeffs_q=tuple(cq), coeffs_p=tuple(cp))


def _canonical(coeffs) -> tuple:
    c = list(float(x) for x in coeffs)
    while c and c[-1] == 0.0:
        c.pop()
    return tuple(c)


def derivative(U: PolynomialPotential, order: int = 1) -> PolynomialPotential:
    """Exact d^order/dq^order of the pure-q part (p part differentiates to 0)."""
    if order < 0:
        raise ContractError("derivative order must be non-negative")
    cq = np.array(U.coeffs_q, dtype=float)
    for _ in range(order):
        if cq.size == 0:
            break
        cq = cq[1:] * np.arange(1, cq.size)
    return PolynomialPotential(coeffs_q=tuple(cq))


def p_derivative(U: PolynomialPotential, order: int = 1) -> PolynomialPotential:
    """Exact d^order/dp^order of the pure-p part."""
    if order < 0:
        raise ContractError("derivative order must be non-negative")
    cp = np.array(U.coeffs_p, dtype=float)
    for _ in range(order):
        if cp.size == 0:
            break
        cp = cp[1:] * np.arange(1, cp.size)
    return PolynomialPotential(coeffs_p=tuple(cp))


def moyal_truncation(U: PolynomialPotential) -> int:
    """Largest l with nonvanishing (2l+1)-th q-derivative; -1 if none.

    Quadratic U keeps only the l = 0 classical force term; the hbar series of
    the evolution equation terminates at this l for polynomial U.
    """
    L = -1
    l = 0
    while 2 * l + 1 <= max(len(U.coeffs_q) - 1, 0):
        if not derivative(U, 2 * l + 1).is_zero:
            L = l
        l += 1
    return L


def fock_potential(U0: float, g: PolynomialPotential, n: int) -> PolynomialPotential:
    """Effective potential U_n(x) = U0 * n * g(x) for the n-photon Fock level."""
    if n < 0:
        raise ContractError("Fock level must be non-negative")
    return g.scaled(U0 * float(n))


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters shared by all assemblies."""

    mass: float = 1.0
    hbar: float = 1.0
    gamma: float = 0.0
    diffusion: float = 0.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigurationError("mass must be positive")
        if self.hbar <= 0:
            raise ConfigurationError("hbar must be positive")
        if self.gamma < 0:
            raise ConfigurationError("gamma must be non-negative")
        if self.diffusion < 0:
            raise ConfigurationError("diffusion must be non-negative")


_TERM_RE = re.compile(
    r"""
    (?P<sign>[+-]?)\s*
    (?:
        (?P<coef>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)\s*
        (?:\*\s*(?P<var1>[qp])(?:\^(?P<pow1>\d+))?)?
      |
        (?P<var2>[qp])(?:\^(?P<pow2>\d+))?
    )
    \s*
    """,
    re.VERBOSE,
)


def parse_potential(text: str) -> PolynomialPotential:
    """Parse "c0 + c1*q + c2*q^2 + ..." (q and/or p terms, decimal or sci notation)."""
    s = text.strip()
    if not s:
        return PolynomialPotential()
    cq: dict = {}
    cp: dict = {}
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ConfigurationError(
                f"cannot parse potential {text!r} at position {pos}: {s[pos:pos+12]!r}"
            )
        sign = m.group("sign")
        if not first and sign == "":
            raise ConfigurationError(
                f"missing +/- between terms in potential {text!r} at position {pos}"
            )
        val = -1.0 if sign == "-" else 1.0
        coef = m.group("coef")
        if coef is not None:
            val *= float(coef)
        var = m.group("var1") or m.group("var2")
        power = 0
        if var is not None:
            pw = m.group("pow1") or m.group("pow2")
            power = int(pw) if pw else 1
        target = cq if var in (None, "q") else cp
        target[power] = target.get(power, 0.0) + val
        pos = m.end()
        first = False
    nq = max(cq.keys(), default=-1) + 1
    np_ = max(cp.keys(), default=-1) + 1
    return PolynomialPotential(
        coeffs_q=tuple(cq.get(k, 0.0) for k in range(nq)),
        coeffs_p=tuple(cp.get(k, 0.0) for k in range(np_)),
    )
