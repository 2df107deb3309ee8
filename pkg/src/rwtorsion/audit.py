"""Cross-checks between independently computed quantities.

Every inequality the library's quantities are known to satisfy is checked
numerically on a concrete space and domain.  Each check becomes a row with
the two sides, the slack (rhs - lhs), and a verdict; rows that do not
apply (for example bounds that require an exactly certified Cheeger
constant on a large domain) are reported as skipped rather than dropped,
so the report always has the same shape.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from typing import Optional

from .errors import ZeroG
from .geometry import EXHAUSTIVE_LIMIT, cheeger, is_calibrable, perimeter
from .space import FiniteRWSpace, is_m_connected, make_domain
from .torsion import (
    eigenvalue_exact,
    eigenvalue_limit,
    lambda_p_estimate,
    p_torsion,
    stress_solve,
)

_LIMIT_N = 30
_LIMIT_TOL = 1e-3


@dataclasses.dataclass(frozen=True)
class AuditRow:
    name: str
    statement: str
    lhs: Optional[float]
    rhs: Optional[float]
    slack: Optional[float]
    tol: float
    passed: Optional[bool]  # None means the check was skipped
    note: str = ""


@dataclasses.dataclass(frozen=True)
class AuditReport:
    rows: tuple[AuditRow, ...]
    metadata: dict

    @property
    def failures(self) -> tuple[AuditRow, ...]:
        return tuple(r for r in self.rows if r.passed is False)

    @property
    def all_passed(self) -> bool:
        return not self.failures


def audit(
    space: FiniteRWSpace,
    omega: Sequence[str],
    p_values: Sequence[float] = (1.5, 2.0, 3.0),
    rel_tol: float = 1e-8,
) -> AuditReport:
    """Run every applicable cross-check on (space, omega)."""
    domain = make_domain(space, omega)
    rows: list[AuditRow] = []

    def add(name: str, statement: str, lhs: float, rhs: float, note: str = "") -> None:
        tol = rel_tol * max(1.0, abs(lhs), abs(rhs))
        slack = rhs - lhs
        rows.append(AuditRow(name, statement, lhs, rhs, slack, tol, slack >= -tol, note))

    def skip(name: str, statement: str, note: str) -> None:
        rows.append(AuditRow(name, statement, None, None, None, 0.0, None, note))

    nu_omega = domain.nu_omega
    nu_closure = domain.nu_closure
    per = perimeter(space, domain.omega)
    rigidity = stress_solve(space, domain).rigidity
    lam = eigenvalue_exact(space, domain)

    exhaustive = domain.size <= EXHAUSTIVE_LIMIT
    mode = "exhaustive" if exhaustive else "greedy"
    h1 = cheeger(space, domain.omega, p=1.0, mode=mode)
    h1_note = "" if exhaustive else "greedy bound only"

    add("mass_vs_rigidity", "nu(omega) <= T(omega)", nu_omega, rigidity)
    add(
        "perimeter_vs_mass",
        "nu(omega) <= nu(omega)^2 / P(omega)",
        nu_omega,
        nu_omega**2 / per,
    )
    add(
        "polya_lower",
        "nu(omega)^2 / P(omega) <= T(omega)",
        nu_omega**2 / per,
        rigidity,
    )
    if lam > 0:
        add(
            "rigidity_vs_gap",
            "T(omega) <= nu(omega) / lambda(omega)",
            rigidity,
            nu_omega / lam,
        )
        add(
            "gap_vs_mass_ratio",
            "lambda(omega) <= nu(omega) / T(omega)",
            lam,
            nu_omega / rigidity,
        )
    else:
        note = f"skipped: eigenvalue {lam!r} is not positive"
        skip("rigidity_vs_gap", "T(omega) <= nu(omega) / lambda(omega)", note)
        skip("gap_vs_mass_ratio", "lambda(omega) <= nu(omega) / T(omega)", note)

    makai_stmt = "T(omega) <= nu(omega)^2 nu(closure) / (2 P(omega)^2)"
    if exhaustive and is_calibrable(space, domain.omega):
        add("makai_upper", makai_stmt, rigidity, nu_omega**2 * nu_closure / (2.0 * per**2))
    elif exhaustive:
        skip("makai_upper", makai_stmt, "skipped: omega is not calibrable")
    else:
        skip("makai_upper", makai_stmt, "skipped: calibrability needs exhaustive search")

    for p in p_values:
        tag = f"{p:g}"
        lower_stmt = f"2^(p-1) h_1^p / nu(closure)^(p-1) <= 1/T_p at p={tag}"
        upper_stmt = f"1/T_p <= h_p at p={tag}"
        lam_up_stmt = f"lambda_p estimate <= h_1 at p={tag}"
        lam_low_stmt = f"(h_1/p)^p <= lambda_p estimate at p={tag}"
        if p <= 1.0:
            note = "skipped: p-torsion rows need p > 1"
            skip(f"sandwich_lower_p{tag}", lower_stmt, note)
            skip(f"sandwich_upper_p{tag}", upper_stmt, note)
            skip(f"lambda_upper_p{tag}", lam_up_stmt, note)
            skip(f"lambda_lower_p{tag}", lam_low_stmt, note)
            continue

        inv_tp = 1.0 / p_torsion(space, domain, p).rigidity_p
        hp = cheeger(space, domain.omega, p=p, mode=mode)
        if exhaustive:
            add(
                f"sandwich_lower_p{tag}",
                lower_stmt,
                2.0 ** (p - 1.0) * h1.value**p / nu_closure ** (p - 1.0),
                inv_tp,
            )
        else:
            skip(
                f"sandwich_lower_p{tag}",
                lower_stmt,
                "skipped: needs the exact Cheeger constant, greedy bound only",
            )
        # A bound that overestimates h_p keeps this side valid.
        add(f"sandwich_upper_p{tag}", upper_stmt, inv_tp, hp.value, note=h1_note)

        est = lambda_p_estimate(space, domain, p).value
        # The estimate descends from the indicator of the Cheeger argmin,
        # so it never exceeds the h_1 value it started from.
        add(f"lambda_upper_p{tag}", lam_up_stmt, est, h1.value, note=h1_note)
        if exhaustive:
            add(f"lambda_lower_p{tag}", lam_low_stmt, (h1.value / p) ** p, est)
        else:
            skip(
                f"lambda_lower_p{tag}",
                lam_low_stmt,
                "skipped: needs the exact Cheeger constant, greedy bound only",
            )

    limit_stmt = f"|limit-formula eigenvalue at n={_LIMIT_N} - exact| <= {_LIMIT_TOL:g}"
    try:
        limit = eigenvalue_limit(space, domain, _LIMIT_N)
    except ZeroG as exc:
        skip("eigen_limit_agreement", limit_stmt, f"skipped: {exc}")
    else:
        diff = abs(limit - lam)
        rows.append(
            AuditRow(
                "eigen_limit_agreement",
                limit_stmt,
                diff,
                _LIMIT_TOL,
                _LIMIT_TOL - diff,
                0.0,
                diff <= _LIMIT_TOL,
            )
        )

    metadata = {
        "n_states": space.n_states,
        "omega_size": domain.size,
        "nu_omega": nu_omega,
        "nu_closure": nu_closure,
        "perimeter": per,
        "rigidity": rigidity,
        "eigenvalue": lam,
        "m_connected": is_m_connected(space, domain.omega),
        "cheeger_h1": h1.value,
        "cheeger_mode": mode,
        "p_values": [float(p) for p in p_values],
    }
    return AuditReport(rows=tuple(rows), metadata=metadata)
