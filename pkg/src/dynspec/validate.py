from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ALIGNMENT_TOL, MIXING_POWER_CAP
from .errors import InputError, NotAPartition, NotExpanding, NotMarkov
from .map_model import (
    PiecewiseLinearMarkovMap,
    TransitionMatrix,
    is_topologically_mixing,
    markov_entries,
)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    transition: TransitionMatrix | None = None
    failures: list[InputError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_for_errors(self) -> None:
        if self.failures:
            raise self.failures[0]

    def as_dict(self) -> dict[str, object]:
        payload: dict[str, object] = {
            "ok": self.ok,
            "checks": dict(self.checks),
            "errors": list(self.errors),
            "warnings": list(self.warnings),
        }
        if self.transition is not None:
            payload["transition_matrix"] = self.transition.entries.tolist()
            payload["mixing_power"] = self.transition.mixing_power
        return payload


def validate_map(
    fmap: PiecewiseLinearMarkovMap, tol: float = ALIGNMENT_TOL
) -> ValidationReport:
    report = ValidationReport()
    _validate_partition(fmap, tol, report)
    _validate_expansivity(fmap, report)
    entries = _validate_markov(fmap, tol, report)

    if report.ok and entries is not None:
        power = is_topologically_mixing(entries, MIXING_POWER_CAP)
        report.transition = TransitionMatrix(entries, power)
        report.checks["mixing"] = power is not None
        if power is None:
            report.warnings.append(
                f"Transition matrix is not primitive within p <= {MIXING_POWER_CAP}"
            )
    return report


def _validate_partition(
    fmap: PiecewiseLinearMarkovMap, tol: float, report: ValidationReport
) -> None:
    # Construction already rejects gaps; this guards against degenerate elements.
    lengths = fmap.lengths
    ok = bool(np.all(lengths > tol))
    report.checks["partition"] = ok
    if not ok:
        index = int(np.argmin(lengths))
        message = f"Partition element {index} is shorter than tolerance {tol}"
        report.errors.append(message)
        report.failures.append(NotAPartition(message))


def _validate_expansivity(
    fmap: PiecewiseLinearMarkovMap, report: ValidationReport
) -> None:
    ok = True
    for index, slope in enumerate(fmap.slopes):
        if abs(slope) <= 1.0:
            ok = False
            error = NotExpanding(index, slope)
            report.errors.append(str(error))
            report.failures.append(error)
    report.checks["expanding"] = ok


def _validate_markov(
    fmap: PiecewiseLinearMarkovMap, tol: float, report: ValidationReport
) -> np.ndarray | None:
    entries, problems = markov_entries(fmap, tol)
    report.checks["markov"] = not problems
    for problem in problems:
        error = NotMarkov(
            problem.branch,
            problem.element,
            f"Branch {problem.branch} image endpoint {problem.endpoint!r} is not a "
            f"partition breakpoint (inside element {problem.element})",
        )
        report.errors.append(str(error))
        report.failures.append(error)
    return None if problems else entries
