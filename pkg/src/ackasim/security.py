"""Security figures of merit: guessing probabilities, entropy, key rates.

Everything here is deterministic arithmetic on observed round counts and a
target state fidelity.  The three guessing probabilities answer, in order:
how often an adversary picks the KeyGen round when no verification failure
is tolerated (1/D), when every observed failure is blamed on it
((1 + eta*(D-1))/D), and when failures explained by the known state
fidelity are first subtracted (eta replaced by eta' = max(0, eta - (1 -
sqrt(F)))).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

CSV_HEADER = (
    "D_eff,eta,r_f,eta_prime,p_no_fail,p_worst,p_corrected,h_worst,h_corrected,key_rate"
)


@dataclass(frozen=True)
class SecurityInputs:
    num_keygen: int
    num_verification: int
    num_verification_failed: int
    fidelity_F: float
    raw_rate: float | None = None

    def __post_init__(self) -> None:
        if self.num_keygen < 1:
            raise ValueError("at least one KeyGen round is required to define D")
        if self.num_verification < 0 or self.num_verification_failed < 0:
            raise ValueError("round counts must be nonnegative")
        if self.num_verification_failed > self.num_verification:
            raise ValueError("cannot fail more verification rounds than were run")
        if not 0.0 < self.fidelity_F <= 1.0:
            raise ValueError(f"fidelity must be in (0, 1], got {self.fidelity_F}")
        if self.raw_rate is not None and self.raw_rate < 0:
            raise ValueError("raw_rate must be nonnegative")


@dataclass(frozen=True)
class SecurityReport:
    D_eff: float
    eta: float
    r_f: float
    eta_prime: float
    p_no_fail: float
    p_worst: float
    p_corrected: float
    h_worst: float
    h_corrected: float
    effective_key_rate: float | None = None

    def __post_init__(self) -> None:
        probs = (self.p_no_fail, self.p_worst, self.p_corrected)
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("guessing probabilities must be in [0, 1]")
        if self.eta_prime > self.eta + 1e-12:
            raise ValueError("eta_prime cannot exceed eta")
        if self.p_corrected > self.p_worst + 1e-12:
            raise ValueError("p_corrected cannot exceed p_worst")
        if self.p_no_fail > self.p_worst + 1e-12:
            raise ValueError("p_no_fail cannot exceed p_worst")


def effective_d(num_keygen: int, num_verification: int) -> float:
    """Observed security parameter: total rounds per KeyGen round."""
    if num_keygen < 1:
        raise ValueError("effective D is undefined without KeyGen rounds")
    value = (num_keygen + num_verification) / num_keygen
    if value < 2.0:
        warnings.warn(
            f"effective D = {value:.4g} is below the protocol minimum of 2",
            stacklevel=2,
        )
    return value


def failure_rate(num_verification_failed: int, num_verification: int) -> float:
    if num_verification < 1:
        raise ValueError("failure rate is undefined without verification rounds")
    if not 0 <= num_verification_failed <= num_verification:
        raise ValueError("failed count must lie in 0..num_verification")
    return num_verification_failed / num_verification


def guess_prob_no_fail(d: float) -> float:
    """1/D: guessing odds when no verification failure is tolerated."""
    if d < 1:
        raise ValueError(f"D must be at least 1, got {d}")
    return 1.0 / d


def guess_prob_worst(d: float, eta: float) -> float:
    """(1 + eta*(D-1))/D, capped at 1: every failure blamed on the adversary."""
    if d < 1:
        raise ValueError(f"D must be at least 1, got {d}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    return min(1.0, (1.0 + eta * (d - 1.0)) / d)


def fidelity_failure_floor(fidelity: float) -> float:
    """Lower bound 1 - sqrt(F) on the honest verification failure rate."""
    if not 0.0 < fidelity <= 1.0:
        raise ValueError(f"fidelity must be in (0, 1], got {fidelity}")
    return 1.0 - math.sqrt(fidelity)


def corrected_eta(eta: float, fidelity: float) -> float:
    """max(0, eta - (1 - sqrt(F))): failures not explained by the state."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    return max(0.0, eta - fidelity_failure_floor(fidelity))


def binary_entropy(p: float) -> float:
    """-p log2 p - (1-p) log2 (1-p), with the endpoints defined by continuity."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def build_report(inputs: SecurityInputs) -> SecurityReport:
    """Evaluate the full security row for one run's observed counts."""
    d_eff = effective_d(inputs.num_keygen, inputs.num_verification)
    eta = failure_rate(inputs.num_verification_failed, inputs.num_verification)
    r_f = fidelity_failure_floor(inputs.fidelity_F)
    eta_prime = corrected_eta(eta, inputs.fidelity_F)
    p_no_fail = guess_prob_no_fail(d_eff)
    p_worst = guess_prob_worst(d_eff, eta)
    p_corrected = guess_prob_worst(d_eff, eta_prime)
    rate = None if inputs.raw_rate is None else inputs.raw_rate / d_eff
    return SecurityReport(
        D_eff=d_eff,
        eta=eta,
        r_f=r_f,
        eta_prime=eta_prime,
        p_no_fail=p_no_fail,
        p_worst=p_worst,
        p_corrected=p_corrected,
        h_worst=binary_entropy(p_worst),
        h_corrected=binary_entropy(p_corrected),
        effective_key_rate=rate,
    )


def report_csv_row(report: SecurityReport) -> str:
    cells = [
        f"{report.D_eff:.6f}",
        f"{report.eta:.6f}",
        f"{report.r_f:.6f}",
        f"{report.eta_prime:.6f}",
        f"{report.p_no_fail:.6f}",
        f"{report.p_worst:.6f}",
        f"{report.p_corrected:.6f}",
        f"{report.h_worst:.6f}",
        f"{report.h_corrected:.6f}",
        "" if report.effective_key_rate is None else f"{report.effective_key_rate:.6f}",
    ]
    return ",".join(cells)


def report_text(report: SecurityReport) -> str:
    """Aligned table, one figure per line."""
    rows = [
        ("D_eff", f"{report.D_eff:.6f}"),
        ("eta", f"{report.eta:.6f}"),
        ("r_f", f"{report.r_f:.6f}"),
        ("eta_prime", f"{report.eta_prime:.6f}"),
        ("p_no_fail", f"{report.p_no_fail:.6f}"),
        ("p_worst", f"{report.p_worst:.6f}"),
        ("p_corrected", f"{report.p_corrected:.6f}"),
        ("h_worst", f"{report.h_worst:.6f}"),
        ("h_corrected", f"{report.h_corrected:.6f}"),
        (
            "key_rate",
            "-" if report.effective_key_rate is None
            else f"{report.effective_key_rate:.6f}",
        ),
    ]
    return "\n".join(f"  {name:<12} {value}" for name, value in rows)
