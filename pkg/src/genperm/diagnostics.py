"""Convergence diagnostics for a sequence of ordered selections against a
target step permuton.

Three channels are tracked per sequence element: pattern densities (with
their gaps to the target), sup-gaps of both marginal CDFs, and ``d_inf``
between the embedding and the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import DomainError, OrderedSelection, StepPermuton, binom, permutations_of, to_number
from .embed import embed_selection, marginals
from .io import from_csv, to_csv
from .metrics import d_inf
from .patterns import BudgetExceededError, pattern_distribution_exact, selection_pattern_counts

CSV_HEADER = ("index", "n", "m", "channel", "value")
DEFAULT_MAX_K = 3
TARGET_BUDGET = 10**6


def marginal_gap(F, G):
    """``sup |F - G|`` for two broken-line CDFs (attained at a breakpoint)."""
    pts = sorted(set(F.breakpoints.tolist()) | set(G.breakpoints.tolist()))
    return max(abs(F(p) - G(p)) for p in pts)


def target_densities(mu: StepPermuton, max_k: int, seed: int = 0,
                     budget: int = TARGET_BUDGET, samples: int = 10**6) -> dict:
    """``t(tau, mu)`` keyed by pattern string; exact when the enumeration
    fits ``budget``, Monte Carlo otherwise."""
    from .sampling import count_patterns

    out = {}
    for k in range(1, max_k + 1):
        try:
            dist = pattern_distribution_exact(mu, k, budget)
        except BudgetExceededError:
            counts, _ = count_patterns(mu, k, samples, seed, stream=k)
            dist = counts / samples
        for rank, tau in enumerate(permutations_of(k)):
            out[str(tau)] = dist[rank]
    return out


@dataclass
class ElementDiagnostics:
    index: int
    n: int
    m: int
    densities: dict
    gaps: dict
    marginal_gap_x: object
    marginal_gap_y: object
    d_inf: object

    def channels(self):
        for tau, v in self.densities.items():
            yield f"t[{tau}]", v
        yield "marginal_gap_x", self.marginal_gap_x
        yield "marginal_gap_y", self.marginal_gap_y
        yield "d_inf", self.d_inf


def _nonincreasing(values, tol) -> bool:
    return all(b <= a + tol for a, b in zip(values, values[1:]))


@dataclass
class ConvergenceReport:
    max_k: int
    tolerance: float
    target: dict = field(default_factory=dict)      # t(tau, mu)
    elements: list = field(default_factory=list)

    @property
    def patterns(self) -> list[str]:
        return list(self.target)

    def trajectory(self, channel: str) -> list:
        out = []
        for e in self.elements:
            ch = dict(e.channels())
            if channel in ch:
                out.append(ch[channel])
            elif channel.startswith("gap[") and channel[4:-1] in e.gaps:
                out.append(e.gaps[channel[4:-1]])
            else:
                raise KeyError(channel)
        return out

    def max_density_gaps(self) -> list:
        return [max(e.gaps.values()) if e.gaps else 0 for e in self.elements]

    @property
    def verdict(self) -> dict:
        """Monotone-trend flags (up to ``tolerance``) for the three
        channels, and whether each ends within ``tolerance`` of 0."""
        tol = self.tolerance
        dens = self.max_density_gaps()
        marg = [max(e.marginal_gap_x, e.marginal_gap_y) for e in self.elements]
        dist = [e.d_inf for e in self.elements]
        out = {}
        for name, traj in (("density", dens), ("marginal", marg), ("d_inf", dist)):
            out[f"{name}_nonincreasing"] = _nonincreasing(traj, tol)
            out[f"{name}_final_within_tolerance"] = bool(traj) and traj[-1] <= tol
        return out

    def csv_rows(self):
        for e in self.elements:
            for channel, value in e.channels():
                yield e.index, e.n, e.m, channel, value

    def to_csv(self) -> str:
        return to_csv(CSV_HEADER, self.csv_rows())

    def to_dict(self) -> dict:
        return {
            "max_k": self.max_k,
            "tolerance": self.tolerance,
            "target_densities": self.target,
            "elements": [{
                "index": e.index, "n": e.n, "m": e.m,
                "densities": e.densities, "gaps": e.gaps,
                "marginal_gap_x": e.marginal_gap_x,
                "marginal_gap_y": e.marginal_gap_y,
                "d_inf": e.d_inf,
            } for e in self.elements],
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        def num(v):
            return to_number(v) if v is not None else None

        def nums(m):
            return {k: num(v) for k, v in m.items()}

        rep = cls(d["max_k"], float(d["tolerance"]), nums(d.get("target_densities", {})))
        for e in d["elements"]:
            rep.elements.append(ElementDiagnostics(
                e["index"], e["n"], e["m"], nums(e["densities"]), nums(e["gaps"]),
                num(e["marginal_gap_x"]), num(e["marginal_gap_y"]), num(e["d_inf"])))
        return rep


def parse_report_csv(text: str) -> list[tuple]:
    """Rows of an exported report as ``(index, n, m, channel, value)``."""
    header, rows = from_csv(text)
    if tuple(header) != CSV_HEADER:
        raise DomainError(f"unexpected CSV header {header}")
    return [tuple(r) for r in rows]


def _element(index: int, nu: OrderedSelection, mu: StepPermuton, target: dict, max_k: int,
             Fx, Fy) -> ElementDiagnostics:
    dens, gaps = {}, {}
    for k in range(1, max_k + 1):
        counts = selection_pattern_counts(nu, k)
        total = binom(nu.m, k)
        for rank, tau in enumerate(permutations_of(k)):
            key = str(tau)
            v = Fraction(int(counts[rank]), total)
            if not isinstance(target[key], Fraction):
                v = float(v)
            dens[key] = v
            gaps[key] = abs(v - target[key])
    emb = embed_selection(nu)
    if not mu.exact:
        emb = emb.to_float()
    Ex, Ey = marginals(emb)
    return ElementDiagnostics(
        index, nu.n, nu.m, dens, gaps,
        marginal_gap(Ex, Fx), marginal_gap(Ey, Fy), d_inf(emb, mu).value)


def converge(sequence, mu: StepPermuton, max_k: int = DEFAULT_MAX_K, tolerance: float = 1e-9,
             seed: int = 0, workers: int = 1) -> ConvergenceReport:
    """Diagnostics of ``sequence`` (ordered selections) against ``mu``.

    Output is ordered by input index whatever ``workers`` is.
    """
    sequence = list(sequence)
    if max_k < 1:
        raise DomainError("max_k must be positive")
    if sequence and max_k > min(nu.m for nu in sequence):
        raise DomainError(f"max_k = {max_k} exceeds the shortest selection")
    report = ConvergenceReport(max_k, tolerance, target_densities(mu, max_k, seed))
    Fx, Fy = marginals(mu)

    def run(item):
        i, nu = item
        return _element(i, nu, mu, report.target, max_k, Fx, Fy)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            report.elements = list(ex.map(run, enumerate(sequence)))
    else:
        report.elements = [run(item) for item in enumerate(sequence)]
    return report

