"""One-stop method report combining parallel, stability, and accuracy
metrics, in the shape the analyze CLI emits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .accuracy import accuracy_efficiency, embedded_defect, principal_error_norm
from .builders import EmbeddedMethod
from .graphs import ParallelReport, parallel_metrics_graph
from .stability import (
    IMAG_WIDTH,
    REAL_WIDTH,
    imag_interval,
    real_interval,
    stability_polynomial,
)
from .trees import MAX_ORDER

CSV_COLUMNS = (
    "label",
    "s",
    "s_seq",
    "S",
    "P",
    "E",
    "I_real",
    "I_imag",
    "C_p1",
    "eta",
    "eta_parallel",
    "defect",
)


def parallel_metrics(m: EmbeddedMethod) -> ParallelReport:
    """Stage counts, speedup bound, minimal worker count, efficiency."""
    return parallel_metrics_graph(m.graph)


@dataclass(frozen=True)
class MethodReport:
    label: str
    s: int
    s_seq: int
    S: float
    P: int
    E: float
    I_real: float
    I_imag: float
    C_p1: Optional[float]
    eta: Optional[float]
    eta_parallel: Optional[float]
    defect: Optional[int]

    def csv_row(self) -> str:
        def num(x):
            if x is None:
                return "nan"
            if isinstance(x, int):
                return str(x)
            return f"{x:.17g}"

        return ",".join(
            [
                self.label,
                str(self.s),
                str(self.s_seq),
                num(self.S),
                str(self.P),
                num(self.E),
                num(self.I_real),
                num(self.I_imag),
                num(self.C_p1),
                num(self.eta),
                num(self.eta_parallel),
                "nan" if self.defect is None else str(self.defect),
            ]
        )


def analyze_method(
    m: EmbeddedMethod, real_width=REAL_WIDTH, imag_width=IMAG_WIDTH
) -> MethodReport:
    """Full report; accuracy fields are omitted (None) when the order
    conditions they need exceed the supported tree order."""
    par = parallel_metrics(m)
    poly = stability_polynomial(m.tableau)
    real = real_interval(poly, real_width)
    imag = imag_interval(poly, imag_width)
    p = m.tableau.p
    C = eta = eta_par = None
    defect = None
    if p + 1 <= MAX_ORDER:
        C = principal_error_norm(m.tableau)
        if C > 0:
            eta = accuracy_efficiency(m, C_p1=C)
            eta_par = eta * par.s / par.s_seq
    if p <= MAX_ORDER:
        defect = embedded_defect(m)
    return MethodReport(
        label=m.label,
        s=par.s,
        s_seq=par.s_seq,
        S=float(par.S),
        P=par.P,
        E=float(par.E),
        I_real=real.value,
        I_imag=imag.value,
        C_p1=C,
        eta=eta,
        eta_parallel=eta_par,
        defect=defect,
    )
