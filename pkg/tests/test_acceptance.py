"""The fifteen acceptance criteria, each run at its stated trial counts and tolerances.

A one-line PASS/FAIL summary per criterion is printed at the end of the
pytest run (see ``conftest.py``).
"""
import pytest

from apsquare.experiments import run_experiment

SEED = 12345

CRITERIA = [
    (1, "sandwich", "S_a <= S~_a <= S_2a pointwise, zero tolerance"),
    (2, "decomposition", "oscillation decomposition bound and sparseness certificate"),
    (3, "shifted_cover", "shifted-grid cover with side ratio <= 6"),
    (4, "median", "|m_f(Q)| <= (f chi_Q)*(|Q|/2)"),
    (5, "gstar", "g* majorant by cone sums under coverage"),
    (6, "good_set", "good-set energy inequality on the quadrature"),
    (7, "weak_aperture", "weak-type aperture slope <= n + 0.3"),
    (8, "aperture", "strong aperture slope bounds"),
    (9, "weight", "weight-exponent consistency"),
    (10, "pairing", "sparse pairing identity, exact"),
    (11, "refit", "shifted-grid refit inequality, exact"),
    (12, "shift_growth", "dilation growth slope <= 1/2 + 0.2"),
    (13, "domination", "domination ratio rho(a) <= 4 rho(1)"),
    (14, "kernels", "kernel validation"),
    (15, "oracles", "fast paths agree with brute-force oracles"),
]


@pytest.mark.parametrize("number, name, title", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(number, name, title, record_property):
    out = run_experiment(name, SEED)
    record_property("criterion", f"{number:2d}. {title}")
    failed = [c for c in out.asserted if not c.passed]
    record_property("criterion_detail", "; ".join(f"{c.name}: {c.detail}" for c in failed))
    assert out.asserted, f"{name} asserted nothing"
    assert not failed, "\n".join(f"{c.name}: {c.statement} {c.detail}" for c in failed)
