"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for the twelve lines alone.
"""

import time

import pytest

from sdwave.verify import (
    suite_blowup,
    suite_constants,
    suite_determinism,
    suite_duhamel,
    suite_energy_decay,
    suite_estimates,
    suite_harmonic,
    suite_inequality,
    suite_mms,
    suite_picard,
    suite_regions,
    suite_slopes,
    suite_weak,
)

# (number, title, suites, runtime limit in seconds)
CRITERIA = [
    (1, "linear energy decay", (suite_energy_decay,), 30),
    (2, "manufactured-solution orders", (suite_mms,), 120),
    (3, "harmonic weights", (suite_harmonic,), 10),
    (4, "Duhamel consistency", (suite_duhamel,), 120),
    (5, "Picard contraction", (suite_picard,), 180),
    (6, "energy-estimate monitors", (suite_estimates,), 120),
    (7, "scaling slopes", (suite_slopes,), 120),
    (8, "theory constants and regions", (suite_constants, suite_regions), 30),
    (9, "blow-up evidence", (suite_blowup,), 900),
    (10, "weak-form residual", (suite_weak,), 120),
    (11, "scalar inequality", (suite_inequality,), 5),
    (12, "determinism", (suite_determinism,), 300),
]


def evaluate(number, title, suites, limit):
    t0 = time.perf_counter()
    results = [s() for s in suites]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in results) and elapsed < limit
    detail = "; ".join(line[5:] for r in results for line in r.lines if line.startswith(("PASS", "FAIL")))
    line = (f"criterion {number:2d} {'PASS' if ok else 'FAIL'} {title} "
            f"[{elapsed:.2f} s < {limit} s]: {detail}")
    return ok, line, results


@pytest.mark.parametrize("number,title,suites,limit", CRITERIA, ids=[f"c{c[0]:02d}" for c in CRITERIA])
def test_criterion(number, title, suites, limit, capsys):
    ok, line, results = evaluate(number, title, suites, limit)
    with capsys.disabled():
        print("\n" + line)
    failed = [ln for r in results for ln in r.lines if ln.startswith("FAIL")]
    assert ok, "\n".join(failed) or line


if __name__ == "__main__":
    import sys

    status = 0
    for c in CRITERIA:
        ok, line, _ = evaluate(*c)
        print(line)
        status |= not ok
    sys.exit(status)
