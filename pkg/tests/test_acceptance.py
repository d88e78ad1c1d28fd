"""Acceptance gate: every criterion at its stated tolerance, one pass/fail
line per criterion.  The check implementations live in svilab.verify and
are shared with the CLI's verify mode."""

import time

import pytest

from svilab.verify import CHECKS

RUNTIME_BUDGET_S = {
    "heat_oracle": 5.0,
    "complementarity": 60.0,
    "cauchy_rate": 120.0,
    "energy": 300.0,
    "transform_consistency": 300.0,
    "signorini": 120.0,
    "stefan": 120.0,
    "noise_stats": 60.0,
    "determinism": 120.0,
}

CRITERION = {
    "heat_oracle": "1: heat-equation oracle",
    "complementarity": "2: complementarity across the eps sweep",
    "cauchy_rate": "3: penalization Cauchy rate",
    "energy": "4: energy estimates on 100 paths",
    "transform_consistency": "5: direct EM vs transform route",
    "signorini": "6: Signorini variant",
    "stefan": "7: Stefan benchmark",
    "noise_stats": "8: noise statistics",
    "determinism": "9: byte-identical reruns",
}


@pytest.mark.parametrize("name", list(CHECKS))
def test_acceptance_criterion(name):
    start = time.time()
    rows = CHECKS[name](workers=1)
    elapsed = time.time() - start
    ok = all(passed for *_, passed in rows)
    print(f"{'PASS' if ok else 'FAIL'} criterion {CRITERION[name]} "
          f"({elapsed:.1f}s, {len(rows)} checks)")
    for label, value, threshold, passed in rows:
        print(f"  {'pass' if passed else 'FAIL'} {label}: value={value:.6g} "
              f"threshold={threshold:.6g}")
    failed = [label for label, _, _, passed in rows if not passed]
    assert not failed, f"criterion {CRITERION[name]} failed: {failed}"
    assert elapsed <= RUNTIME_BUDGET_S[name], (
        f"criterion {CRITERION[name]} exceeded its runtime budget: "
        f"{elapsed:.1f}s > {RUNTIME_BUDGET_S[name]:.0f}s"
    )
