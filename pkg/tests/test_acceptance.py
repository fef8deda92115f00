"""Acceptance battery: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL lines;
the same runners back the `current1d suite` CLI subcommand.
"""

import pytest

from current1d.suite import (criterion_1_isomorphism_sandwich,
                             criterion_2_optimal_constant_witness,
                             criterion_3_rickman,
                             criterion_4_homotopy_lemma,
                             criterion_5_geodesic_approximation,
                             criterion_6_hyperplane_normalization,
                             criterion_7_decomposition,
                             criterion_8_solver_cross_validation,
                             criterion_9_flatnorm_closed_forms)

RUNNERS = [
    criterion_1_isomorphism_sandwich,
    criterion_2_optimal_constant_witness,
    criterion_3_rickman,
    criterion_4_homotopy_lemma,
    criterion_5_geodesic_approximation,
    criterion_6_hyperplane_normalization,
    criterion_7_decomposition,
    criterion_8_solver_cross_validation,
    criterion_9_flatnorm_closed_forms,
]


@pytest.mark.parametrize("runner", RUNNERS, ids=lambda r: r.__name__)
def test_acceptance_criterion(runner):
    result = runner()
    print(result.line(), flush=True)
    assert result.passed, f"criterion {result.index} failed: {result.details}"
