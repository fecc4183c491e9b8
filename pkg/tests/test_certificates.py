import math

import pytest

from groupoid_avg.metrics import CERTIFICATES, CertificateLedger
from groupoid_avg.metrics.certificates import _doubly_exponential
from groupoid_avg.reps import ConvergenceTrace, TraceRecord, iterate_average


def synthetic_trace(certified=True):
    # r drops from 0.1 to 0.05, far slower than the quadratic bound allows
    return ConvergenceTrace(
        records=[TraceRecord(0, 1.0, 0.1, step=0.01), TraceRecord(1, 1.0, 0.05)],
        epsilon=0.6, b0=1.0, r0=0.1, certified=certified, terminated_reason="max_iter",
    )


def test_eta_trace_passes_every_certificate(eta_family):
    _, trace = iterate_average(*eta_family(0.04))
    report = CertificateLedger().grade(trace)
    assert report.certified
    assert report.ok
    assert report.violations == []
    per = report.to_dict()["per_certificate"]
    assert set(per) == set(CERTIFICATES)
    assert all(per.values())
    assert report.by_name("doubly_exponential")


def test_violation_is_reported_with_iterate():
    report = CertificateLedger().grade(synthetic_trace())
    assert not report.ok
    assert [(c.name, c.i) for c in report.violations] == [("quadratic_step", 0)]
    check = report.violations[0]
    assert check.lhs == 0.05
    assert check.rhs == pytest.approx(2 * (1 / 0.9) ** 2 * 0.01)


def test_uncertified_trace_never_fails():
    report = CertificateLedger().grade(synthetic_trace(certified=False))
    assert report.violations
    assert report.ok
    assert report.to_dict()["certified"] is False


def test_slack_is_relative():
    trace = ConvergenceTrace(records=[TraceRecord(0, 2.0, 0.1)], epsilon=2.4, b0=2.0, r0=0.1)
    trace.records[0].b = 2.0 * (1 + 5e-10)
    assert CertificateLedger(slack=1e-9).grade(trace).ok
    assert not CertificateLedger(slack=1e-10).grade(trace).ok


def test_doubly_exponential_saturates():
    assert _doubly_exponential(0.5, 3) == 0.5 ** 8
    assert _doubly_exponential(2.0, 30) == math.inf


def test_recovery_bound(eta_family):
    _, trace = iterate_average(*eta_family(0.04))
    assert CertificateLedger().recovery_bound(trace) == pytest.approx(2 * math.sqrt(3) * 1.04 * 0.0816)
