"""
Metrics package for grading averaging runs.

This package checks recorded convergence traces against the inequalities that
hold for near representations and reports every violation with its iterate.
"""

from .certificates import CERTIFICATES, CertificateCheck, CertificateLedger, LedgerReport

__all__ = ["CERTIFICATES", "CertificateCheck", "CertificateLedger", "LedgerReport"]
