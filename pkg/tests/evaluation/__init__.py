"""
Acceptance-scale experiments for entlab.

These tests reproduce the convergence, reconciliation and relativity
results at full size and are selected with ``pytest -m slow``.
"""
