"""Verification suites: each module pairs closed-form laws with estimators and returns McReports."""
