"""Consent-dialog capture and dark-pattern detection."""

__version__ = "0.1.0"
