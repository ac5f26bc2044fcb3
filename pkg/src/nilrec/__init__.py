"""Nilpotent polynomial mappings, PET weights, and finite recurrence / Ramsey searches."""

__version__ = "0.1.0"
