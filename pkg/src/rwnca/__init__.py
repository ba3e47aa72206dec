"""Survivable all-to-one provisioning with XOR network coding on protection paths."""

__version__ = "0.1.0"
