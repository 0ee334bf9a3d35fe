"""Acoustic room simulation and ultrasonic positioning evaluation."""

__version__ = "0.1.0"
