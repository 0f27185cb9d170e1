"""Pulse-level simulation and calibration of flux qubits driven by
unipolar rectangular pulses, from closed-form single-qubit dynamics up to a
circuit-level model of the pulse-shaping hardware."""

__version__ = "0.1.0"
