"""Base-16 tail series for the Leibniz series of pi/4 and the alternating
harmonic series of log 2, with independent verification routes and hex
digit extraction."""

__version__ = "0.1.0"
