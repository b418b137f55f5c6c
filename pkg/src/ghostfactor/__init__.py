"""Gauss-sum factorization on a simulated qubit: exact number theory, ideal
and decohering Gauss sums, a Liouville-space pulse simulator, finite-pulse
filter functions and a campaign runner."""

__version__ = "0.1.0"
