"""Reverse n-wise output testing.

Build covering arrays over classes of a system's outputs, search the
input space for points realizing each row, and measure which output
interactions a test suite exercises.
"""
__version__ = "0.1.0"
