"""Exact workbench for refined Bloch groups over Q and over constructible reals."""

__version__ = "0.1.0"
