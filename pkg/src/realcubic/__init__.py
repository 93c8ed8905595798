"""Totally real cubic fields: enumeration, multiplicities from 3-ring spaces, and DPF types."""

__version__ = "0.1.0"
