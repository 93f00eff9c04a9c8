"""Core package for entlab."""
