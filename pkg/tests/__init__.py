"""Test package for entlab."""
