"""Command-line surface: argument parsing, handlers and JSON schemas."""
