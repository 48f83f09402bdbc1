"""Reactive discrete controller synthesis for reconfigurable component systems."""
__version__ = "0.1.0"
