"""Low-inertia N-1 screening and remedial-action cost comparison."""

__version__ = "0.1.0"
