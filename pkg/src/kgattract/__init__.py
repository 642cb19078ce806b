"""Klein-Gordon fields with concentrated nonlinearities: solitary waves, evolution, attraction diagnostics."""

__version__ = "0.1.0"
