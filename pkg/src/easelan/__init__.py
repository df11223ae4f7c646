"""Build, validate and export ELAN annotation documents for multimodal corpora."""

__version__ = "0.1.0"
