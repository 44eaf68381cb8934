"""Open-vocabulary language models and bits-per-English-character evaluation on multi-text."""

__version__ = "0.1.0"
