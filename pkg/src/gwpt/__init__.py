"""GWPT: a green word-embedding-based part-of-speech tagger.

Frequency analysis of embedding dimensions, adaptive N-gram features,
discriminant feature selection and one-vs-rest gradient boosted trees.
"""

from gwpt.errors import GwptError

__version__ = "0.1.0"

__all__ = ["GwptError", "__version__"]
