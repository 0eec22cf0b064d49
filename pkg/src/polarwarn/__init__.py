"""Polarization-based early warning for misinformation topics.

Two-stage pipeline over an annotated social-media corpus: entity-level
polarization features with data-driven thresholds feed a disputed-topic
classifier (the early warning), whose predictions join structural, semantic,
user and sentiment features in a post-level fake-news classifier.
"""

__version__ = "0.1.0"
