"""Hybrid document retrieval and extractive QA evaluation toolkit.

The pipeline: ingest a SQuAD-format dataset into a deduplicated corpus,
rank documents for each question with a weighted ensemble of TF-IDF cosine
and dense-embedding cosine, collect answer spans from one or more reader
model services, and score the results with exact-match, token-level F1 and
top-k retrieval accuracy.
"""

__version__ = "0.1.0"
