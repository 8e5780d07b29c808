"""Retrieve-then-summarize toolkit.

Subpackages/modules:

- ``corpus``     documents, passage chunking, collections, train/val splits
- ``textproc``   shared tokenizer, Porter stemmer, sentence splitter
- ``retrieval``  BM25 inverted index and exact dense top-k search
- ``metrics``    top-k retrieval accuracy and ROUGE-1/2/SU4 scoring
- ``generation`` extractive fusion generator and the remote generation client
- ``harness``    experiment configs, synthetic benchmark, eval runs, k-sweeps
"""

__version__ = "0.1.0"
