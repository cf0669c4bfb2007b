"""litcurate: human-in-the-loop data curation from scientific literature.

Documents are parsed through two pipelines, records are generated by an
LLM against a user schema, verified corrections feed BM25-retrieved
in-context examples for later batches, and every generated cell can be
provenance-checked against the source text.
"""

__version__ = "0.1.0"
