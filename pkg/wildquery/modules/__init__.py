# Query, rewriting, extraction, ranking and analysis modules
