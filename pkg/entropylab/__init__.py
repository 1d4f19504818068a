"""Entropy numbers of embeddings and summation operators on trees."""
