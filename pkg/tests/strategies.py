"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from altmzv.model import SignedIndex

slots = st.tuples(st.integers(1, 4), st.booleans())
indices = st.lists(slots, min_size=0, max_size=4).map(lambda s: SignedIndex(tuple(s)))
admissible = indices.filter(lambda i: i.depth > 0 and i.is_admissible() and i.weight <= 6)
