"""Prikry forcing over a symbolic measure: set handles, the decision oracle, and the diagonal-reduction engine."""
