"""Shared comparison tolerance for value inequalities."""

TOL = 1e-9


def geq(lhs: float, rhs: float, tol: float = TOL) -> bool:
    """``lhs >= rhs`` up to an absolute tolerance."""
    return lhs >= rhs - tol
