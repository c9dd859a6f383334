"""Elliptic billiards, Betti coordinates and projective orbit intersections."""

import json

from ._caustica import *  # noqa: F401,F403
from ._caustica import ConvergenceError, PreconditionError, _dml_classify, _dml_search


def _problem_text(problem):
    return problem if isinstance(problem, str) else json.dumps(problem)


def dml_classify(problem):
    """Closure-group class of problem["matrix"]."""
    return json.loads(_dml_classify(_problem_text(problem)))


def dml_search(problem):
    """Hits, classification and family report for a matrix/lines/range problem."""
    return json.loads(_dml_search(_problem_text(problem)))


__all__ = [n for n in dir() if not n.startswith("_")]
