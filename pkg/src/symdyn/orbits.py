"""Finite windows into the inverse-limit space of a torus endomorphism.

A point of the inverse limit is a full orbit (x_i) with f(x_i) = x_{i+1}.
``OrbitWindow`` keeps a finite slice of one: a backward history of chosen
inverse branches, the present point, and a lazily grown forward cache.
The shift re-indexes the window, the metric is the truncated version of
sup{2^i d(x_i, y_i) : i <= 0}, and ``cocycle`` forms products of
Jacobians (or inverse Jacobians) along the stored orbit, on which the
derivative becomes an invertible linear cocycle.

Consecutive stored points always satisfy f(x_i) = x_{i+1} up to 1e-12.
Two construction routes guarantee this: forward points are produced by
literal ``eval`` calls, and windows tiled from exactly periodic rational
cycles store the same float value at every revisit, so downstream chart
arithmetic may treat consecutive stored points as exact images.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import (DegenerateAt, DegenerateJacobian, NoBranch,
                     OutOfBranchDomain, WindowExhausted, WindowMismatch)
from .torus import (DEGENERACY_TOL, MapModel, Point, map_from_json,
                    torus_delta, torus_dist, wrap)

STEP_TOL = 1e-12


@dataclass(frozen=True)
class BranchRule:
    """Serializable recipe for choosing inverse branches.

    kind:
      * ``nearest``  -- take the preimage closest to the point being
        inverted (default).
      * ``fixed``    -- take branch number ``index`` in the lexicographic
        ordering of preimages (mod the number of branches).
      * ``explicit`` -- consume the preimages from ``points``, one per
        backward step.
    """

    kind: str = "nearest"
    index: int = 0
    points: tuple = ()

    def __post_init__(self):
        if self.kind not in ("nearest", "fixed", "explicit"):
            raise ValueError(f"unknown branch rule {self.kind!r}")

    def pick(self, model: MapModel, y: Point, step: int) -> Point:
        if self.kind == "explicit":
            if step >= len(self.points):
                raise NoBranch(f"explicit branch list exhausted at step {step}")
            cand = wrap(np.asarray(self.points[step], float))
            if torus_dist(model.eval(cand), y) > STEP_TOL:
                raise NoBranch(f"explicit point at step {step} is not a preimage")
            return cand
        pre = model.preimages(y)
        if not pre:
            raise NoBranch(f"no inverse branch below {np.asarray(y).tolist()}")
        if self.kind == "fixed":
            return pre[self.index % len(pre)]
        return min(pre, key=lambda p: torus_dist(p, y))

    def to_json(self) -> dict:
        return {"kind": self.kind, "index": self.index,
                "points": [list(map(float, p)) for p in self.points]}

    @staticmethod
    def from_json(doc: dict) -> "BranchRule":
        return BranchRule(kind=doc["kind"], index=int(doc.get("index", 0)),
                          points=tuple(tuple(p) for p in doc.get("points", ())))


@dataclass
class OrbitWindow:
    """Orbit slice x_{-N}, ..., x_0, x_1, ... with x_0 the present point.

    ``forward`` grows on demand through ``ensure_forward``; growth copies
    are cheap and mutation is confined to appending, so sharing a window
    across readers is safe as long as writers use ``shift`` (which copies).
    """

    model: MapModel
    past: List[np.ndarray]
    present: np.ndarray
    forward: List[np.ndarray] = field(default_factory=list)
    rule: BranchRule = field(default_factory=BranchRule)
    degenerate: bool = False

    @property
    def past_len(self) -> int:
        return len(self.past)

    @property
    def forward_len(self) -> int:
        return len(self.forward)

    def ensure_forward(self, m: int) -> None:
        while len(self.forward) < m:
            base = self.forward[-1] if self.forward else self.present
            self.forward.append(self.model.eval(base))

    def point(self, i: int) -> np.ndarray:
        """Stored orbit point x_i; forward indices grow the cache."""
        if i == 0:
            return self.present
        if i < 0:
            if -i > len(self.past):
                raise WindowExhausted(f"index {i} beyond stored past")
            return self.past[len(self.past) + i]
        self.ensure_forward(i)
        return self.forward[i - 1]

    def shift(self, steps: int) -> "OrbitWindow":
        """Re-indexed window; negative shifts consume the stored past."""
        if steps == 0:
            return OrbitWindow(self.model, list(self.past), self.present,
                               list(self.forward), self.rule, self.degenerate)
        if steps < 0:
            if -steps > len(self.past):
                raise WindowExhausted(f"shift {steps} beyond stored past")
            k = -steps
            new_past = list(self.past[:-k])
            new_present = self.past[-k]
            new_forward = list(self.past[len(self.past) - k + 1:]) \
                + [self.present] + list(self.forward)
            return OrbitWindow(self.model, new_past, new_present, new_forward,
                               self.rule, self.degenerate)
        self.ensure_forward(steps)
        new_past = list(self.past) + [self.present] + list(self.forward[:steps - 1])
        new_present = self.forward[steps - 1]
        new_forward = list(self.forward[steps:])
        return OrbitWindow(self.model, new_past, new_present, new_forward,
                           self.rule, self.degenerate)

    def check_consistency(self) -> float:
        """Largest one-step defect d(f(x_i), x_{i+1}) over stored pairs."""
        pts = list(self.past) + [self.present] + list(self.forward)
        worst = 0.0
        for a, b in zip(pts, pts[1:]):
            worst = max(worst, torus_dist(self.model.eval(a), b))
        return worst

    def to_json(self) -> dict:
        return {
            "map": self.model.to_json(),
            "past": [list(map(float, p)) for p in self.past],
            "present": list(map(float, self.present)),
            "forward": [list(map(float, p)) for p in self.forward],
            "rule": self.rule.to_json(),
            "degenerate": self.degenerate,
        }

    @staticmethod
    def from_json(doc: dict) -> "OrbitWindow":
        return OrbitWindow(
            model=map_from_json(doc["map"]),
            past=[np.asarray(p, float) for p in doc["past"]],
            present=np.asarray(doc["present"], float),
            forward=[np.asarray(p, float) for p in doc["forward"]],
            rule=BranchRule.from_json(doc["rule"]),
            degenerate=bool(doc.get("degenerate", False)),
        )


def extend_backward(model: MapModel, x0: Point, rule: Optional[BranchRule],
                    n: int) -> OrbitWindow:
    """Build a window with ``n`` backward steps under the branch rule.

    Raises NoBranch if some step has no admissible inverse branch (for
    instance below a collapsed disk, where the differential degenerates).
    """
    rule = rule or BranchRule()
    x0 = wrap(np.asarray(x0, float))
    if model.dist_to_singularity(x0) == 0.0:
        raise NoBranch("window anchored on the singular set")
    pts = [x0]
    for step in range(n):
        y = pts[-1]
        if model.degenerate_at(y):
            raise NoBranch(f"degenerate differential at backward step {step}")
        try:
            p = rule.pick(model, y, step)
        except (DegenerateAt, OutOfBranchDomain) as exc:
            raise NoBranch(str(exc)) from exc
        pts.append(p)
    pts.reverse()
    return OrbitWindow(model=model, past=pts[:-1], present=pts[-1], rule=rule)


def orbit_distance(o1: OrbitWindow, o2: OrbitWindow) -> float:
    """Truncation of sup{2^i d(x_i, y_i) : i <= 0} to the stored past.

    Values computed from windows of backward length N undershoot the
    full inverse-limit metric by at most 2^{-N}.
    """
    if o1.past_len != o2.past_len:
        raise WindowMismatch(
            f"backward lengths differ: {o1.past_len} vs {o2.past_len}")
    best = torus_dist(o1.present, o2.present)
    for i in range(1, o1.past_len + 1):
        best = max(best, 2.0 ** (-i) * torus_dist(o1.point(-i), o2.point(-i)))
    return best


@dataclass(frozen=True)
class CocycleProduct:
    """Product of Jacobians along an orbit window with its index span."""

    matrix: np.ndarray
    span: tuple

    def __matmul__(self, other: "CocycleProduct") -> "CocycleProduct":
        if self.span[0] != other.span[1]:
            raise WindowMismatch(f"spans {other.span} and {self.span} do not chain")
        return CocycleProduct(self.matrix @ other.matrix,
                              (other.span[0], self.span[1]))


def cocycle(o: OrbitWindow, n: int) -> CocycleProduct:
    """d f^n along the window: Jacobian products for n >= 0, products of
    inverse Jacobians over the stored past for n < 0."""
    if n == 0:
        return CocycleProduct(np.eye(2), (0, 0))
    if n > 0:
        m = np.eye(2)
        for i in range(n):
            J = o.model.jacobian(o.point(i))
            if o.degenerate and abs(float(np.linalg.det(J))) < DEGENERACY_TOL:
                raise DegenerateJacobian(f"degenerate Jacobian at index {i}")
            m = J @ m
        return CocycleProduct(m, (0, n))
    if -n > o.past_len:
        raise WindowExhausted(f"cocycle span {n} beyond stored past")
    m = np.eye(2)
    for i in range(1, -n + 1):
        J = o.model.jacobian(o.point(-i))
        if abs(float(np.linalg.det(J))) < DEGENERACY_TOL:
            raise DegenerateJacobian(f"degenerate Jacobian at index {-i}")
        m = np.linalg.solve(J, m)
    return CocycleProduct(m, (0, n))


def window_from_points(model: MapModel, points: Sequence[Point], center: int,
                       rule: Optional[BranchRule] = None) -> OrbitWindow:
    """Window with prescribed stored points and present index ``center``.

    The caller asserts that consecutive points are one-step images; this
    is checked to the 1e-12 window tolerance.
    """
    pts = [np.asarray(p, float) for p in points]
    if not 0 <= center < len(pts):
        raise ValueError("center outside the provided points")
    o = OrbitWindow(model=model, past=pts[:center], present=pts[center],
                    forward=pts[center + 1:], rule=rule or BranchRule())
    worst = o.check_consistency()
    if worst > STEP_TOL:
        raise ValueError(f"provided points are not an orbit (defect {worst:.3e})")
    return o
