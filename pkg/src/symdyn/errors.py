"""Exception hierarchy shared by all symdyn modules."""


class SymdynError(Exception):
    """Base class for all errors raised by this package."""


# --- torus map models ---

class OutOfBranchDomain(SymdynError):
    """Inverse-branch target lies outside the branch's domain of definition."""


class DegenerateAt(SymdynError):
    """Requested an inverse branch or Jacobian inverse at a singular point."""


# --- orbit windows ---

class NoBranch(SymdynError):
    """Backward extension failed: no admissible inverse branch at some step."""


class WindowExhausted(SymdynError):
    """A shift or cocycle request walked off the stored backward window."""


class WindowMismatch(SymdynError):
    """Two orbit windows with unequal backward lengths cannot be compared."""


class DegenerateJacobian(SymdynError):
    """A cocycle product required the inverse of a degenerate Jacobian."""


# --- Lyapunov frames ---

class NoDominance(SymdynError):
    """Singular-value gap of the finite cocycle too small to split reliably."""


class TailNotCertified(SymdynError):
    """Truncated scaling series did not contract enough for a tail bound."""


# --- ladder / charts ---

class DomainError(SymdynError):
    """Argument outside the domain of the ladder function or its inverse."""


class NoConvergence(SymdynError):
    """Root search for the ladder inverse failed to converge."""


class LatticeUnderflow(SymdynError):
    """Requested chart size below the deepest computable lattice element."""


class OutOfChart(SymdynError):
    """Point or vector outside the chart's domain of injectivity."""


# --- chain graphs ---

class EmptyGraph(SymdynError):
    """Recurrence pruning removed every vertex of the chain graph."""


class InfeasibleInput(SymdynError):
    """Subordination input violates its lattice preconditions."""


# --- graph transform / manifolds ---

class FixedPointDiverged(SymdynError):
    """Inner fixed-point solve of a graph transform hit its iteration cap."""


class AdmissibilityLost(SymdynError):
    """A transformed manifold violated an admissibility budget."""


class NoIntersection(SymdynError):
    """Stable/unstable graph intersection solve failed to contract."""


class NotConverged(SymdynError):
    """Chain window too short to reach the requested manifold tolerance."""


# --- shadowing / partition ---

class ShadowEscaped(SymdynError):
    """A shadowed orbit left the 10Q tube of some chart in the chain."""


class InsufficientSamples(SymdynError):
    """Markov refinement needs at least one shadow sample per vertex."""


class NotSamePoint(SymdynError):
    """Diagnostics require both chains to shadow the same orbit."""
