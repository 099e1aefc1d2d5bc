"""Mixed-monotone decomposition functions and embedding dynamics.

An open-loop system ``xdot = f(x, u, w)`` is embedded into a monotone
system of doubled dimension through a decomposition function ``d``.  A
single trajectory of the embedding then bounds every trajectory of the
original system that starts inside the initial box.

Systems can supply either a closed-form decomposition or a batched
interval extension of ``f``; in the latter case the tight decomposition is
synthesized by pinning one coordinate at a time and taking the matching
end of the enclosure.

The closed loop with a sampled neural-network controller is handled by
:class:`ClosedLoopEmbedding`: at every control instant the network is
relaxed over the current box and the resulting output intervals are
evaluated on the ``2n`` faces of that box.  Those face intervals stay
frozen while the embedding is integrated across the control interval.
"""

from __future__ import annotations

import numpy as np

from .bounds import InclusionFunction, crown_bounds, make_inclusion
from .intervals import EmbeddingState, IntervalVector

__all__ = [
    "OpenLoopSystem",
    "ClosedLoopEmbedding",
    "DiscreteLTIEmbedding",
    "EmbeddingOrderError",
    "build_tight_decomposition",
    "open_embedding_field",
    "open_loop_field",
    "closed_decomposition",
    "lti_step",
]

_EXTENSION_TOL = 1e-9


class EmbeddingOrderError(RuntimeError):
    """The integrated embedding state lost its ordering (numeric failure)."""


def _orientation(x, xh, u, uh, w, wh) -> bool:
    """True when the argument pattern selects the lower end of the enclosure.

    The state pair decides; fully degenerate groups defer to the input and
    then the disturbance pair.  Mixed orderings are rejected.
    """
    for a, b in ((x, xh), (u, uh), (w, wh)):
        if a.size == 0 or np.array_equal(a, b):
            continue
        if np.all(a <= b):
            return True
        if np.all(b <= a):
            return False
        raise ValueError("mixed-order arguments passed to a decomposition function")
    return True


def build_tight_decomposition(extension):
    """Decomposition function from a sound enclosure oracle for ``f``.

    ``extension(Xlo, Xhi, Ulo, Uhi, Wlo, Whi)`` receives row-stacked boxes
    (all arguments shaped ``(m, dim)``) and must return componentwise
    enclosures ``(Flo, Fhi)`` of ``f`` over each row's box, exact on
    degenerate boxes and isotone under box inclusion.  Extensions must not
    modify their argument arrays (callers reuse buffers).

    The returned ``d(x, xh, u, uh, w, wh)`` pins coordinate ``i`` of the
    state span at ``x_i`` and takes the lower (forward argument order) or
    upper (reversed order) end of the enclosure of ``f_i``.
    """

    def d(x, xh, u, uh, w, wh):
        x = np.asarray(x, dtype=float)
        xh = np.asarray(xh, dtype=float)
        u = np.asarray(u, dtype=float)
        uh = np.asarray(uh, dtype=float)
        w = np.asarray(w, dtype=float)
        wh = np.asarray(wh, dtype=float)
        lower = _orientation(x, xh, u, uh, w, wh)
        n = x.shape[0]
        idx = np.arange(n)
        Xlo = np.tile(np.minimum(x, xh), (n, 1))
        Xhi = np.tile(np.maximum(x, xh), (n, 1))
        Xlo[idx, idx] = x
        Xhi[idx, idx] = x
        Ulo = np.tile(np.minimum(u, uh), (n, 1))
        Uhi = np.tile(np.maximum(u, uh), (n, 1))
        Wlo = np.tile(np.minimum(w, wh), (n, 1))
        Whi = np.tile(np.maximum(w, wh), (n, 1))
        flo, fhi = extension(Xlo, Xhi, Ulo, Uhi, Wlo, Whi)
        if np.any(fhi - flo < -_EXTENSION_TOL):
            raise ValueError("interval extension returned crossed enclosures")
        return flo[idx, idx] if lower else fhi[idx, idx]

    return d


class OpenLoopSystem:
    """Open-loop dynamics plus the machinery to embed them.

    Parameters
    ----------
    n, p, q:
        State, input, and disturbance dimensions (``q`` may be 0).
    f:
        Vector field ``f(x, u, w) -> xdot``; must accept batches with
        leading dimension ``m``.
    d:
        Optional closed-form decomposition ``d(x, xh, u, uh, w, wh)``.
    extension:
        Optional batched interval enclosure of ``f`` (see
        :func:`build_tight_decomposition`).  At least one of ``d`` and
        ``extension`` is required; with only ``extension`` the tight
        decomposition is synthesized.
    """

    def __init__(self, n, p, q, f, d=None, extension=None, name=""):
        if d is None and extension is None:
            raise ValueError("supply a decomposition function or an interval extension")
        self.n = int(n)
        self.p = int(p)
        self.q = int(q)
        self.f = f
        self.extension = extension
        self.d = d if d is not None else build_tight_decomposition(extension)
        self.name = name

    def __repr__(self):
        tag = self.name or "anonymous"
        return f"OpenLoopSystem({tag}, n={self.n}, p={self.p}, q={self.q})"


def _require_pair(pair, dim, what):
    if isinstance(pair, IntervalVector):
        lo, hi = pair.lo, pair.hi
    else:
        lo, hi = (np.asarray(v, dtype=float) for v in pair)
    if lo.shape != (dim,) or hi.shape != (dim,):
        raise ValueError(f"{what} pair must have dimension {dim}")
    return lo, hi


def open_loop_field(sys: OpenLoopSystem, lo, hi, ulo, uhi, wlo, whi) -> np.ndarray:
    """Open-loop embedding field ``(d(lo,hi,u,uh,w,wh), d(hi,lo,uh,u,wh,w))``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = sys.n
    if sys.extension is not None and np.all(lo <= hi):
        idx = np.arange(n)
        Xlo = np.tile(lo, (2 * n, 1))
        Xhi = np.tile(hi, (2 * n, 1))
        Xhi[idx, idx] = lo[idx]
        Xlo[n + idx, idx] = hi[idx]
        Ulo = np.tile(ulo, (2 * n, 1))
        Uhi = np.tile(uhi, (2 * n, 1))
        Wlo = np.tile(wlo, (2 * n, 1))
        Whi = np.tile(whi, (2 * n, 1))
        flo, fhi = sys.extension(Xlo, Xhi, Ulo, Uhi, Wlo, Whi)
        out = np.empty(2 * n)
        out[:n] = flo[idx, idx]
        out[n:] = fhi[n + idx, idx]
        return out
    lower = sys.d(lo, hi, ulo, uhi, wlo, whi)
    upper = sys.d(hi, lo, uhi, ulo, whi, wlo)
    return np.concatenate([lower, upper])


def open_embedding_field(sys: OpenLoopSystem, state: EmbeddingState, u_pair, w_pair=None) -> np.ndarray:
    """Evaluate the open-loop embedding field at an embedding state."""
    if state.n != sys.n:
        raise ValueError(f"state has dimension {state.n}, system expects {sys.n}")
    ulo, uhi = _require_pair(u_pair, sys.p, "input")
    if w_pair is None:
        wlo = whi = np.zeros(sys.q)
    else:
        wlo, whi = _require_pair(w_pair, sys.q, "disturbance")
    return open_loop_field(sys, state.lo, state.hi, ulo, uhi, wlo, whi)


class ClosedLoopEmbedding:
    """Embedding dynamics of the sampled-data neural-network loop.

    Holds the network inclusion function frozen over one control interval
    together with the per-face output intervals (``eta`` for the lower
    faces, ``nu`` for the upper faces) that feed the hybrid closed-loop
    decomposition.  Caches are rebuilt by :meth:`refresh_control` whenever
    a new control instant begins or the owning partition re-verifies.
    """

    def __init__(self, sys: OpenLoopSystem, w_box=None):
        self.sys = sys
        if w_box is None:
            self.w_lo = np.zeros(sys.q)
            self.w_hi = np.zeros(sys.q)
        else:
            self.w_lo, self.w_hi = _require_pair(w_box, sys.q, "disturbance")
        self.incl: InclusionFunction | None = None
        self.box: IntervalVector | None = None
        self.interval_index: int | None = None
        self.eta_lo = self.eta_hi = None  # (n, p) lower-face output bounds
        self.nu_lo = self.nu_hi = None    # (n, p) upper-face output bounds
        # per-interval constants and scratch buffers for the fast field path
        self._u_spans = None
        self._w_rows = None
        self._x_scratch = None

    def refresh_control(self, box: IntervalVector, reverify: bool, net=None,
                        inherited: InclusionFunction | None = None,
                        interval_index: int = 0) -> None:
        """Recompute the face caches at a control instant.

        With ``reverify`` the network is re-relaxed over ``box``; otherwise
        the inherited inclusion function is reused, which requires ``box``
        to lie inside its domain.
        """
        if reverify:
            if net is None:
                raise ValueError("re-verification requires the network")
            self.incl = make_inclusion(crown_bounds(net, box))
        else:
            incl = inherited if inherited is not None else self.incl
            if incl is None:
                raise ValueError("no inclusion function available to inherit")
            incl.check_domain(box.lo, box.hi)
            self.incl = incl
        n = self.sys.n
        lo, hi = box.lo, box.hi
        idx = np.arange(n)
        # lower faces: (lo, hi with coordinate i pinned down to lo_i)
        A = np.tile(lo, (n, 1))
        B = np.tile(hi, (n, 1))
        B[idx, idx] = lo[idx]
        self.eta_lo, self.eta_hi = self.incl.batch(A, B)
        # upper faces: (hi, lo with coordinate i pinned up to hi_i)
        A = np.tile(hi, (n, 1))
        B = np.tile(lo, (n, 1))
        B[idx, idx] = hi[idx]
        self.nu_lo, self.nu_hi = self.incl.batch(A, B)
        if self.sys.extension is not None:
            self._u_spans = (
                np.concatenate([self.eta_lo, np.minimum(self.nu_lo, self.nu_hi)]),
                np.concatenate([self.eta_hi, np.maximum(self.nu_lo, self.nu_hi)]),
            )
            self._w_rows = (np.tile(self.w_lo, (2 * n, 1)),
                            np.tile(self.w_hi, (2 * n, 1)))
            self._x_scratch = (np.empty((2 * n, n)), np.empty((2 * n, n)))
        self.box = box
        self.interval_index = interval_index

    def _require_caches(self, interval_index=None):
        if self.eta_lo is None:
            raise RuntimeError("control caches not initialized; call refresh_control")
        if interval_index is not None and interval_index != self.interval_index:
            raise RuntimeError(
                f"control caches are stale (built for interval {self.interval_index}, "
                f"asked for {interval_index})"
            )

    def field(self, lo, hi) -> np.ndarray:
        """Closed-loop embedding field at an ordered state ``lo <= hi``."""
        self._require_caches()
        sys = self.sys
        n = sys.n
        idx = np.arange(n)
        if sys.extension is not None:
            # face spans change per step but the input/disturbance rows are
            # per-interval constants; extensions must not mutate arguments
            Xlo, Xhi = self._x_scratch
            Xlo[:] = lo
            Xhi[:] = hi
            Xhi[idx, idx] = lo[idx]
            Xlo[n + idx, idx] = hi[idx]
            flo, fhi = sys.extension(Xlo, Xhi, self._u_spans[0], self._u_spans[1],
                                     self._w_rows[0], self._w_rows[1])
            out = np.empty(2 * n)
            out[:n] = flo[idx, idx]
            out[n:] = fhi[n + idx, idx]
            return out
        out = np.empty(2 * n)
        for i in range(n):
            out[i] = sys.d(lo, hi, self.eta_lo[i], self.eta_hi[i],
                           self.w_lo, self.w_hi)[i]
            out[n + i] = sys.d(hi, lo, self.nu_hi[i], self.nu_lo[i],
                               self.w_hi, self.w_lo)[i]
        return out

    def integrate(self, lo, hi, dt: float, steps: int, order_tol: float = 1e-9) -> np.ndarray:
        """Euler-integrate the embedding; returns ``(steps+1, 2, n)``.

        Raises :class:`EmbeddingOrderError` if the state loses its ordering.
        """
        n = self.sys.n
        traj = np.empty((steps + 1, 2, n))
        cur_lo = np.array(lo, dtype=float)
        cur_hi = np.array(hi, dtype=float)
        traj[0, 0] = cur_lo
        traj[0, 1] = cur_hi
        for k in range(steps):
            rate = self.field(cur_lo, cur_hi)
            cur_lo = cur_lo + dt * rate[:n]
            cur_hi = cur_hi + dt * rate[n:]
            if np.any(cur_hi - cur_lo < -order_tol):
                raise EmbeddingOrderError(
                    f"embedding state lost ordering at step {k + 1}"
                )
            traj[k + 1, 0] = cur_lo
            traj[k + 1, 1] = cur_hi
        return traj


def closed_decomposition(emb: ClosedLoopEmbedding, state: EmbeddingState,
                         interval_index=None) -> np.ndarray:
    """One half of the closed-loop embedding field (reference path).

    For an ordered state the lower-face ``eta`` intervals are used; for a
    reversed state the upper-face ``nu`` intervals enter with swapped
    arguments, mirroring the two branches of the hybrid decomposition.
    """
    emb._require_caches(interval_index)
    sys = emb.sys
    if state.n != sys.n:
        raise ValueError(f"state has dimension {state.n}, system expects {sys.n}")
    a, b = state.lo, state.hi
    out = np.empty(sys.n)
    if state.ordered:
        for i in range(sys.n):
            out[i] = sys.d(a, b, emb.eta_lo[i], emb.eta_hi[i],
                           emb.w_lo, emb.w_hi)[i]
    else:
        for i in range(sys.n):
            out[i] = sys.d(a, b, emb.nu_hi[i], emb.nu_lo[i],
                           emb.w_hi, emb.w_lo)[i]
    return out


class DiscreteLTIEmbedding:
    """One-step interval map for ``x+ = A x + B N(x)``.

    Uses the per-step linear relaxation of the controller to form
    ``M_lo = A + B+ C_lo + B- C_hi`` and ``M_hi = A + B+ C_hi + B- C_lo``;
    the update splits both into positive and negative parts.
    """

    def __init__(self, A, B):
        self.A = np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float)
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise ValueError("A must be square")
        if self.B.ndim != 2 or self.B.shape[0] != self.A.shape[0]:
            raise ValueError("B must be n x p")
        self._Bp = np.maximum(self.B, 0.0)
        self._Bn = np.minimum(self.B, 0.0)
        self.incl: InclusionFunction | None = None
        self.box: IntervalVector | None = None
        self.interval_index: int | None = None
        self._update = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    def refresh_control(self, box: IntervalVector, reverify: bool, net=None,
                        inherited: InclusionFunction | None = None,
                        interval_index: int = 0) -> None:
        """Refresh the relaxation tuple and rebuild the split update matrices."""
        if reverify:
            if net is None:
                raise ValueError("re-verification requires the network")
            self.incl = make_inclusion(crown_bounds(net, box))
        else:
            incl = inherited if inherited is not None else self.incl
            if incl is None:
                raise ValueError("no inclusion function available to inherit")
            incl.check_domain(box.lo, box.hi)
            self.incl = incl
        lb = self.incl.bounds
        M_lo = self.A + self._Bp @ lb.C_lo + self._Bn @ lb.C_hi
        M_hi = self.A + self._Bp @ lb.C_hi + self._Bn @ lb.C_lo
        self._update = (
            np.maximum(M_lo, 0.0), np.minimum(M_lo, 0.0),
            np.maximum(M_hi, 0.0), np.minimum(M_hi, 0.0),
            self._Bp @ lb.d_lo + self._Bn @ lb.d_hi,
            self._Bn @ lb.d_lo + self._Bp @ lb.d_hi,
        )
        self.box = box
        self.interval_index = interval_index

    def step(self, lo, hi):
        if self._update is None:
            raise RuntimeError("control caches not initialized; call refresh_control")
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(lo > hi):
            raise EmbeddingOrderError("discrete embedding step requires an ordered state")
        Mlp, Mln, Mhp, Mhn, blo, bhi = self._update
        new_lo = Mlp @ lo + Mln @ hi + blo
        new_hi = Mhn @ lo + Mhp @ hi + bhi
        return new_lo, new_hi

    def integrate(self, lo, hi, dt: float, steps: int, order_tol: float = 1e-9) -> np.ndarray:
        traj = np.empty((steps + 1, 2, self.n))
        cur_lo = np.array(lo, dtype=float)
        cur_hi = np.array(hi, dtype=float)
        traj[0, 0] = cur_lo
        traj[0, 1] = cur_hi
        for k in range(steps):
            cur_lo, cur_hi = self.step(cur_lo, cur_hi)
            if np.any(cur_hi - cur_lo < -order_tol):
                raise EmbeddingOrderError(
                    f"embedding state lost ordering at step {k + 1}"
                )
            traj[k + 1, 0] = cur_lo
            traj[k + 1, 1] = cur_hi
        return traj


def lti_step(emb: DiscreteLTIEmbedding, state: EmbeddingState) -> EmbeddingState:
    """Advance the discrete-time embedding one step (ordered states only)."""
    if not state.ordered:
        raise EmbeddingOrderError("discrete embedding step requires an ordered state")
    lo, hi = emb.step(state.lo, state.hi)
    return EmbeddingState(lo, hi)
