"""A small deterministic semidefinite-program solver.

Problems are stated over Hermitian matrix variables as

    minimize    sum_v tr(C_v X_v) + offset
    subject to  linear operator equalities   sum_v L(X_v) = B
                semidefinite constraints     sum_v L(X_v) + F >= 0

and solved by a consensus ADMM splitting in real ``svec`` coordinates: the
iteration alternates an exact projection onto the affine constraint set
(through a cached pseudoinverse factorization) with a projection onto the
product of semidefinite cones (blockwise eigendecompositions), plus the usual
scaled dual update, over-relaxation, and residual-balancing penalty updates.

The multiplier of the affine projection furnishes a dual vector ``y`` with
``c - A^T y`` exact by construction, so dual feasibility only needs a cone
distance; the reported ``dual_value`` is ``b^T y``, and the Hermitian dual
block attached to each semidefinite constraint is available through
``extract_dual_witness`` (for the constraint ``X >= F`` this is the PSD
matrix pairing with ``F`` in the dual objective).

Everything is dense numpy; intended for matrix blocks up to 64 x 64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import hermitianize

MAX_BLOCK_SIDE = 64

_SQRT2 = np.sqrt(2.0)


def _triu_cache(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def svec(m: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a Hermitian matrix.

    Layout: the n real diagonal entries, then sqrt(2) * real and sqrt(2) *
    imaginary parts of the strict upper triangle; the Euclidean inner product
    of two svecs equals the Hilbert-Schmidt inner product.
    """
    m = np.asarray(m)
    n = m.shape[0]
    rows, cols = _triu_cache(n)
    out = np.empty(n * n)
    out[:n] = np.real(np.diag(m))
    k = n + rows.size
    out[n:k] = _SQRT2 * np.real(m[rows, cols])
    out[k:] = _SQRT2 * np.imag(m[rows, cols])
    return out


def unsvec(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    rows, cols = _triu_cache(n)
    m = np.zeros((n, n), dtype=complex)
    m[np.arange(n), np.arange(n)] = v[:n]
    k = n + rows.size
    upper = (v[n:k] + 1j * v[k:]) / _SQRT2
    m[rows, cols] = upper
    m[cols, rows] = upper.conj()
    return m


LinearTerm = tuple[str, "Callable[[np.ndarray], np.ndarray] | None", int]
# (variable name, real-linear map on Hermitian matrices or None for identity,
#  output matrix side)


@dataclass
class _PsdConstraint:
    terms: list[LinearTerm]
    offset: np.ndarray | None
    source: tuple[str, object] = ("unset", None)  # filled at canonicalization


@dataclass
class _EqConstraint:
    terms: list[LinearTerm]
    target: np.ndarray


class SdpProblem:
    """Container for one SDP; build with add_var / minimize / add_eq / add_psd."""

    def __init__(self):
        self.var_sides: dict[str, int] = {}
        self.objective: dict[str, np.ndarray] = {}
        self.objective_offset: float = 0.0
        self.equalities: list[_EqConstraint] = []
        self.psd_constraints: list[_PsdConstraint] = []

    def add_var(self, name: str, side: int) -> None:
        if name in self.var_sides:
            raise ValueError(f"variable {name!r} already declared")
        if not 1 <= side <= MAX_BLOCK_SIDE:
            raise ValueError(f"variable side {side} outside 1..{MAX_BLOCK_SIDE}")
        self.var_sides[name] = int(side)

    def minimize(self, terms: dict[str, np.ndarray], offset: float = 0.0) -> None:
        for name, coeff in terms.items():
            side = self._side(name)
            coeff = np.asarray(coeff, dtype=complex)
            if coeff.shape != (side, side):
                raise ValueError(f"objective coefficient for {name!r} has wrong shape")
            self.objective[name] = hermitianize(coeff)
        self.objective_offset = float(offset)

    def add_eq(self, terms: Sequence[LinearTerm], target: np.ndarray | float) -> None:
        terms = [self._check_term(t) for t in terms]
        out = terms[0][2]
        if np.isscalar(target):
            target = np.array([[target]], dtype=complex) if out == 1 else float(target) * np.eye(out)
        target = np.asarray(target, dtype=complex)
        if target.shape != (out, out):
            raise ValueError(f"equality target shape {target.shape} != ({out}, {out})")
        self.equalities.append(_EqConstraint(terms, hermitianize(target)))

    def add_psd(self, terms: Sequence[LinearTerm], offset: np.ndarray | None = None) -> int:
        """Constrain sum of terms plus offset to the PSD cone; returns its index."""
        terms = [self._check_term(t) for t in terms]
        out = terms[0][2]
        if offset is not None:
            offset = hermitianize(np.asarray(offset, dtype=complex))
            if offset.shape != (out, out):
                raise ValueError(f"psd offset shape {offset.shape} != ({out}, {out})")
        self.psd_constraints.append(_PsdConstraint(terms, offset))
        return len(self.psd_constraints) - 1

    def _side(self, name: str) -> int:
        if name not in self.var_sides:
            raise ValueError(f"unknown variable {name!r}")
        return self.var_sides[name]

    def _check_term(self, term: LinearTerm) -> LinearTerm:
        name, fn, out = term
        self._side(name)
        if not 1 <= int(out) <= MAX_BLOCK_SIDE:
            raise ValueError(f"constraint block side {out} outside 1..{MAX_BLOCK_SIDE}")
        return (name, fn, int(out))


@dataclass
class SolverOptions:
    tol_gap: float = 1e-7
    tol_feas: float = 1e-8
    max_iters: int = 200_000
    rho: float = 1.0
    over_relaxation: float = 1.7
    check_every: int = 25
    adaptive_rho: bool = True
    stall_tolerance: float = 1e-4


@dataclass
class SdpSolution:
    status: str  # optimal | max_iters | infeasible | unbounded
    primal_value: float
    dual_value: float
    variables: dict[str, np.ndarray]
    psd_duals: list[np.ndarray]
    residuals: dict[str, float] = field(default_factory=dict)
    iterations: int = 0


def _materialize(fn, in_side: int, out_side: int) -> np.ndarray:
    """Real matrix of a Hermitian-to-Hermitian linear map in svec coordinates."""
    if fn is None:
        if in_side != out_side:
            raise ValueError("identity term needs equal input and output sides")
        return np.eye(in_side * in_side)
    mat = np.empty((out_side * out_side, in_side * in_side))
    basis_vec = np.zeros(in_side * in_side)
    for k in range(in_side * in_side):
        basis_vec[k] = 1.0
        image = fn(unsvec(basis_vec, in_side))
        mat[:, k] = svec(hermitianize(np.asarray(image, dtype=complex)))
        basis_vec[k] = 0.0
    return mat


class _Canonical:
    """Flattened conic form: min c.x s.t. A x = b, blocks of x free or PSD."""

    def __init__(self, problem: SdpProblem):
        self.block_names: list[str] = []
        self.block_sides: list[int] = []
        self.block_cone: list[bool] = []  # True = PSD
        self.block_offsets: list[int] = []
        self.psd_sources: list[tuple[str, int]] = []  # ("block", block index)

        offset = 0
        index_of: dict[str, int] = {}
        for name, side in problem.var_sides.items():
            index_of[name] = len(self.block_names)
            self.block_names.append(name)
            self.block_sides.append(side)
            self.block_cone.append(False)
            self.block_offsets.append(offset)
            offset += side * side

        rows: list[np.ndarray] = []
        rhs: list[np.ndarray] = []

        def add_rows(terms, target, extra_block=None):
            out = terms[0][2]
            n_rows = out * out
            block = np.zeros((n_rows, offset_total[0]))
            for name, fn, term_out in terms:
                if term_out != out:
                    raise ValueError("mixed output sides inside one constraint")
                b_idx = index_of[name]
                side = self.block_sides[b_idx]
                col = self.block_offsets[b_idx]
                block[:, col : col + side * side] += _materialize(fn, side, out)
            if extra_block is not None:
                col, side = extra_block
                block[:, col : col + side * side] -= np.eye(side * side)
            rows.append(block)
            rhs.append(svec(target))

        # slacks may extend the x vector, so track total width mutably
        offset_total = [offset]

        slack_plan: list[tuple[int, _PsdConstraint]] = []
        for idx, psd in enumerate(problem.psd_constraints):
            bare = (
                len(psd.terms) == 1
                and psd.terms[0][1] is None
                and psd.offset is None
                and not self.block_cone[index_of[psd.terms[0][0]]]
            )
            if bare:
                b_idx = index_of[psd.terms[0][0]]
                self.block_cone[b_idx] = True
                self.psd_sources.append(("block", b_idx))
            else:
                side = psd.terms[0][2]
                b_idx = len(self.block_names)
                self.block_names.append(f"_slack{idx}")
                self.block_sides.append(side)
                self.block_cone.append(True)
                self.block_offsets.append(offset_total[0])
                offset_total[0] += side * side
                self.psd_sources.append(("block", b_idx))
                slack_plan.append((b_idx, psd))

        n = offset_total[0]
        self.n = n

        # equality rows need the final width, so pad-as-we-go via offset_total
        for eq in problem.equalities:
            add_rows(eq.terms, eq.target)
        for b_idx, psd in slack_plan:
            side = self.block_sides[b_idx]
            target = -psd.offset if psd.offset is not None else np.zeros((side, side))
            add_rows(psd.terms, target, extra_block=(self.block_offsets[b_idx], side))

        if rows:
            a = np.zeros((sum(r.shape[0] for r in rows), n))
            b = np.concatenate(rhs)
            at = 0
            for r in rows:
                a[at : at + r.shape[0], : r.shape[1]] = r
                at += r.shape[0]
        else:
            a = np.zeros((0, n))
            b = np.zeros(0)

        # prune identically zero rows; a zero row with nonzero target is
        # an immediate certificate of infeasibility
        norms = np.max(np.abs(a), axis=1) if a.shape[0] else np.zeros(0)
        zero_rows = norms < 1e-12
        self.trivially_infeasible = bool(np.any(zero_rows & (np.abs(b) > 1e-9)))
        keep = ~zero_rows
        self.a = a[keep]
        self.b = b[keep]

        self.c = np.zeros(n)
        for name, coeff in problem.objective.items():
            b_idx = index_of[name]
            col = self.block_offsets[b_idx]
            side = self.block_sides[b_idx]
            self.c[col : col + side * side] = svec(coeff)
        self.c_offset = problem.objective_offset

    def block_slices(self):
        for side, cone, col in zip(self.block_sides, self.block_cone, self.block_offsets):
            yield slice(col, col + side * side), side, cone


def _cone_project(canon: _Canonical, v: np.ndarray) -> np.ndarray:
    """Project onto the product cone (free blocks pass through)."""
    out = v.copy()
    by_side: dict[int, list[slice]] = {}
    for sl, side, cone in canon.block_slices():
        if cone:
            by_side.setdefault(side, []).append(sl)
    for side, slices in by_side.items():
        stack = np.stack([unsvec(v[sl], side) for sl in slices])
        w, vecs = np.linalg.eigh(stack)
        w = np.clip(w, 0.0, None)
        rebuilt = vecs @ (w[..., None] * vecs.conj().swapaxes(-1, -2))
        for sl, m in zip(slices, rebuilt):
            out[sl] = svec(hermitianize(m))
    return out


def _cone_dual_distance(canon: _Canonical, s: np.ndarray) -> float:
    """Max-norm distance of s from the dual cone (zero for free blocks)."""
    worst = 0.0
    for sl, side, cone in canon.block_slices():
        if cone:
            w = np.linalg.eigvalsh(unsvec(s[sl], side))
            worst = max(worst, max(0.0, float(-w[0])))
        else:
            block = s[sl]
            if block.size:
                worst = max(worst, float(np.max(np.abs(block))))
    return worst


class _AffineProjector:
    """Cached least-squares projector onto {x : A x = b}."""

    def __init__(self, a: np.ndarray, b: np.ndarray):
        self.a = a
        self.b = b
        if a.shape[0] == 0:
            self.empty = True
            return
        self.empty = False
        gram = a @ a.T
        w, u = np.linalg.eigh(gram)
        cutoff = max(w[-1], 0.0) * 1e-12 + 1e-300
        inv = np.where(w > cutoff, 1.0 / np.maximum(w, cutoff), 0.0)
        self.u = u
        self.inv = inv

    def solve_gram(self, r: np.ndarray) -> np.ndarray:
        return self.u @ (self.inv * (self.u.T @ r))

    def project(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (projection, gram multiplier mu) with x = w - A^T mu."""
        if self.empty:
            return w, np.zeros(0)
        mu = self.solve_gram(self.a @ w - self.b)
        return w - self.a.T @ mu, mu


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    """Solve an SdpProblem; deterministic for fixed inputs and options."""
    opts = options or SolverOptions()
    canon = _Canonical(problem)
    if canon.trivially_infeasible:
        empty = {name: np.zeros((side, side), dtype=complex) for name, side in problem.var_sides.items()}
        return SdpSolution(
            status="infeasible",
            primal_value=float("nan"),
            dual_value=float("nan"),
            variables=empty,
            psd_duals=[np.zeros((p.terms[0][2],) * 2, dtype=complex) for p in problem.psd_constraints],
            residuals={"primal_feas": float("inf"), "dual_feas": float("inf"), "gap": float("inf")},
        )

    projector = _AffineProjector(canon.a, canon.b)
    n = canon.n
    c = canon.c
    rho = opts.rho
    alpha = opts.over_relaxation

    x = np.zeros(n)
    z = np.zeros(n)
    u = np.zeros(n)

    b_scale = 1.0 + (float(np.max(np.abs(canon.b))) if canon.b.size else 0.0)
    c_scale = 1.0 + (float(np.max(np.abs(c))) if c.size else 0.0)

    best = None  # (score, snapshot)
    stall_counter = 0
    stall_best = np.inf
    stall_obj_start = 0.0
    stall_limit = max(1, int(0.1 * opts.max_iters / opts.check_every))

    status = "max_iters"
    iters_done = opts.max_iters
    mu = np.zeros(canon.a.shape[0])

    for it in range(1, opts.max_iters + 1):
        w = z - u - c / rho
        x, mu = projector.project(w)
        x_rel = alpha * x + (1.0 - alpha) * z
        z_prev = z
        z = _cone_project(canon, x_rel + u)
        u = u + x_rel - z

        if it % opts.check_every != 0 and it != opts.max_iters:
            continue

        y = -rho * mu
        s_tilde = c - canon.a.T @ y if canon.a.shape[0] else c.copy()
        primal_feas = float(np.max(np.abs(canon.a @ z - canon.b))) if canon.a.shape[0] else 0.0
        dual_feas = _cone_dual_distance(canon, s_tilde)
        obj_p = float(c @ z) + canon.c_offset
        obj_d = float(canon.b @ y) + canon.c_offset if canon.b.size else canon.c_offset
        gap = abs(obj_p - obj_d) / (1.0 + abs(obj_p) + abs(obj_d))

        score = max(primal_feas / b_scale, dual_feas / c_scale, gap)
        snapshot = (z.copy(), s_tilde.copy(), y.copy(), obj_p, obj_d, primal_feas, dual_feas, gap, it)
        if best is None or score < best[0]:
            best = (score, snapshot)

        if (
            primal_feas <= opts.tol_feas * b_scale
            and dual_feas <= opts.tol_feas * c_scale * 10
            and gap <= opts.tol_gap
        ):
            status = "optimal"
            iters_done = it
            best = (score, snapshot)
            break

        # objective diverging to -inf along feasible iterates: unbounded
        if obj_p < -1e9 * c_scale:
            status = "unbounded"
            iters_done = it
            best = (score, snapshot)
            break

        # persistent affine/cone disagreement: infeasible or unbounded ray
        feas_mark = max(primal_feas / b_scale, float(np.max(np.abs(x - z))) if n else 0.0)
        if feas_mark > opts.stall_tolerance:
            if feas_mark > stall_best * (1.0 - 1e-3):
                stall_counter += 1
            else:
                stall_counter = 0
                stall_obj_start = obj_p
            stall_best = min(stall_best, feas_mark)
            if stall_counter >= stall_limit:
                affine_ok = primal_feas <= 1e-2 * opts.stall_tolerance * b_scale
                diverging = obj_p < stall_obj_start - 10.0 * c_scale
                if affine_ok and diverging:
                    status = "unbounded"
                    iters_done = it
                    break
                if not affine_ok:
                    status = "infeasible"
                    iters_done = it
                    break
                stall_counter = 0  # slow but apparently convergent; keep going
        else:
            stall_counter = 0
            stall_obj_start = obj_p

        if opts.adaptive_rho and it % (opts.check_every * 4) == 0:
            r_prim = float(np.linalg.norm(x - z))
            r_dual = float(np.linalg.norm(rho * (z - z_prev)))
            if r_prim > 10.0 * r_dual and rho < 1e4:
                rho *= 2.0
                u /= 2.0
            elif r_dual > 10.0 * r_prim and rho > 1e-4:
                rho /= 2.0
                u *= 2.0

    if best is None:
        y = -rho * mu
        s_tilde = c - canon.a.T @ y if canon.a.shape[0] else c.copy()
        best = (np.inf, (z, s_tilde, y, float(c @ z), 0.0, np.inf, np.inf, np.inf, iters_done))

    z_best, s_best, y_best, obj_p, obj_d, primal_feas, dual_feas, gap, it_best = best[1]

    variables = {}
    for name, side in problem.var_sides.items():
        b_idx = canon.block_names.index(name)
        col = canon.block_offsets[b_idx]
        variables[name] = unsvec(z_best[col : col + side * side], side)

    psd_duals = []
    for kind, b_idx in canon.psd_sources:
        col = canon.block_offsets[b_idx]
        side = canon.block_sides[b_idx]
        psd_duals.append(unsvec(s_best[col : col + side * side], side))

    return SdpSolution(
        status=status,
        primal_value=obj_p,
        dual_value=obj_d,
        variables=variables,
        psd_duals=psd_duals,
        residuals={"primal_feas": primal_feas, "dual_feas": dual_feas, "gap": gap},
        iterations=iters_done,
    )


def extract_dual_witness(solution: SdpSolution, psd_index: int = 0) -> np.ndarray:
    """Hermitian dual block of the given semidefinite constraint.

    For a constraint of the form ``X >= F`` this is the PSD multiplier W
    maximizing ``tr(W F)`` in the dual program.
    """
    if not 0 <= psd_index < len(solution.psd_duals):
        raise ValueError(f"no psd constraint with index {psd_index}")
    return hermitianize(solution.psd_duals[psd_index])
