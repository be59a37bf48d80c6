"""Complex root finding, multiplicity clustering, and branch tracking.

Roots come from simultaneous Aberth–Ehrlich iteration (:mod:`timf.kernels`)
polished by Newton; deflation is never used for final values.  ``track``
continues a labeled root set along a path in the complex z-plane, matching
consecutive root sets by minimal-total-distance assignment and adaptively
halving steps near root collisions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .polycore import Poly, BiPoly


class RootfindError(Exception):
    pass


class NoConvergence(RootfindError):
    def __init__(self, msg, worst_residual=None):
        super().__init__(msg)
        self.worst_residual = worst_residual


class DegreeDrop(RootfindError):
    """Leading coefficient vanished along a path; carries the offending z."""

    def __init__(self, msg, z=None):
        super().__init__(msg)
        self.z = z


class AssignmentAmbiguous(RootfindError):
    pass


DEFAULT_TAU_RESID = 1e-10
DEFAULT_TAU_CLUSTER_REL = 1e-6

# cached permutation index tables for brute-force assignment, degree <= 8
_PERM_CACHE: dict[int, np.ndarray] = {}


def _perms(n: int) -> np.ndarray:
    if n not in _PERM_CACHE:
        if n > 8:
            raise RootfindError("brute-force assignment capped at degree 8")
        _PERM_CACHE[n] = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    return _PERM_CACHE[n]


@dataclass
class RootSet:
    """All roots of one polynomial with residuals and multiplicity labels."""

    roots: np.ndarray
    residuals: np.ndarray
    labels: np.ndarray  # cluster label per root; -1 = unclustered
    tau_cluster: float | None = None

    def __len__(self):
        return len(self.roots)

    def cluster_sizes(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for lab in self.labels:
            if lab >= 0:
                out[lab] = out.get(lab, 0) + 1
        return out

    def cluster_values(self) -> list[complex]:
        """Mean root per cluster, ordered by label."""
        vals = []
        for lab in sorted(set(self.labels)):
            vals.append(complex(self.roots[self.labels == lab].mean()))
        return vals


def _coeff_array(p) -> np.ndarray:
    if isinstance(p, Poly):
        return p.as_array()
    return np.asarray(p, dtype=complex)


def _residual_scale(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(coeffs))
    n = len(coeffs) - 1
    return scale * np.maximum(1.0, np.abs(roots)) ** n


def all_roots(p, tau_resid: float = DEFAULT_TAU_RESID, seed: int = kernels.DEFAULT_SEED) -> RootSet:
    """Solve for all roots; residuals are checked against tau_resid times the
    coefficient scale.  Raises NoConvergence with the worst residual."""
    coeffs = _coeff_array(p)
    if len(coeffs) - 1 < 1:
        raise RootfindError("degree must be >= 1")
    roots, _ = kernels.aberth_roots(coeffs, seed=seed)
    # residuals are the ground truth; the kernel's step criterion may chatter
    # at machine precision near clustered roots
    resid = np.abs(np.polyval(coeffs[::-1], roots))
    limit = tau_resid * _residual_scale(coeffs, roots)
    if np.any(resid > limit):
        worst = float(np.max(resid / limit)) * tau_resid
        raise NoConvergence(f"root iteration residual {worst:.3e} exceeds "
                            f"tau_resid={tau_resid:.1e}", worst_residual=worst)
    return RootSet(roots=roots, residuals=resid,
                   labels=np.arange(len(roots)))


def multiplicity_cluster(rs: RootSet, tau_cluster: float | None = None) -> RootSet:
    """Single-linkage clustering of roots; cluster size estimates multiplicity.

    Default tolerance is 1e-6 times the root scale.
    """
    roots = rs.roots
    n = len(roots)
    if tau_cluster is None:
        scale = max(1.0, float(np.max(np.abs(roots))) if n else 1.0)
        tau_cluster = DEFAULT_TAU_CLUSTER_REL * scale
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= tau_cluster:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    # relabel clusters in order of first occurrence
    labels = np.empty(n, dtype=int)
    seen: dict[int, int] = {}
    for i in range(n):
        r = find(i)
        if r not in seen:
            seen[r] = len(seen)
        labels[i] = seen[r]
    return RootSet(roots=roots.copy(), residuals=rs.residuals.copy(),
                   labels=labels, tau_cluster=tau_cluster)


def match_roots(prev: np.ndarray, new: np.ndarray, ambiguity_rel: float = 1e-9,
                raise_ambiguous: bool = True):
    """Minimal-total-distance assignment of new roots to previous labels.

    Brute force over permutations (degrees here are <= 7).  Raises
    AssignmentAmbiguous when two different assignments tie within tolerance
    (unless raise_ambiguous is off, for collision handling in the tracker).
    """
    n = len(prev)
    if len(new) != n:
        raise RootfindError("root count changed between steps")
    if n == 1:
        return new.copy(), 0.0
    perms = _perms(n)
    dist = np.abs(prev[:, None] - new[None, :])
    costs = dist[np.arange(n)[None, :], perms].sum(axis=1)
    order = np.argsort(costs, kind="stable")
    best = order[0]
    if raise_ambiguous and len(order) > 1:
        second = order[1]
        scale = max(costs[best], 1e-300)
        if (costs[second] - costs[best]) <= ambiguity_rel * scale \
                and not np.array_equal(perms[best], perms[second]):
            raise AssignmentAmbiguous(
                f"two root assignments tie at cost {costs[best]:.6e}")
    return new[perms[best]], float(costs[best])


@dataclass
class CollisionEvent:
    """Recorded when adaptive halving bottoms out near a root collision."""

    z: complex
    labels: tuple[int, ...]
    separation: float


@dataclass
class BranchTrajectory:
    """One labeled branch along a z-path."""

    branch_id: int
    zs: list[complex] = field(default_factory=list)
    roots: list[complex] = field(default_factory=list)
    continuity: list[float] = field(default_factory=list)

    def csv_rows(self):
        for k, (z, r) in enumerate(zip(self.zs, self.roots)):
            yield (self.branch_id, z.real, z.imag, r.real, r.imag, k)


@dataclass
class TrackResult:
    trajectories: list[BranchTrajectory]
    collisions: list[CollisionEvent]

    def __iter__(self):
        return iter(self.trajectories)

    def __len__(self):
        return len(self.trajectories)

    def __getitem__(self, i):
        return self.trajectories[i]


def _family_solver(family):
    """Normalize a family (callable z->Poly/array, or BiPoly) to z->coeffs.

    BiPoly families evaluate to fixed-length arrays (no trailing-zero trim),
    so degree bookkeeping survives leading-coefficient zeros.
    """
    if isinstance(family, BiPoly):
        from .polycore import poly_eval
        float_coeffs = [c.to_float() for c in family.coeffs]

        def call_bipoly(z):
            return np.array([poly_eval(c, complex(z)) for c in float_coeffs],
                            dtype=complex)

        return call_bipoly

    def call(z):
        p = family(z)
        return _coeff_array(p)

    return call


def track(path, family, seed_roots=None, tau_resid: float = DEFAULT_TAU_RESID,
          seed: int = kernels.DEFAULT_SEED, max_depth: int = 14,
          step_budget: int = 256, record_all_samples: bool = False) -> TrackResult:
    """Track labeled roots of ``family`` along ``path`` (iterable of z).

    The step to the next path node is recursively halved whenever the closest
    pair of roots comes within 3x the largest per-root displacement (or the
    assignment ties); when halving bottoms out (depth or per-step solve
    budget), a branch-collision event is recorded at that z and labels carry
    through by the best available assignment instead of guessing.  Degree
    must stay constant along the path (DegreeDrop otherwise).
    """
    path = [complex(z) for z in path]
    if len(path) < 1:
        raise RootfindError("empty path")
    solve = _family_solver(family)

    def coeffs_checked(z):
        c = solve(z)
        scale = np.max(np.abs(c)) if len(c) else 0.0
        if scale == 0.0 or abs(c[-1]) <= 1e-13 * scale:
            raise DegreeDrop(f"leading coefficient vanished at z={z}", z=z)
        return c

    c0 = coeffs_checked(path[0])
    degree = len(c0) - 1
    if seed_roots is None:
        cur = all_roots(c0, tau_resid=tau_resid, seed=seed).roots
    else:
        cur = np.asarray(seed_roots, dtype=complex)
        if len(cur) != degree:
            raise RootfindError("seed does not match family degree at path start")

    trajs = [BranchTrajectory(branch_id=i, zs=[path[0]], roots=[complex(r)],
                              continuity=[0.0]) for i, r in enumerate(cur)]
    collisions: list[CollisionEvent] = []

    def solve_at(z):
        c = coeffs_checked(z)
        if len(c) - 1 != degree:
            raise DegreeDrop(f"degree changed at z={z}", z=z)
        return all_roots(c, tau_resid=tau_resid, seed=seed).roots

    def record_collision(z, matched):
        d = np.abs(matched[:, None] - matched[None, :])
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        collisions.append(CollisionEvent(z=z, labels=(int(i), int(j)),
                                         separation=float(d[i, j])))

    def advance(z0, z1, cur, depth, budget):
        """Returns matched roots at z1 plus samples [(z, roots, cost)];
        budget is a single-element list of remaining extra solves."""
        new = solve_at(z1)
        exhausted = (depth >= max_depth or budget[0] <= 0
                     or abs(z1 - z0) <= 1e-13 * (1 + abs(z1)))
        try:
            matched, cost = match_roots(cur, new)
        except AssignmentAmbiguous:
            if exhausted:
                matched, cost = match_roots(cur, new, raise_ambiguous=False)
                record_collision(z1, matched)
                return matched, [(z1, matched, float(np.max(np.abs(matched - cur))))]
            budget[0] -= 1
            zm = 0.5 * (z0 + z1)
            cur2, samples1 = advance(z0, zm, cur, depth + 1, budget)
            cur3, samples2 = advance(zm, z1, cur2, depth + 1, budget)
            return cur3, samples1 + samples2
        disp = np.abs(matched - cur)
        max_disp = float(disp.max()) if len(disp) else 0.0
        if degree > 1 and max_disp > 0:
            d = np.abs(matched[:, None] - matched[None, :])
            np.fill_diagonal(d, np.inf)
            # a pair is swap-risky when its separation is within 3x the step
            # displacement of either member (a tight pair moving slowly is
            # not at risk, however fast distant roots fly)
            pair_disp = np.maximum(disp[:, None], disp[None, :])
            if bool((d < 3.0 * pair_disp).any()):
                if not exhausted:
                    budget[0] -= 1
                    zm = 0.5 * (z0 + z1)
                    cur2, samples1 = advance(z0, zm, cur, depth + 1, budget)
                    cur3, samples2 = advance(zm, z1, cur2, depth + 1, budget)
                    return cur3, samples1 + samples2
                record_collision(z1, matched)
        return matched, [(z1, matched, max_disp)]

    for znext_i in range(1, len(path)):
        z0, z1 = path[znext_i - 1], path[znext_i]
        if z1 == z0:
            continue
        cur, samples = advance(z0, z1, cur, 0, [step_budget])
        keep = samples if record_all_samples else samples[-1:]
        for z, roots, cost in keep:
            for i, t in enumerate(trajs):
                t.zs.append(z)
                t.roots.append(complex(roots[i]))
                t.continuity.append(cost)
    return TrackResult(trajectories=trajs, collisions=collisions)


def track_reciprocal(path, family, **kw) -> TrackResult:
    """Track roots of the reciprocal polynomial (roots 1/root).

    Device for paths crossing a leading-coefficient zero of the original
    family: the reciprocal swaps leading and constant coefficients.
    """
    solve = _family_solver(family)

    def recip(z):
        return solve(z)[::-1]

    res = track(path, recip, **kw)
    for t in res.trajectories:
        t.roots = [1.0 / r if r != 0 else complex(np.inf) for r in t.roots]
    return res


def exact_multiplicity_roots(p: Poly, tau_resid: float = DEFAULT_TAU_RESID):
    """Roots with multiplicities for an exact-mode polynomial.

    Classical squarefree decomposition by exact gcd chains, so multiple roots
    are located from well-conditioned squarefree factors instead of the raw
    polynomial.  Returns a list of (root, multiplicity) pairs.
    """
    from .polycore import EXACT, gcd_univar

    if p.mode != EXACT:
        raise RootfindError("exact_multiplicity_roots requires exact coefficients")
    var = p.var
    # c[i] carries each root with multiplicity max(m - i, 0)
    c = [p.to_mpoly().canonical()]
    while c[-1].degree_in(var) > 0:
        c.append(gcd_univar(c[-1], c[-1].derivative(var)))
    # d[i] = c[i-1]/c[i] carries roots of multiplicity >= i, each once
    d = [c[i - 1].div_exact(c[i]) for i in range(1, len(c))]
    out = []
    for m in range(1, len(d) + 1):
        # roots of exact multiplicity m: d[m-1] / d[m]
        em = d[m - 1].div_exact(d[m]) if m < len(d) else d[m - 1]
        if em.degree_in(var) < 1:
            continue
        factor = em.to_poly(var)
        if factor.degree == 1:
            a0, a1 = (factor.coeffs + [0, 0])[:2]
            r = -(complex(_to_c(a0)) / complex(_to_c(a1)))
            out.append((r, m))
        else:
            for r in all_roots(factor.to_float(), tau_resid=tau_resid).roots:
                out.append((complex(r), m))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def _to_c(v):
    from .polycore import QQi
    return complex(v) if isinstance(v, QQi) else complex(v)


TRAJECTORY_CSV_COLUMNS = ("branch_id", "re_z", "im_z", "re_root", "im_root", "step_index")


def trajectories_to_csv_lines(trajs) -> list[str]:
    lines = [",".join(TRAJECTORY_CSV_COLUMNS)]
    for t in trajs:
        for row in t.csv_rows():
            bid, rez, imz, rer, imr, k = row
            lines.append(f"{bid},{rez!r},{imz!r},{rer!r},{imr!r},{k}")
    return lines
