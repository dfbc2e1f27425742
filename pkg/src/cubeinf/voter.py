"""Discrete-time edge-ordered voter model and its coalescing dual walk.

Model: a strongly connected digraph with a total order on its edges.  At
global time k >= 1 the edge with index ((k-1) mod n) fires: with
probability 1/2 (coin +1) it recolors its target with its origin's color,
otherwise nothing happens.  The coin for time k is bit k of the input
stream, so the bit for edge j (1-based) of cycle i sits at position
i*n + j.

The color of a vertex at time T is found by walking backward: undo times
T, T-1, ..., 1; whenever the current edge targets the walker's position
and its coin is +1, the walker moves to the edge's origin.  One backward
step of the time-homogeneous chain corresponds to one full cycle through
the edges, processed in reverse edge order — the only composition
consistent with the forward order (the duality test pins this down).

The fixation root is the vertex whose initial color the model fixates on;
the algorithm that finds it (backward walks from a randomized horizon)
has small revealment on sparse graphs, bounded by
(max stationary mass) * (1 + 2 zeta).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import mc
from .bitstream import (
    LazyInput,
    NoiseCoupling,
    bit_column,
    coupling_seeds,
    derive_seed,
    mix64,
    sample_seeds,
)
from .funcmodel import QueryFunction, eval_query
from .inequalities import AuditReport, make_audit

_MASK = (1 << 64) - 1


class GraphFormatError(ValueError):
    """Unreadable or invalid graph description."""


class OrderedDigraph:
    """A directed graph with a total edge order (the firing order).

    Vertices are 0-based ints.  Validated on construction: at least two
    vertices, no self-loops, strongly connected.
    """

    __slots__ = ("vertex_count", "edges", "origins", "targets")

    def __init__(self, vertex_count: int, edges):
        edges = tuple((int(o), int(t)) for o, t in edges)
        if vertex_count < 2:
            raise GraphFormatError(
                "need at least two vertices (no strongly connected"
                f" multi-vertex structure with V={vertex_count})"
            )
        for o, t in edges:
            if o == t:
                raise GraphFormatError(f"self-loop at vertex {o}")
            if not (0 <= o < vertex_count and 0 <= t < vertex_count):
                raise GraphFormatError(f"edge ({o},{t}) out of range")
        if not _strongly_connected(vertex_count, edges):
            raise GraphFormatError("graph is not strongly connected")
        self.vertex_count = vertex_count
        self.edges = edges
        self.origins = np.array([o for o, _ in edges], dtype=np.int64)
        self.targets = np.array([t for _, t in edges], dtype=np.int64)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"OrderedDigraph(V={self.vertex_count}, edges={self.edges})"

    def to_text(self) -> str:
        lines = [f"V {self.vertex_count}"]
        lines += [f"{o} {t}" for o, t in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "OrderedDigraph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or not lines[0].upper().startswith("V"):
            raise GraphFormatError("first line must be 'V <count>'")
        try:
            v = int(lines[0].split()[1])
            edges = []
            for ln in lines[1:]:
                o, t = ln.split()
                edges.append((int(o), int(t)))
        except (IndexError, ValueError) as exc:
            raise GraphFormatError(f"bad graph line: {exc}") from exc
        return cls(v, edges)


def _strongly_connected(v: int, edges) -> bool:
    reach = np.eye(v, dtype=bool)
    for o, t in edges:
        reach[o, t] = True
    for _ in range(max(1, v.bit_length() + 1)):
        reach = reach | (reach.astype(np.int32) @ reach.astype(np.int32) > 0)
    return bool(reach.all())


def directed_cycle(length: int) -> OrderedDigraph:
    """Cycle 0 -> 1 -> ... -> L-1 -> 0 with edges ordered along the cycle."""
    return OrderedDigraph(length, [(i, (i + 1) % length) for i in range(length)])


def load_graph(path: str) -> OrderedDigraph:
    try:
        with open(path) as fh:
            return OrderedDigraph.parse(fh.read())
    except OSError as exc:
        raise GraphFormatError(f"cannot read graph file {path!r}: {exc}") from exc


def enumerate_strongly_connected(max_vertices: int = 4, max_edges: int = 5):
    """Every strongly connected digraph (no self-loops) within the caps,
    edges in lexicographic firing order."""
    from itertools import combinations

    out = []
    for v in range(2, max_vertices + 1):
        candidates = [(a, b) for a in range(v) for b in range(v) if a != b]
        for size in range(v, max_edges + 1):
            for combo in combinations(candidates, size):
                if _strongly_connected(v, combo):
                    out.append(OrderedDigraph(v, combo))
    return out


# ---------------------------------------------------------------------------
# Forward dynamics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VoterState:
    black: frozenset[int]
    step: int = 0  # completed time steps


def edge_at_time(g: OrderedDigraph, k: int) -> tuple[int, int]:
    """(origin, target) of the edge firing at global time k >= 1."""
    o = g.edges[(k - 1) % g.n_edges]
    return o


def forward_step(state: VoterState, g: OrderedDigraph, coin: int) -> VoterState:
    """One time step: coin -1 leaves the state, coin +1 recolors the firing
    edge's target with its origin's color."""
    k = state.step + 1
    if coin == -1:
        return VoterState(state.black, k)
    o, t = edge_at_time(g, k)
    if o in state.black:
        return VoterState(state.black | {t}, k)
    return VoterState(state.black - {t}, k)


def simulate_forward(g: OrderedDigraph, black0, steps: int, stream) -> VoterState:
    state = VoterState(frozenset(black0), 0)
    for k in range(1, steps + 1):
        state = forward_step(state, g, stream.read(k))
    return state


def backward_endpoint(g: OrderedDigraph, vertex: int, time: int, stream) -> int:
    """Where the color of `vertex` at `time` came from at time zero."""
    pos = vertex
    for k in range(time, 0, -1):
        o, t = edge_at_time(g, k)
        if t == pos and stream.read(k) == 1:
            pos = o
    return pos


# ---------------------------------------------------------------------------
# The per-cycle backward chain, its stationary law, and zeta
# ---------------------------------------------------------------------------


def backward_cycle_matrix(g: OrderedDigraph) -> np.ndarray:
    """Row-stochastic one-cycle transition matrix of the backward walk.

    Per edge e the walker at e's target stays put or moves to e's origin
    with probability 1/2 each; a full backward cycle undoes the edges in
    reverse firing order, so the composed matrix is M_{e_n} ... M_{e_1}
    (row-vector convention).
    """
    v = g.vertex_count
    P = np.eye(v)
    for o, t in g.edges:  # building M_e @ P edge by edge applies e_n first
        M = np.eye(v)
        M[t, t] = 0.5
        M[t, o] += 0.5
        P = M @ P
    return P


def stationary_from_matrix(P: np.ndarray, tol: float = 1e-12, polish: int = 200000) -> np.ndarray:
    """Left fixed probability vector by power iteration (squaring-accelerated)."""
    Q = P.copy()
    for _ in range(200):
        if np.abs(Q - Q[0]).max() < 1e-14:
            break
        Q = Q @ Q
        Q /= Q.sum(axis=1, keepdims=True)
    pi = np.maximum(Q.mean(axis=0), 0.0)
    pi /= pi.sum()
    for _ in range(polish):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() < 1e-16:
            pi = nxt
            break
        pi = nxt
    if np.abs(pi @ P - pi).max() > tol:
        raise RuntimeError("power iteration failed to reach the residual target")
    return pi


def stationary(g: OrderedDigraph) -> np.ndarray:
    return stationary_from_matrix(backward_cycle_matrix(g))


def zeta(g: OrderedDigraph) -> float:
    """sup over sources of the 2^{-length}-weighted count of nonempty
    paths whose edge indices increase.

    Dynamic program: sweep the edges in increasing order, pushing half of
    the origin's accumulated weight to the target; the accumulated weight
    at w is the weighted count of increasing paths source -> w (empty path
    included), so the per-source value is the total minus one.
    """
    best = 0.0
    for v in range(g.vertex_count):
        w = np.zeros(g.vertex_count)
        w[v] = 1.0
        for o, t in g.edges:
            w[t] += 0.5 * w[o]
        best = max(best, float(w.sum()) - 1.0)
    return best


def mixing_time(P: np.ndarray, eps: float = 0.01, cap: int = 100000) -> int:
    """Smallest cycle count after which every row of P^k is within eps of
    the stationary law in sup norm."""
    pi = stationary_from_matrix(P)
    Q = P.copy()
    for k in range(1, cap + 1):
        if np.abs(Q - pi).max() < eps:
            return k
        Q = Q @ P
    raise RuntimeError(f"chain did not mix within {cap} cycles")


# ---------------------------------------------------------------------------
# The fixation-root algorithm
# ---------------------------------------------------------------------------


def default_horizon(g: OrderedDigraph) -> int:
    """Default backward-cycle count (and randomization window)."""
    return 50 * g.n_edges


def rho_algorithm(
    g: OrderedDigraph, N: int | None = None, M: int | None = None, budget: int = 10**7
) -> QueryFunction:
    """Querier producing the fixation root (a vertex index).

    Draws U uniform on {0..M} from the auxiliary randomness, walks
    backward from time (N+U)*n with a walker on every vertex, querying an
    edge's coin only when the edge targets a current walker position.  If
    the walkers have merged by time zero their common position is the
    root.  Otherwise it falls back to reading prefixes in order and
    rerunning the walk from doubled horizons.
    """
    N = default_horizon(g) if N is None else N
    M = N if M is None else M
    if N < 1 or M < 0:
        raise ValueError("need N >= 1 and M >= 0")
    n = g.n_edges
    edges = g.edges

    def factory(aux: random.Random):
        U = aux.randint(0, M)
        horizon = (N + U) * n
        held: dict[int, int] = {}
        positions = set(range(g.vertex_count))
        for k in range(horizon, 0, -1):
            o, t = edges[(k - 1) % n]
            if t in positions:
                coin = held.get(k)
                if coin is None:
                    coin = yield k
                    held[k] = coin
                if coin == 1:
                    positions.discard(t)
                    positions.add(o)
        if len(positions) == 1:
            return positions.pop()
        while True:
            horizon *= 2
            for k in range(1, horizon + 1):
                if k not in held:
                    held[k] = yield k
            positions = set(range(g.vertex_count))
            for k in range(horizon, 0, -1):
                o, t = edges[(k - 1) % n]
                if t in positions and held[k] == 1:
                    positions.discard(t)
                    positions.add(o)
            if len(positions) == 1:
                return positions.pop()

    return QueryFunction(factory, budget, name=f"rho[N={N},M={M}]")


def rho_indicator(
    g: OrderedDigraph, black_set, N: int | None = None, M: int | None = None, budget: int = 10**7
) -> QueryFunction:
    """±1 indicator 2·[root in black_set] - 1 as a query function."""
    base = rho_algorithm(g, N, M, budget)
    black = frozenset(black_set)

    def factory(aux: random.Random):
        root = yield from base.querier(aux)
        return 1 if root in black else -1

    return QueryFunction(factory, budget, name=f"rho-in[{sorted(black)}]")


# ---------------------------------------------------------------------------
# Vectorized batch engines (bit-identical to the scalar paths)
# ---------------------------------------------------------------------------


def _batch_u(master_seed: int, samples: int, M: int) -> np.ndarray:
    # same draw rho_algorithm makes: randint on Random(derive_seed(seed, s, 1))
    return np.array(
        [random.Random(derive_seed(master_seed, s, 1)).randint(0, M) for s in range(samples)],
        dtype=np.int64,
    )


def _uniform_column(seeds: np.ndarray, i: int) -> np.ndarray:
    from .bitstream import mix64_array

    with np.errstate(over="ignore"):
        w = mix64_array(seeds ^ np.uint64(mix64(i & _MASK)))
    return (w >> np.uint64(11)) * 2.0**-53


def backward_batch(
    g: OrderedDigraph,
    master_seed: int,
    samples: int,
    N: int | None = None,
    M: int | None = None,
    epsilon: float | None = None,
    track_k: int = 0,
    want_times: bool = False,
) -> dict:
    """Run the backward phase of the root algorithm for many samples at
    once.  Returns root vertices (-1 where the walks did not merge by time
    zero), per-tracked-bit query indicators, and optionally the global
    time at which each sample's walkers first merged.

    With `epsilon` set, a second coupled leg is run on the noised stream
    (same keep/fresh derivation as NoiseCoupling).
    """
    N = default_horizon(g) if N is None else N
    M = N if M is None else M
    n = g.n_edges
    v = g.vertex_count
    seeds = sample_seeds(master_seed, samples, 0)
    U = _batch_u(master_seed, samples, M)
    horizons = (N + U) * n
    t_max = int(horizons.max())

    pos = np.tile(np.arange(v, dtype=np.int64), (samples, 1))
    collapsed = False  # once every sample's walkers merged, track one walker
    noised = epsilon is not None
    if noised:
        pos2 = pos.copy()
        collapsed2 = False
        keep_s, fresh_s = coupling_seeds(seeds)
    queried = np.zeros((samples, track_k), dtype=bool) if track_k else None
    coal_time = np.full(samples, -1, dtype=np.int64) if want_times else None

    for k in range(t_max, 0, -1):
        active = horizons >= k
        o, t = g.edges[(k - 1) % n]
        coins = bit_column(seeds, k)
        if collapsed:
            hit = active & (pos == t)
            if queried is not None and k <= track_k:
                queried[:, k - 1] = hit
            pos = np.where(hit & (coins == 1), o, pos)
        else:
            at_t = pos == t
            hit = active & at_t.any(axis=1)
            if queried is not None and k <= track_k:
                queried[:, k - 1] = hit
            move = hit & (coins == 1)
            pos = np.where(move[:, None] & at_t, o, pos)
            eq = (pos == pos[:, :1]).all(axis=1)
            if want_times:
                fresh_merge = eq & (coal_time < 0) & active
                coal_time[fresh_merge] = k
            if eq.all() and bool(active.all()):
                pos = pos[:, 0].copy()
                collapsed = True
        if noised:
            u = _uniform_column(keep_s, k)
            coins2 = np.where(u >= epsilon, coins, bit_column(fresh_s, k))
            if collapsed2:
                pos2 = np.where(active & (pos2 == t) & (coins2 == 1), o, pos2)
            else:
                at_t2 = pos2 == t
                move2 = active & at_t2.any(axis=1) & (coins2 == 1)
                pos2 = np.where(move2[:, None] & at_t2, o, pos2)
                if bool(active.all()) and (pos2 == pos2[:, :1]).all():
                    pos2 = pos2[:, 0].copy()
                    collapsed2 = True

    if collapsed:
        merged = np.ones(samples, dtype=bool)
        roots = pos.copy()
    else:
        merged = (pos == pos[:, :1]).all(axis=1)
        roots = np.where(merged, pos[:, 0], -1)
    out = {
        "roots": roots,
        "merged": merged,
        "queried": queried,
        "coal_time": coal_time,
        "horizons": horizons,
        "U": U,
        "N": N,
        "M": M,
    }
    if noised:
        if collapsed2:
            merged2 = np.ones(samples, dtype=bool)
            out["roots_noised"] = pos2.copy()
        else:
            merged2 = (pos2 == pos2[:, :1]).all(axis=1)
            out["roots_noised"] = np.where(merged2, pos2[:, 0], -1)
        out["merged_noised"] = merged2
    return out


def _resolve_root_scalar(g, master_seed, s, N, M, epsilon=None) -> int:
    """Scalar fallback for samples whose batch walks did not merge."""
    alg = rho_algorithm(g, N, M)
    base = LazyInput(derive_seed(master_seed, s, 0))
    stream = NoiseCoupling(base, epsilon).noised if epsilon is not None else base
    out = eval_query(alg, stream, aux_seed=derive_seed(master_seed, s, 1))
    return out.value if out.determined else -1


def fixation_batch(
    g: OrderedDigraph,
    black0,
    master_seed: int,
    samples: int,
    max_cycles: int = 2000,
) -> dict:
    """Forward-simulate many runs to fixation.  Returns per-sample final
    color (True = all black) and the count that failed to fixate in time."""
    n = g.n_edges
    v = g.vertex_count
    seeds = sample_seeds(master_seed, samples, 0)
    colors = np.zeros((samples, v), dtype=bool)
    for b in black0:
        colors[:, b] = True
    fixated = np.zeros(samples, dtype=bool)
    black = np.zeros(samples, dtype=bool)
    counts = colors.sum(axis=1)
    done0 = (counts == 0) | (counts == v)
    black[done0] = counts[done0] == v
    fixated |= done0
    steps = np.zeros(samples, dtype=np.int64)
    for k in range(1, max_cycles * n + 1):
        if fixated.all():
            break
        o, t = g.edges[(k - 1) % n]
        coins = bit_column(seeds, k)
        transfer = (coins == 1) & ~fixated
        colors[transfer, t] = colors[transfer, o]
        if k % n == 0:
            counts = colors.sum(axis=1)
            newly = ~fixated & ((counts == 0) | (counts == v))
            black[newly] = counts[newly] == v
            steps[newly] = k
            fixated |= newly
    return {
        "black": black,
        "fixated": fixated,
        "failed": int((~fixated).sum()),
        "steps": steps,
    }


# ---------------------------------------------------------------------------
# Audits and sweeps
# ---------------------------------------------------------------------------


def revealment_bound_audit(
    g: OrderedDigraph,
    N: int | None = None,
    M: int | None = None,
    samples: int = 2000,
    track_k: int | None = None,
    seed: int = 0,
    mix_eps: float = 0.01,
) -> AuditReport:
    """Check sup-revealment of the root algorithm against
    (max stationary mass)(1 + 2 zeta), with the measured fallback rate and
    the mixing allowance reported as explicit slack."""
    N = default_horizon(g) if N is None else N
    M = N if M is None else M
    track_k = 2 * g.n_edges if track_k is None else track_k
    res = backward_batch(
        g, seed, samples, N=N, M=M, track_k=track_k, want_times=True
    )
    freqs = res["queried"].mean(axis=0)
    sup_i = int(np.argmax(freqs))
    sup_f = float(freqs[sup_i])
    sup_err = float(np.sqrt(max(sup_f * (1 - sup_f), 0.0) / samples))

    pi = stationary(g)
    z = zeta(g)
    bound = float(pi.max() * (1.0 + 2.0 * z))

    fallback = 1.0 - float(res["merged"].mean())
    coal = res["coal_time"][res["merged"]]
    window_hits = float((coal >= N * g.n_edges).mean()) if len(coal) else 0.0
    mean_coal_cycles = (
        float(((res["horizons"][res["merged"]] - coal) / g.n_edges).mean()) if len(coal) else float("nan")
    )
    k_mix = mixing_time(backward_cycle_matrix(g), mix_eps)

    mix_allowance = mix_eps * (1.0 + 2.0 * z)
    tolerance = 3.0 * sup_err + fallback + mix_allowance
    return make_audit(
        "voter-revealment-bound",
        sup_f,
        bound,
        "<=",
        tolerance,
        {
            "kind": "monte-carlo",
            "samples": samples,
            "N": N,
            "M": M,
            "track_k": track_k,
            "sup_bit": sup_i + 1,
            "sup_stderr": sup_err,
            "max_pi": float(pi.max()),
            "zeta": z,
            "fallback_rate": fallback,
            "window_rate": window_hits,
            "mean_coalescence_cycles": mean_coal_cycles,
            "mixing_cycles": k_mix,
            "mixing_allowance": mix_allowance,
        },
    )


def initial_state_stability_check(
    g: OrderedDigraph, black0, samples: int = 100000, seed: int = 0, max_cycles: int = 2000
) -> AuditReport:
    """Fixate-black frequency vs the stationary mass of the initial black
    set (noise on the initial state is stable: the law is exactly linear
    in the stationary weights)."""
    res = fixation_batch(g, black0, seed, samples, max_cycles)
    ok = res["fixated"]
    freq = float(res["black"][ok].mean()) if ok.any() else float("nan")
    err = float(np.sqrt(max(freq * (1 - freq), 0.0) / max(int(ok.sum()), 1)))
    pi = stationary(g)
    expected = float(sum(pi[v] for v in set(black0)))
    fail_rate = res["failed"] / samples
    return make_audit(
        "voter-initial-state-stability",
        abs(freq - expected),
        0.0,
        "<=",
        3.0 * err + fail_rate,
        {
            "kind": "monte-carlo",
            "samples": samples,
            "frequency": freq,
            "stderr": err,
            "expected": expected,
            "unfixated": res["failed"],
        },
    )


def sensitivity_sweep(
    jobs,
    epsilons,
    samples: int = 1500,
    seed: int = 0,
    N: int | None = None,
    M: int | None = None,
    batches: int = 20,
) -> list[dict]:
    """Noise covariance of the root-membership indicator per (graph, eps).

    `jobs` is a sequence of (name, graph, black_set).  Emits the
    revealment bound (max pi)(1+2 zeta) alongside each row.
    """
    rows = []
    for name, g, black in jobs:
        pi = stationary(g)
        bound = float(pi.max() * (1 + 2 * zeta(g)))
        black = frozenset(black)
        for eps in epsilons:
            res = backward_batch(g, seed, samples, N=N, M=M, epsilon=eps)
            roots = res["roots"].copy()
            roots2 = res["roots_noised"].copy()
            undet = 0
            for s in np.nonzero(roots < 0)[0]:
                roots[s] = _resolve_root_scalar(g, seed, int(s), res["N"], res["M"])
            for s in np.nonzero(roots2 < 0)[0]:
                roots2[s] = _resolve_root_scalar(g, seed, int(s), res["N"], res["M"], epsilon=eps)
            valid = (roots >= 0) & (roots2 >= 0)
            undet = int((~valid).sum())
            x = np.where(np.isin(roots[valid], list(black)), 1.0, -1.0)
            y = np.where(np.isin(roots2[valid], list(black)), 1.0, -1.0)
            per_batch = []
            size = max(1, len(x) // batches)
            for i in range(0, len(x) - size + 1, size):
                xa, ya = x[i : i + size], y[i : i + size]
                per_batch.append(float((xa * ya).mean() - xa.mean() * ya.mean()))
            est = mc.batch_means(per_batch)
            xi_full = float((x * y).mean() - x.mean() * y.mean())
            rows.append(
                {
                    "graph": name,
                    "epsilon": float(eps),
                    "xi": xi_full,
                    "stderr": est.stderr,
                    "bound": bound,
                    "samples": int(valid.sum()),
                    "undetermined": undet,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# Batch duality helpers (shared-randomness forward vs backward)
# ---------------------------------------------------------------------------


def forward_colors_batch(g: OrderedDigraph, colors0: np.ndarray, coins: np.ndarray) -> np.ndarray:
    """Color matrix after T steps; coins[s, k-1] is the coin at time k."""
    colors = colors0.copy()
    for k in range(1, coins.shape[1] + 1):
        o, t = g.edges[(k - 1) % g.n_edges]
        mask = coins[:, k - 1] == 1
        colors[mask, t] = colors[mask, o]
    return colors


def backward_endpoints_batch(g: OrderedDigraph, coins: np.ndarray) -> np.ndarray:
    """Time-zero source of every vertex's color at time T, per sample."""
    m = coins.shape[0]
    pos = np.tile(np.arange(g.vertex_count, dtype=np.int64), (m, 1))
    for k in range(coins.shape[1], 0, -1):
        o, t = g.edges[(k - 1) % g.n_edges]
        move = coins[:, k - 1] == 1
        pos = np.where(move[:, None] & (pos == t), o, pos)
    return pos
