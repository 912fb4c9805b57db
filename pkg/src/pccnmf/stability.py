"""Basis stability: optimal matching of two basis sets under cosine distance.

Two factorizations of related data (two noise halves, or two seeds on the
same data) yield two sets of basis columns. They are paired by solving the
linear assignment problem on the pairwise cosine-distance matrix with an
exact Hungarian solver; the matched-distance distribution summarizes how
stable the learned features are.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DataMatrix, apply_flip_noise
from .errors import ParameterError
from .nmf import LOSS_FROBENIUS, SolverOptions, factorize
from .report import RunReport, matrix_digest, timestamp


def cosine_distance(v1, v2) -> float:
    """1 - cos(v1, v2), with distance 1 when either vector is all-zero."""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != v2.shape:
        raise ParameterError(f"length mismatch: {v1.shape} vs {v2.shape}")
    n1 = float(v1 @ v1)
    n2 = float(v2 @ v2)
    if n1 == 0.0 or n2 == 0.0:
        return 1.0
    return 1.0 - float(v1 @ v2) / np.sqrt(n1 * n2)


def cosine_distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine distances between columns of a and columns of b.

    Entry (i, j) is the distance between a[:, i] and b[:, j]; all-zero
    columns are at distance 1 from everything.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[0] != b.shape[0]:
        raise ParameterError(f"column length mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = np.sqrt((a * a).sum(axis=0))
    nb = np.sqrt((b * b).sum(axis=0))
    cos = (a.T @ b) / np.outer(np.where(na == 0, 1.0, na), np.where(nb == 0, 1.0, nb))
    cos[na == 0, :] = 0.0
    cos[:, nb == 0] = 0.0
    return 1.0 - cos


def solve_assignment(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-cost perfect matching on a square cost matrix.

    Shortest-augmenting-path Hungarian method, O(n^3). Returns
    (columns, total) where columns[row] is the assigned column. Deterministic;
    among equal-cost optima it returns one fixed solution (see
    :func:`lexicographic_assignment` for the tie-break used publicly).
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ParameterError("cost matrix must be square")
    n = cost.shape[0]
    # Potentials and matching use 1-based columns; column 0 is the virtual root.
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match = np.zeros(n + 1, dtype=np.int64)     # match[col] = row (1-based, 0 = free)
    way = np.zeros(n + 1, dtype=np.int64)
    for row in range(1, n + 1):
        match[0] = row
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            reduced = cost[i0 - 1, :] - u[i0] - v[1:]
            better = (reduced < minv[1:]) & ~used[1:]
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            candidates = np.where(used[1:], np.inf, minv[1:])
            j0 = int(np.argmin(candidates)) + 1
            delta = candidates[j0 - 1]
            u[match[used]] += delta
            v[used] -= delta
            minv[1:][~used[1:]] -= delta
            if match[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    columns = np.zeros(n, dtype=np.int64)
    for col in range(1, n + 1):
        columns[match[col] - 1] = col - 1
    total = float(cost[np.arange(n), columns].sum())
    return columns, total


def lexicographic_assignment(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Lexicographically-smallest assignment among the minimum-cost optima.

    Greedy prefix refinement: for each row in order, keep the smallest column
    that still allows the known optimal total (within 1e-10 relative slack,
    which absorbs float roundoff and treats numerically-tied optima as ties).
    """
    cost = np.asarray(cost, dtype=np.float64)
    _, total = solve_assignment(cost)
    n = cost.shape[0]
    tol = 1e-10 * (1.0 + abs(total))
    free = list(range(n))
    chosen = np.zeros(n, dtype=np.int64)
    prefix = 0.0
    for row in range(n):
        for pos, col in enumerate(free):
            rest_rows = np.arange(row + 1, n)
            rest_cols = [c for c in free if c != col]
            if rest_rows.size:
                _, rest = solve_assignment(cost[np.ix_(rest_rows, rest_cols)])
            else:
                rest = 0.0
            if prefix + cost[row, col] + rest <= total + tol:
                chosen[row] = col
                prefix += cost[row, col]
                free.pop(pos)
                break
        else:
            raise AssertionError("no feasible column found; assignment solver is inconsistent")
    total = float(cost[np.arange(n), chosen].sum())
    return chosen, total


@dataclass(frozen=True)
class Matching:
    """Optimal pairing of two equal-size basis sets."""

    assignment: np.ndarray   # assignment[a] = matched column of the second set
    distances: np.ndarray    # cosine distance of each matched pair
    total: float
    stats: dict              # mean / median / max / min of the distances

    def to_dict(self) -> dict:
        return {
            "assignment": [int(a) for a in self.assignment],
            "distances": [float(d) for d in self.distances],
            "total": self.total,
            "stats": {k: float(v) for k, v in self.stats.items()},
        }


def _distance_stats(distances: np.ndarray) -> dict:
    return {
        "mean": float(distances.mean()),
        "median": float(np.median(distances)),
        "max": float(distances.max()),
        "min": float(distances.min()),
    }


def match_bases(b1: np.ndarray, b2: np.ndarray) -> Matching:
    """Match columns of b1 to columns of b2 minimizing total cosine distance.

    Exact minimum (Hungarian); among equal-cost optima the lexicographically
    smallest assignment vector is returned.
    """
    b1 = np.asarray(b1, dtype=np.float64)
    b2 = np.asarray(b2, dtype=np.float64)
    if b1.shape != b2.shape:
        raise ParameterError(f"basis shape mismatch: {b1.shape} vs {b2.shape}")
    cost = cosine_distance_matrix(b1, b2)
    assignment, total = lexicographic_assignment(cost)
    distances = cost[np.arange(cost.shape[0]), assignment]
    return Matching(assignment=assignment, distances=distances, total=total,
                    stats=_distance_stats(distances))


def distance_histogram(distances: np.ndarray) -> list[tuple[float, float, int, float]]:
    """Histogram rows (bin_lo, bin_hi, count, pct): 20 uniform bins on [0, 1] plus an overflow bin (1, 2]."""
    distances = np.asarray(distances, dtype=np.float64)
    edges = np.linspace(0.0, 1.0, 21)
    counts, _ = np.histogram(np.clip(distances, None, 1.0), bins=edges)
    overflow = int((distances > 1.0).sum())
    # np.histogram put clipped overflow values in the last bin; move them out.
    counts[-1] -= overflow
    n = max(len(distances), 1)
    rows = [(float(edges[i]), float(edges[i + 1]), int(counts[i]), 100.0 * counts[i] / n)
            for i in range(20)]
    rows.append((1.0, 2.0, overflow, 100.0 * overflow / n))
    return rows


def stability_experiment(m: DataMatrix, rank: int, mode: str, xi: float = 0.0,
                         seed_a: int = 0, seed_b: int = 1,
                         opts: SolverOptions | None = None,
                         loss: str = LOSS_FROBENIUS) -> tuple[Matching, RunReport]:
    """Factorize two related views of ``m`` and match their bases.

    mode="noise_split": split columns in half, flip-noise the second half
    with intensity xi (noise stream seeded by seed_b), factorize both halves
    with the same solver seed seed_a.
    mode="seed_pair": factorize the full matrix twice, with seeds seed_a and
    seed_b.
    """
    started = timestamp()
    if mode == "noise_split":
        if m.n_images % 2 != 0:
            raise ParameterError(f"noise_split needs an even number of images, got {m.n_images}")
        half = m.n_images // 2
        first = m.replace_values(m.values[:, :half])
        second = apply_flip_noise(m.replace_values(m.values[:, half:]), xi, seed=seed_b)
        f1 = factorize(first, rank, loss, seed_a, opts)
        f2 = factorize(second, rank, loss, seed_a, opts)
    elif mode == "seed_pair":
        f1 = factorize(m, rank, loss, seed_a, opts)
        f2 = factorize(m, rank, loss, seed_b, opts)
    else:
        raise ParameterError(f"unknown mode {mode!r} (want 'noise_split' or 'seed_pair')")

    matching = match_bases(f1.basis, f2.basis)
    report = RunReport(
        command="stability_experiment",
        parameters={"rank": rank, "mode": mode, "xi": xi, "seed_a": seed_a,
                    "seed_b": seed_b, "loss": loss},
        seeds=[seed_a, seed_b],
        input_digests={"matrix": matrix_digest(m)},
        outputs={
            "matching": matching.to_dict(),
            "histogram": [list(row) for row in distance_histogram(matching.distances)],
            "final_losses": [float(f1.trace[-1]), float(f2.trace[-1])],
        },
        started=started,
        finished=timestamp(),
    )
    return matching, report
