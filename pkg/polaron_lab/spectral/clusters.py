from typing import List, Sequence

DEFAULT_CLUSTER_TOL = 1e-7


def cluster_ids(values: Sequence[float], cluster_tol: float = DEFAULT_CLUSTER_TOL) -> List[int]:
    """Greedy adjacent clustering: a value joins the previous cluster if within cluster_tol·(1 + |prev|)."""
    ids: List[int] = []
    for position, value in enumerate(values):
        if position == 0:
            ids.append(0)
            continue
        previous = values[position - 1]
        if value < previous:
            raise ValueError("values must be ascending")
        joins = value - previous <= cluster_tol * (1.0 + abs(previous))
        ids.append(ids[-1] if joins else ids[-1] + 1)
    return ids


def degeneracy_clusters(values: Sequence[float], cluster_tol: float = DEFAULT_CLUSTER_TOL) -> List[int]:
    ids = cluster_ids(values, cluster_tol)
    multiplicities: List[int] = []
    for position, cluster in enumerate(ids):
        if position and cluster == ids[position - 1]:
            multiplicities[-1] += 1
        else:
            multiplicities.append(1)
    return multiplicities
