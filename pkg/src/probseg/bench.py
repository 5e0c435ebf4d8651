"""Length-sorted batching and a simulated decode-cost proxy.

Real translation inference time is not reproduced. Instead each batch costs
``alpha * L + beta * L**2`` where ``L`` is the padded (longest) length in the
batch, in frames: a linear term for per-step work and a quadratic one for
attention over a sequence of that length. Only orderings between
segmentations are meaningful, never the absolute numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

from probseg.frames import SegmentList

DEFAULT_TOKEN_BUDGET = 100_000


@dataclass(frozen=True)
class CostModel:
    alpha: float = 1.0
    beta: float = 0.01

    def batch_cost(self, longest: int) -> float:
        return self.alpha * longest + self.beta * longest * longest


@dataclass(frozen=True)
class BatchPlan:
    batches: tuple[tuple[int, ...], ...]
    token_budget: int
    padded_frames: tuple[int, ...]
    real_frames: tuple[int, ...]
    simulated_cost: float

    @property
    def waste_ratio(self) -> float:
        padded = sum(self.padded_frames)
        return (padded - sum(self.real_frames)) / padded if padded else 0.0


def simulate_batches(
    segs: SegmentList | list[int],
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    cost_model: CostModel = CostModel(),
) -> BatchPlan:
    """Greedy length-sorted batching under a padded-frames budget.

    Segments are sorted longest first (ties by index) and appended to the
    current batch while ``batch_size * longest <= token_budget``.
    """
    lengths = [int(x) for x in (segs.lengths if isinstance(segs, SegmentList) else segs)]
    if not lengths:
        raise ValueError("cannot batch an empty segment list")
    order = sorted(range(len(lengths)), key=lambda i: (-lengths[i], i))
    for i in order:
        if lengths[i] > token_budget:
            raise ValueError(f"segment {i} has {lengths[i]} frames, over the token budget of {token_budget}")
    batches, current = [], []
    for i in order:
        longest = lengths[current[0]] if current else lengths[i]
        if current and (len(current) + 1) * longest > token_budget:
            batches.append(tuple(current))
            current = []
        current.append(i)
    batches.append(tuple(current))
    padded = tuple(len(b) * lengths[b[0]] for b in batches)
    real = tuple(sum(lengths[i] for i in b) for b in batches)
    cost = sum(cost_model.batch_cost(lengths[b[0]]) for b in batches)
    return BatchPlan(tuple(batches), token_budget, padded, real, cost)
