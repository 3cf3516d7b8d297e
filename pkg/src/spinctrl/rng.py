"""Reproducible Rademacher walk increments on counter-based Philox streams.

Every consumer of randomness names a stream by a small integer context
tuple; the stream key is SeedSequence(master_seed, spawn_key=context).
Within a stream, antithetic pair p owns an aligned span of whole 256-bit
Philox blocks, and the sign of the increment for (step j, component c) is
bit j*dims + c of that span (little-endian bit order, fixed explicitly).

The increment of Monte-Carlo sample k is therefore a pure function of
(master_seed, context, k, j, c): sample 2p reads pair span p directly and
sample 2p+1 is its entrywise negation.  Workers can slice or regenerate any
sub-range without touching the rest, so results do not depend on scheduling
or worker count.  Entries are +/- sqrt(tau), matching the required first
and second moments of the time-discrete noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox, SeedSequence

# stream namespaces (first context entry)
NS_OUTER = 1       # the single controlled/outer trajectory of a run
NS_ESTIMATOR = 2   # inner Feynman-Kac walk sets
NS_AUX = 3         # everything else (diagnostics, benchmarks)

_WORDS_PER_BLOCK = 4   # Philox-4x64 emits 4 words per counter increment
_BITS_PER_BLOCK = 64 * _WORDS_PER_BLOCK


@dataclass
class WalkIncrements:
    """One realised discrete walk: xi[j, c] in {-sqrt(tau), +sqrt(tau)}."""

    xi: np.ndarray
    tau: float

    @property
    def steps(self) -> int:
        return self.xi.shape[0]


def antithetic(walk: WalkIncrements) -> WalkIncrements:
    """Antithetic partner: entrywise negation (an involution)."""
    return WalkIncrements(-walk.xi, walk.tau)


def _blocks_per_pair(steps: int, dims: int) -> int:
    return -(-(steps * dims) // _BITS_PER_BLOCK)


def _bits_to_signs(words: np.ndarray, n_pairs: int, steps: int, dims: int) -> np.ndarray:
    """Unpack raw 64-bit words into per-pair sign arrays in {-1, +1}."""
    words = np.ascontiguousarray(words, dtype="<u8").reshape(n_pairs, -1)
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    bits = bits[:, : steps * dims].reshape(n_pairs, steps, dims)
    return 2.0 * bits - 1.0


@dataclass(frozen=True)
class SeedPolicy:
    """Derives every stream of a run from one master seed."""

    master_seed: int

    def _philox(self, context: tuple) -> Philox:
        if any(int(c) < 0 for c in context):
            raise ValueError("stream context entries must be nonnegative")
        return Philox(SeedSequence(self.master_seed, spawn_key=tuple(int(c) for c in context)))

    def walk_pairs(self, context: tuple, n_pairs: int, steps: int, dims: int, tau: float) -> np.ndarray:
        """Base walks for n_pairs antithetic pairs, shape (n_pairs, steps, dims).

        Pair p of this context always receives the same entries no matter
        how many pairs are requested; sample 2p uses +row p, sample 2p+1
        uses -row p.
        """
        if tau <= 0:
            raise ValueError("tau must be positive")
        if n_pairs < 1:
            raise ValueError("need at least one pair")
        blocks = _blocks_per_pair(steps, dims)
        raw = self._philox(context).random_raw(n_pairs * blocks * _WORDS_PER_BLOCK)
        return math.sqrt(tau) * _bits_to_signs(raw, n_pairs, steps, dims)

    def sample_walk(self, context: tuple, k: int, steps: int, dims: int, tau: float) -> WalkIncrements:
        """Walk of Monte-Carlo sample k, seeking directly to its pair span."""
        if k < 0:
            raise ValueError("sample index must be nonnegative")
        if tau <= 0:
            raise ValueError("tau must be positive")
        pair, odd = divmod(k, 2)
        blocks = _blocks_per_pair(steps, dims)
        gen = self._philox(context)
        if pair:
            gen.advance(pair * blocks)  # advance() moves whole 256-bit blocks
        raw = gen.random_raw(blocks * _WORDS_PER_BLOCK)
        signs = _bits_to_signs(raw, 1, steps, dims)[0]
        if odd:
            signs = -signs
        return WalkIncrements(math.sqrt(tau) * signs, tau)

    def outer_walk(self, steps: int, dims: int, tau: float, run_id: int = 0) -> WalkIncrements:
        """The walk driving the single controlled trajectory of a run."""
        return self.sample_walk((NS_OUTER, run_id), 0, steps, dims, tau)


def signed_batch(base_pairs: np.ndarray) -> np.ndarray:
    """Interleave antithetic pairs into a full sample batch.

    (P, steps, dims) base walks -> (2P, steps, dims) with row 2p = +pair p
    and row 2p+1 = -pair p, the estimator's canonical sample order.
    """
    n_pairs, steps, dims = base_pairs.shape
    out = np.empty((2 * n_pairs, steps, dims))
    out[0::2] = base_pairs
    out[1::2] = -base_pairs
    return out
