"""Antenna selection: optimal joint selection, majority vote, user ordering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of both hops' squared channel gains.

    first_hop:  (n_s, n_rr) matrix of BS-to-relay squared gains.
    second_hop: (k, n_rt, n_u) array, one matrix per user.
    Phases are irrelevant to every computed quantity, so only squared
    magnitudes are stored.
    """

    first_hop: np.ndarray
    second_hop: np.ndarray

    def __post_init__(self):
        fh = np.asarray(self.first_hop, dtype=float)
        sh = np.asarray(self.second_hop, dtype=float)
        if fh.ndim != 2 or fh.size == 0:
            raise ValueError("first_hop must be a nonempty 2-D matrix")
        if sh.ndim != 3 or sh.size == 0:
            raise ValueError("second_hop must be a nonempty (users, n_rt, n_u) array")
        if np.any(fh < 0) or np.any(sh < 0):
            raise ValueError("squared gains must be nonnegative")
        object.__setattr__(self, "first_hop", fh)
        object.__setattr__(self, "second_hop", sh)


@dataclass(frozen=True)
class SelectionOutcome:
    first_hop_pair: tuple          # (i_s, j_r)
    user_pairs: tuple              # per-user (i_ru, j_u) optimal pairs
    majority_antenna: int          # shared relay transmit antenna
    g_sr: float                    # effective first-hop gain
    g_ru: tuple                    # per raw user, gain on the majority antenna
    ordering: tuple                # raw user index for NOMA rank 1..K (ascending gain)

    @property
    def ranked_gains(self) -> tuple:
        return tuple(self.g_ru[u] for u in self.ordering)


def jtras_opt(matrix) -> tuple:
    """Best (row, col) antenna pair and its gain; ties break to the lowest index."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("gain matrix must be nonempty and 2-D")
    flat = int(np.argmax(m))
    i, j = divmod(flat, m.shape[1])
    return i, j, float(m[i, j])


def jtras_maj(second_hop) -> tuple:
    """Majority-vote transmit antenna selection on the second hop.

    Each user votes for the transmit row of its own optimal pair; the row
    with the most votes serves everyone; each user then uses its best
    receive antenna on that shared row.  Returns
    (majority_row, per-user best column, per-user gains).
    Vote ties (unreachable for 3 users over 2 rows) break to the antenna
    with the largest sum of its voters' optimal gains, then lowest index.
    """
    h = np.asarray(second_hop, dtype=float)
    if h.ndim != 3 or h.size == 0:
        raise ValueError("second hop must be a nonempty (users, n_rt, n_u) array")
    k, n_rt, _ = h.shape
    votes = np.empty(k, dtype=int)
    opt_gains = np.empty(k)
    for u in range(k):
        i, _, g = jtras_opt(h[u])
        votes[u] = i
        opt_gains[u] = g
    counts = np.bincount(votes, minlength=n_rt)
    best = counts.max()
    candidates = np.flatnonzero(counts == best)
    if len(candidates) == 1:
        i_r = int(candidates[0])
    else:
        weight = np.bincount(votes, weights=opt_gains, minlength=n_rt)
        i_r = int(candidates[np.argmax(weight[candidates])])
    cols = h[:, i_r, :].argmax(axis=1)
    gains = h[np.arange(k), i_r, cols]
    return i_r, tuple(int(c) for c in cols), tuple(float(g) for g in gains)


def order_users(g_ru) -> tuple:
    """Raw user indices sorted by gain ascending (rank 1 = weakest); stable on ties."""
    g = np.asarray(g_ru, dtype=float)
    return tuple(int(i) for i in np.argsort(g, kind="stable"))


def select(realization: ChannelRealization) -> SelectionOutcome:
    """Run both hops' selection and the NOMA user ordering."""
    i_s, j_r, g_sr = jtras_opt(realization.first_hop)
    pairs = tuple(jtras_opt(realization.second_hop[u])[:2]
                  for u in range(realization.second_hop.shape[0]))
    i_r, _, g_ru = jtras_maj(realization.second_hop)
    return SelectionOutcome(
        first_hop_pair=(i_s, j_r),
        user_pairs=pairs,
        majority_antenna=i_r,
        g_sr=g_sr,
        g_ru=g_ru,
        ordering=order_users(g_ru),
    )
