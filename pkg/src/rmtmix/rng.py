"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by
(seed, stream id), where the stream id packs a purpose tag, a realization
index and an ensemble-member index.  Any (purpose, realization, member)
triple therefore maps to the same substream no matter how work is chunked
across processes, which is what makes runs bit-reproducible for any worker
count.  Normal variates use numpy's ziggurat implementation
(``Generator.standard_normal``), so streams are stable within a numpy
major version line.
"""

from __future__ import annotations

import numpy as np

PURPOSE_HAMILTONIAN = 0
PURPOSE_ANTISYMMETRIC = 1
PURPOSE_DISORDER = 2
PURPOSE_STATE = 3
PURPOSE_GENERIC = 4

_REALIZATION_BITS = 28
_MEMBER_BITS = 28


def stream_id(purpose: int, realization: int = 0, member: int = 0) -> int:
    """Pack (purpose, realization, member) into a 64-bit stream id."""
    if not 0 <= purpose < 2 ** 8:
        raise ValueError(f"purpose out of range: {purpose}")
    if not 0 <= realization < 2 ** _REALIZATION_BITS:
        raise ValueError(f"realization index out of range: {realization}")
    if not 0 <= member < 2 ** _MEMBER_BITS:
        raise ValueError(f"member index out of range: {member}")
    return (purpose << (_REALIZATION_BITS + _MEMBER_BITS)) | (realization << _MEMBER_BITS) | member


def stream(seed: int, purpose: int, realization: int = 0, member: int = 0) -> np.random.Generator:
    """Independent generator for one (purpose, realization, member) triple."""
    sid = stream_id(purpose, realization, member)
    key = np.array([seed % 2 ** 64, sid], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
