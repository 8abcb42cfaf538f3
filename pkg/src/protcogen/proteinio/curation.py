"""Dataset filters and interface-centred cropping for multi-chain training data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InvalidArgumentError, NoInterfaceError
from .complex import SOURCE_TAGS, Complex


@dataclass(frozen=True)
class CurationPolicy:
    min_chain_len: int = 30
    max_total_len: int = 2048
    swissprot_plddt: float = 85.0
    afdb_plddt: float = 95.0
    require_cluster_id: bool = True
    excluded_ids: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if min(self.min_chain_len, self.max_total_len, self.swissprot_plddt, self.afdb_plddt) <= 0:
            raise InvalidArgumentError("curation thresholds must be positive")
        object.__setattr__(self, "excluded_ids", frozenset(self.excluded_ids))


@dataclass(frozen=True)
class CropSpec:
    max_residues: int = 384
    cutoff: float = 8.0

    def __post_init__(self):
        if self.max_residues < 1 or not self.cutoff > 0:
            raise InvalidArgumentError("crop budget must be >= 1 and cutoff > 0")


def drop_reasons(c: Complex, policy: CurationPolicy):
    """Every rule ``c`` violates, as a list of rule labels (empty if kept)."""
    if c.source not in SOURCE_TAGS:
        raise InvalidArgumentError(f"unknown source tag {c.source!r}")
    reasons = []
    if c.source_id in policy.excluded_ids:
        reasons.append("excluded-id")
    if c.source == "pdb-multichain" and min(c.lengths) < policy.min_chain_len:
        reasons.append("peptide-chain")
    if c.num_residues > policy.max_total_len:
        reasons.append("too-long")
    if policy.require_cluster_id and c.source == "pdb-multichain" and not c.cluster_id:
        reasons.append("missing-cluster-id")
    for tag, threshold in (("swissprot", policy.swissprot_plddt), ("afdb", policy.afdb_plddt)):
        if c.source == tag:
            mean = c.mean_plddt()
            if mean is None:
                reasons.append("missing-plddt")
            elif not mean > threshold:
                reasons.append(f"{tag}-plddt")
    return reasons


@dataclass
class CurationResult:
    kept: list
    dropped: dict  # source_id -> list of rule labels

    def records(self, items):
        """Report rows ``(item id, verdict, reason)`` in input order."""
        rows = []
        for c in items:
            reasons = self.dropped.get(c.source_id)
            rows.append((c.source_id, "drop" if reasons else "keep", ",".join(reasons or [])))
        return rows


def curate(items, policy=CurationPolicy()):
    kept, dropped = [], {}
    for c in items:
        reasons = drop_reasons(c, policy)
        if reasons:
            dropped[c.source_id] = reasons
        else:
            kept.append(c)
    return CurationResult(kept, dropped)


def _residue_keys(c: Complex):
    return [(k, i) for k, ch in enumerate(c.chains) for i in range(len(ch))]


def find_interface_pairs(c: Complex, cutoff=8.0):
    """Inter-chain residue pairs with representative atoms within ``cutoff``.

    Each pair is ``((chain_a, res_a), (chain_b, res_b))`` with chain_a < chain_b;
    the list is sorted.
    """
    if c.num_chains < 2:
        raise InvalidArgumentError("interface search needs at least two chains")
    xyz = c.representative_coords()
    chain_of = c.chain_index()
    keys = _residue_keys(c)
    tree = cKDTree(xyz)
    pairs = tree.query_pairs(cutoff, output_type="ndarray")
    out = []
    for i, j in pairs:
        if chain_of[i] != chain_of[j]:
            a, b = sorted((keys[i], keys[j]))
            out.append((a, b))
    return sorted(out)


def crop_interface(c: Complex, spec=CropSpec(), rng=None):
    """Keep the ``max_residues`` residues nearest a random interface pair.

    Distances are CA distances to the midpoint of the pair's CAs, ties go to
    the lower global index, and both pair residues are always kept.  The
    pre-crop sequences are stored under ``metadata["parent_sequences"]``.
    """
    if c.num_residues <= spec.max_residues:
        return c
    rng = np.random.default_rng() if rng is None else rng
    pairs = find_interface_pairs(c, spec.cutoff) if c.num_chains > 1 else []
    if not pairs:
        raise NoInterfaceError("no inter-chain residue pair within the interface cutoff")
    a, b = pairs[int(rng.integers(len(pairs)))]
    offsets = np.cumsum([0] + [len(ch) for ch in c.chains])
    ga, gb = offsets[a[0]] + a[1], offsets[b[0]] + b[1]
    ca = c.ca_coords()
    mid = 0.5 * (ca[ga] + ca[gb])
    dist = np.linalg.norm(ca - mid, axis=-1)
    dist[[ga, gb]] = -np.inf
    order = np.lexsort((np.arange(len(dist)), dist))
    out = c.subset(np.sort(order[: spec.max_residues]))
    out.metadata.setdefault("parent_sequences", {ch.chain_id: ch.sequence for ch in c.chains})
    out.metadata["crop_pair"] = (a, b)
    return out
