"""Multi-chain protein container."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..allatom import (
    CHI_MASK,
    TOKEN_TO_NAME3,
    TorsionSet,
    build_residues,
    frames_from_backbone,
)
from ..errors import InvalidArgumentError
from ..geom3 import RigidTransform
from ..seqflow import MASK, decode

SOURCE_TAGS = ("pdb-multichain", "swissprot", "afdb", "pdb-singlechain")


@dataclass
class Chain:
    chain_id: str
    seq: np.ndarray
    frames: RigidTransform
    torsions: TorsionSet
    atoms: list = field(default_factory=list)  # per residue {atom name: xyz}
    res_ids: list = field(default_factory=list)  # per residue (resSeq, iCode)
    bfactors: np.ndarray | None = None

    def __post_init__(self):
        self.seq = np.asarray(self.seq, dtype=np.int64)
        n = len(self.seq)
        if len(self.frames) != n or len(self.torsions) != n:
            raise InvalidArgumentError(
                f"chain {self.chain_id}: sequence/frames/torsions lengths differ "
                f"({n}, {len(self.frames)}, {len(self.torsions)})"
            )
        if self.atoms and len(self.atoms) != n:
            raise InvalidArgumentError(f"chain {self.chain_id}: atom list length differs")
        if not self.res_ids:
            self.res_ids = [(i + 1, " ") for i in range(n)]
        if self.bfactors is None:
            self.bfactors = np.zeros(n)

    def __len__(self):
        return len(self.seq)

    @property
    def sequence(self):
        return decode(self.seq)

    def ca_coords(self):
        return self.frames.trans.copy()

    def representative_coords(self):
        """CB where present, CA otherwise (glycine or missing CB)."""
        out = self.frames.trans.copy()
        for i, res in enumerate(self.atoms):
            if "CB" in res:
                out[i] = res["CB"]
        return out

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return Chain(
            self.chain_id,
            self.seq[idx],
            self.frames[idx],
            self.torsions[idx],
            [self.atoms[i] for i in idx] if self.atoms else [],
            [self.res_ids[i] for i in idx],
            self.bfactors[idx],
        )


@dataclass
class Complex:
    chains: list
    source_id: str = ""
    source: str | None = None
    plddt: np.ndarray | None = None
    cluster_id: str | None = None
    warnings: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.chains:
            raise InvalidArgumentError("a complex needs at least one chain")
        if self.source is not None and self.source not in SOURCE_TAGS:
            raise InvalidArgumentError(f"unknown source tag {self.source!r}")

    @property
    def num_chains(self):
        return len(self.chains)

    @property
    def num_residues(self):
        return sum(len(c) for c in self.chains)

    @property
    def lengths(self):
        return tuple(len(c) for c in self.chains)

    @property
    def seq(self):
        return np.concatenate([c.seq for c in self.chains])

    @property
    def frames(self):
        return RigidTransform(
            np.concatenate([c.frames.rot for c in self.chains]),
            np.concatenate([c.frames.trans for c in self.chains]),
        )

    @property
    def torsions(self):
        return TorsionSet(
            np.concatenate([c.torsions.angles for c in self.chains]),
            np.concatenate([c.torsions.mask for c in self.chains]),
        )

    def chain_index(self):
        """Chain number of every residue, in global residue order."""
        return np.concatenate([np.full(len(c), k) for k, c in enumerate(self.chains)])

    def ca_coords(self):
        return self.frames.trans

    def representative_coords(self):
        return np.concatenate([c.representative_coords() for c in self.chains])

    def mean_plddt(self):
        return None if self.plddt is None else float(np.mean(self.plddt))

    def subset(self, global_idx):
        """Keep the given global residue indices; empty chains disappear."""
        keep = np.zeros(self.num_residues, dtype=bool)
        keep[np.asarray(global_idx, dtype=int)] = True
        chains, start = [], 0
        for c in self.chains:
            local = np.nonzero(keep[start : start + len(c)])[0]
            if len(local):
                chains.append(c.subset(local))
            start += len(c)
        plddt = None if self.plddt is None else self.plddt[keep]
        return replace(self, chains=chains, plddt=plddt, warnings=list(self.warnings),
                       metadata=dict(self.metadata))

    def transformed(self, T: RigidTransform):
        """Copy with every frame and atom moved by the rigid motion ``T``."""
        chains = []
        for c in self.chains:
            frames = T.compose(RigidTransform(c.frames.rot, c.frames.trans))
            atoms = [{k: T.apply(v) for k, v in res.items()} for res in c.atoms]
            chains.append(replace(c, frames=frames, atoms=atoms))
        return replace(self, chains=chains)

    def translated(self, offset):
        T = RigidTransform(np.eye(3), np.asarray(offset, dtype=float))
        return self.transformed(T)


def _chain_ids(k):
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
    if k > len(letters):
        raise InvalidArgumentError("too many chains for single-character chain ids")
    return list(letters[:k])


def build_chain(chain_id, seq, frames: RigidTransform, torsions: TorsionSet | None = None):
    """Chain with all heavy atoms rebuilt from sequence, frames and chis."""
    seq = np.asarray(seq, dtype=np.int64)
    if np.any(seq == MASK):
        raise InvalidArgumentError("cannot build atoms for MASK residues")
    if torsions is None:
        torsions = TorsionSet(np.zeros((len(seq), 4)), CHI_MASK[seq])
    atoms = build_residues(seq, frames, torsions.angles)
    mask = CHI_MASK[seq]
    torsions = TorsionSet(np.where(mask, np.mod(torsions.angles, 2 * np.pi), 0.0), mask)
    return Chain(chain_id, seq, frames.copy(), torsions, atoms)


def build_complex(seq, frames, torsions=None, lengths=None, chain_ids=None, **meta):
    """Assemble a Complex from flat per-residue arrays split by ``lengths``."""
    seq = np.asarray(seq, dtype=np.int64)
    lengths = (len(seq),) if lengths is None else tuple(int(x) for x in lengths)
    if sum(lengths) != len(seq):
        raise InvalidArgumentError("chain lengths do not sum to the residue count")
    chain_ids = chain_ids or _chain_ids(len(lengths))
    chains, start = [], 0
    for cid, n in zip(chain_ids, lengths):
        sl = slice(start, start + n)
        tors = None if torsions is None else torsions[sl]
        chains.append(build_chain(cid, seq[sl], frames[sl], tors))
        start += n
    return Complex(chains, **meta)


def residue_name(token):
    return TOKEN_TO_NAME3[int(token)]


def frames_from_atoms(atoms):
    n = np.stack([a["N"] for a in atoms])
    ca = np.stack([a["CA"] for a in atoms])
    c = np.stack([a["C"] for a in atoms])
    return frames_from_backbone(n, ca, c)
