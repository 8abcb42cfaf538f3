"""Residue chemistry, backbone frames, chi torsions and sidechain building.

Geometry comes from the bundled ``data/residue_templates.txt`` table, which
stores every heavy atom as internal coordinates (bond, angle, dihedral)
relative to three earlier atoms.  Building a residue walks that table in
order, so each chi rotates exactly the atoms downstream of its bond.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DegenerateGeometryError, InvalidArgumentError, MissingAtomError
from .geom3 import RigidTransform
from .seqflow import AMINO_ACIDS

TWO_PI = 2.0 * np.pi
BACKBONE_ATOMS = ("N", "CA", "C")


@dataclass(frozen=True)
class AtomSpec:
    name: str
    refs: tuple[str, str, str]
    bond: float
    angle: float  # radians
    chi: int | None  # 0-based chi index driving the dihedral, or None
    offset: float  # radians; the dihedral is chi + offset, or offset alone
    group: int  # 0 = backbone group, k = chi k (1-based)


@dataclass(frozen=True)
class ResidueTemplate:
    name3: str
    aa: str
    chi_atoms: tuple[tuple[str, str, str, str], ...]
    chi_pi_periodic: tuple[bool, ...]
    atoms: tuple[AtomSpec, ...]
    backbone: dict = field(repr=False)

    @property
    def chi_count(self):
        return len(self.chi_atoms)

    @property
    def atom_names(self):
        return tuple(BACKBONE_ATOMS) + tuple(a.name for a in self.atoms)

    def bond_lengths(self):
        """Parent bond length of every placed atom, keyed by (parent, atom)."""
        return {(a.refs[2], a.name): a.bond for a in self.atoms}

    def group_of(self, atom):
        if atom in BACKBONE_ATOMS:
            return 0
        for a in self.atoms:
            if a.name == atom:
                return a.group
        raise KeyError(atom)

    def ideal_positions(self):
        """Atom positions per rigid group with all chis at zero."""
        coords = build_sidechain(self.aa, RigidTransform.identity(), np.zeros(self.chi_count))
        groups = {}
        for name, xyz in coords.items():
            groups.setdefault(self.group_of(name), {})[name] = xyz
        return groups


def element_of(atom_name):
    return atom_name[0]


def _parse_torsion(text):
    text = text.strip()
    if text.startswith("chi"):
        k = int(text[3])
        rest = text[4:]
        return k - 1, np.radians(float(rest)) if rest else 0.0
    return None, np.radians(float(text))


def load_templates(text=None):
    if text is None:
        text = resources.files("protcogen").joinpath("data/residue_templates.txt").read_text()
    backbone = {}
    common = []
    templates = {}
    cur = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind == "backbone":
            backbone[tok[1]] = np.array([float(x) for x in tok[2:5]])
        elif kind == "common":
            common.append(tok[1:])
        elif kind == "residue":
            cur = {"name3": tok[1], "aa": tok[2], "chis": [], "pi": [], "atoms": []}
        elif kind == "chi":
            if int(tok[1]) != len(cur["chis"]) + 1:
                raise InvalidArgumentError(f"chi records out of order in {cur['name3']}")
            cur["chis"].append(tuple(tok[2:6]))
            cur["pi"].append(len(tok) > 6 and tok[6] == "pi-periodic")
        elif kind == "atom":
            cur["atoms"].append(tok[1:])
        elif kind == "end":
            rows = [c for c in common if not (cur["aa"] == "G" and c[0] == "CB")]
            specs = []
            groups = {n: 0 for n in backbone}
            for name, r1, r2, r3, bond, ang, tors in rows + cur["atoms"]:
                chi, off = _parse_torsion(tors)
                if r3 not in groups:
                    raise InvalidArgumentError(f"{cur['name3']}: atom {name} references unplaced atom {r3}")
                group = chi + 1 if chi is not None else groups[r3]
                groups[name] = group
                specs.append(AtomSpec(name, (r1, r2, r3), float(bond), np.radians(float(ang)), chi, off, group))
            tmpl = ResidueTemplate(
                cur["name3"], cur["aa"], tuple(cur["chis"]), tuple(cur["pi"]), tuple(specs), backbone
            )
            _validate(tmpl)
            templates[tmpl.aa] = tmpl
            cur = None
        else:
            raise InvalidArgumentError(f"unknown template record {kind!r}")
    return templates


def _validate(t):
    names = set(t.atom_names)
    for k, quad in enumerate(t.chi_atoms):
        missing = [a for a in quad if a not in names]
        if missing:
            raise InvalidArgumentError(f"{t.name3} chi{k + 1} references unknown atoms {missing}")
        last = next(a for a in t.atoms if a.name == quad[3])
        if last.refs != quad[:3] or last.chi != k or last.offset != 0.0:
            raise InvalidArgumentError(f"{t.name3} chi{k + 1} atom is not placed by its own dihedral")


TEMPLATES = load_templates()
TEMPLATES_BY_NAME3 = {t.name3: t for t in TEMPLATES.values()}
NAME3_TO_TOKEN = {t.name3: AMINO_ACIDS.index(t.aa) for t in TEMPLATES.values()}
TOKEN_TO_NAME3 = {v: k for k, v in NAME3_TO_TOKEN.items()}
CHI_COUNT = np.array([TEMPLATES[a].chi_count for a in AMINO_ACIDS])
CHI_PI_PERIODIC = np.zeros((20, 4), dtype=bool)
CHI_MASK = np.zeros((20, 4), dtype=bool)
for _i, _a in enumerate(AMINO_ACIDS):
    _t = TEMPLATES[_a]
    CHI_MASK[_i, : _t.chi_count] = True
    CHI_PI_PERIODIC[_i, : _t.chi_count] = _t.chi_pi_periodic


def template(aa):
    """Look up a template by one-letter code, three-letter code or token."""
    if isinstance(aa, (int, np.integer)):
        return TEMPLATES[AMINO_ACIDS[aa]]
    if len(aa) == 1:
        return TEMPLATES[aa.upper()]
    return TEMPLATES_BY_NAME3[aa.upper()]


@dataclass
class TorsionSet:
    """Per-residue chi angles in [0, 2pi) with a validity mask."""

    angles: np.ndarray  # (N, 4)
    mask: np.ndarray  # (N, 4) bool

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.angles.shape != self.mask.shape or self.angles.shape[-1] != 4:
            raise InvalidArgumentError("torsion angles and mask must both be (N, 4)")
        self.angles = np.where(self.mask, self.angles, 0.0)

    @classmethod
    def empty(cls, n):
        return cls(np.zeros((n, 4)), np.zeros((n, 4), dtype=bool))

    def __len__(self):
        return len(self.angles)

    def __getitem__(self, idx):
        return TorsionSet(self.angles[idx], self.mask[idx])


@dataclass(frozen=True)
class AtomRecord:
    name: str
    element: str
    coord: np.ndarray
    res_index: int
    chain_id: str


def frames_from_backbone(n, ca, c, eps=1e-8):
    """Frame with origin at CA, x toward C and N in the xy-plane.

    Works on single residues or stacked ``(..., 3)`` arrays.
    """
    n, ca, c = (np.asarray(p, dtype=float) for p in (n, ca, c))
    v1 = c - ca
    v2 = n - ca
    n1 = np.linalg.norm(v1, axis=-1, keepdims=True)
    if np.any(n1 < eps):
        raise DegenerateGeometryError("C coincides with CA")
    e1 = v1 / n1
    u2 = v2 - np.sum(e1 * v2, axis=-1, keepdims=True) * e1
    n2 = np.linalg.norm(u2, axis=-1, keepdims=True)
    if np.any(n2 < eps * np.maximum(1.0, np.linalg.norm(v2, axis=-1, keepdims=True))):
        raise DegenerateGeometryError("N, CA and C are collinear")
    e2 = u2 / n2
    e3 = np.cross(e1, e2)
    return RigidTransform(np.stack([e1, e2, e3], axis=-1), ca)


def dihedral(p1, p2, p3, p4, eps=1e-10):
    """Signed dihedral about the p2-p3 bond, wrapped to [0, 2pi)."""
    p1, p2, p3, p4 = (np.asarray(p, dtype=float) for p in (p1, p2, p3, p4))
    b1 = p2 - p1
    b2 = p3 - p2
    b3 = p4 - p3
    nb2 = np.linalg.norm(b2, axis=-1, keepdims=True)
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    if (
        np.any(nb2 < eps)
        or np.any(np.linalg.norm(n1, axis=-1) < eps)
        or np.any(np.linalg.norm(n2, axis=-1) < eps)
    ):
        raise DegenerateGeometryError("dihedral undefined for collinear or coincident points")
    m1 = np.cross(n1, b2 / nb2)
    x = np.sum(n1 * n2, axis=-1)
    y = np.sum(m1 * n2, axis=-1)
    return np.mod(np.arctan2(y, x), TWO_PI)


def place_atom(a, b, c, bond, angle, torsion):
    """Position d with |cd| = bond, angle(b, c, d) = angle, dihedral(a, b, c, d) = torsion.

    Broadcasts over leading dimensions of the points and of ``torsion``.
    """
    torsion = np.asarray(torsion, dtype=float)[..., None]
    bc = c - b
    bc = bc / np.linalg.norm(bc, axis=-1, keepdims=True)
    n = np.cross(b - a, bc)
    n = n / np.linalg.norm(n, axis=-1, keepdims=True)
    m = np.cross(n, bc)
    return c + bond * (
        -np.cos(angle) * bc + np.sin(angle) * np.cos(torsion) * m - np.sin(angle) * np.sin(torsion) * n
    )


def _chi_values(t, chi):
    chi = np.asarray(chi, dtype=float).ravel()
    if len(chi) == t.chi_count:
        vals = chi
    elif len(chi) == 4:
        vals = chi[: t.chi_count]
    else:
        raise InvalidArgumentError(
            f"{t.name3} takes {t.chi_count} chi angles, got {len(chi)}"
        )
    if not np.all(np.isfinite(vals)):
        raise InvalidArgumentError(f"{t.name3}: chi angles must be finite")
    return vals


def build_sidechain(aa, frame: RigidTransform, chi):
    """All heavy atoms of one residue, as an ordered ``{name: xyz}`` dict.

    ``chi`` may hold exactly the residue's chi angles or a 4-vector whose
    trailing entries are ignored.
    """
    t = template(aa)
    vals = _chi_values(t, chi)
    local = {name: xyz.copy() for name, xyz in t.backbone.items()}
    for spec in t.atoms:
        tors = spec.offset if spec.chi is None else vals[spec.chi] + spec.offset
        r1, r2, r3 = (local[r] for r in spec.refs)
        local[spec.name] = place_atom(r1, r2, r3, spec.bond, spec.angle, tors)
    names = list(local)
    xyz = np.stack([local[k] for k in names]) @ frame.rot.T + frame.trans
    return dict(zip(names, xyz))


def build_residues(seq, frames: RigidTransform, angles):
    """Vectorised :func:`build_sidechain` over a whole chain.

    ``angles`` is ``(N, 4)``; entries beyond each residue's chi count are
    ignored.  Returns a list of ``{name: xyz}`` dicts in residue order.
    """
    seq = np.asarray(seq, dtype=np.int64)
    angles = np.asarray(angles, dtype=float).reshape(len(seq), 4)
    if not np.all(np.isfinite(angles[CHI_MASK[seq]])):
        raise InvalidArgumentError("chi angles must be finite")
    out = [None] * len(seq)
    for tok in np.unique(seq):
        idx = np.nonzero(seq == tok)[0]
        t = template(int(tok))
        local = {name: np.broadcast_to(xyz, (len(idx), 3)) for name, xyz in t.backbone.items()}
        for spec in t.atoms:
            tors = spec.offset if spec.chi is None else angles[idx, spec.chi] + spec.offset
            r1, r2, r3 = (local[r] for r in spec.refs)
            local[spec.name] = place_atom(r1, r2, r3, spec.bond, spec.angle, np.broadcast_to(tors, (len(idx),)))
        names = list(local)
        stacked = np.stack([local[k] for k in names], axis=1)  # (m, atoms, 3)
        world = np.einsum("mij,maj->mai", frames.rot[idx], stacked) + frames.trans[idx][:, None]
        for row, i in enumerate(idx):
            out[i] = dict(zip(names, world[row]))
    return out


def extract_torsions(atoms, aa):
    """Chi angles of one residue from an atom-name -> coordinate mapping.

    Returns ``(angles, mask)`` as length-4 arrays; undefined chis are masked.
    """
    t = template(aa)
    angles = np.zeros(4)
    mask = np.zeros(4, dtype=bool)
    for k, quad in enumerate(t.chi_atoms):
        for name in quad:
            if name not in atoms:
                raise MissingAtomError(name, t.name3)
        angles[k] = dihedral(*(atoms[name] for name in quad))
        mask[k] = True
    return angles, mask


def canonicalize_chi(aa, chi):
    """Map pi-periodic chis into [0, pi); other chis are only wrapped to [0, 2pi)."""
    t = template(aa)
    chi = np.mod(np.asarray(chi, dtype=float), TWO_PI)
    out = chi.copy()
    for k, periodic in enumerate(t.chi_pi_periodic):
        if periodic and k < len(out):
            out[k] = np.mod(chi[k], np.pi)
    return out


def chi_group_frames(aa, atoms):
    """Backbone frame plus one frame per chi group.

    The chi-k frame sits on the third atom of the chi-k quadruple with x along
    the rotating bond, the layout used by eight-frame all-atom FAPE variants.
    """
    t = template(aa)
    frames = [frames_from_backbone(atoms["N"], atoms["CA"], atoms["C"])]
    for a1, a2, a3, _ in t.chi_atoms:
        p1, p2, p3 = atoms[a1], atoms[a2], atoms[a3]
        # x from a2 to a3, y toward a1 (frames_from_backbone takes n, ca, c).
        f = frames_from_backbone(p1, p3, 2 * p3 - p2)
        frames.append(f)
    rot = np.stack([f.rot for f in frames])
    trans = np.stack([f.trans for f in frames])
    return RigidTransform(rot, trans)


def residue_atom_records(atoms, res_index, chain_id):
    return [AtomRecord(n, element_of(n), np.asarray(x), res_index, chain_id) for n, x in atoms.items()]
