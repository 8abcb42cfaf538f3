"""Fixed-column PDB reading and writing (ATOM records, first model only)."""
from __future__ import annotations

import numpy as np

from ..allatom import NAME3_TO_TOKEN, TorsionSet, dihedral, template
from ..errors import DegenerateGeometryError, EmptyComplexError, PDBParseError
from .complex import Chain, Complex, frames_from_atoms, residue_name


def _atom_fields(line, lineno):
    if len(line) < 54:
        raise PDBParseError("ATOM record shorter than 54 columns", lineno)
    try:
        return {
            "name": line[12:16].strip(),
            "altloc": line[16],
            "resname": line[17:20].strip(),
            "chain": line[21],
            "resseq": int(line[22:26]),
            "icode": line[26] if len(line) > 26 else " ",
            "xyz": np.array([float(line[30:38]), float(line[38:46]), float(line[46:54])]),
            "bfactor": float(line[60:66]) if len(line) >= 66 and line[60:66].strip() else 0.0,
            "element": line[76:78].strip() if len(line) >= 78 else "",
        }
    except ValueError as exc:
        raise PDBParseError(f"malformed ATOM record ({exc})", lineno) from None


def _is_hydrogen(f):
    el = f["element"].upper()
    if el:
        return el in ("H", "D")
    return f["name"].lstrip("0123456789").startswith(("H", "D"))


def _chis(atoms, token, warnings, label):
    t = template(int(token))
    angles, mask = np.zeros(4), np.zeros(4, dtype=bool)
    for k, quad in enumerate(t.chi_atoms):
        missing = [a for a in quad if a not in atoms]
        if missing:
            warnings.append(f"{label}: missing atom {missing[0]} for chi{k + 1}")
            continue
        try:
            angles[k] = dihedral(*(atoms[a] for a in quad))
            mask[k] = True
        except DegenerateGeometryError:
            warnings.append(f"{label}: degenerate geometry for chi{k + 1}")
    return angles, mask


def parse_pdb(text, source_id=""):
    """Parse PDB text into a Complex.

    Residues lacking any of N/CA/C are dropped and chains containing a
    non-standard residue name are dropped; each drop adds an entry to
    ``Complex.warnings``.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    order = []
    residues = {}  # chain -> {(resseq, icode): {"resname":, "atoms": {}, "b": }}
    for lineno, line in enumerate(text.splitlines(), start=1):
        rec = line[:6]
        if rec.startswith("ENDMDL"):
            break
        if rec != "ATOM  ":
            continue
        f = _atom_fields(line, lineno)
        if f["altloc"] not in (" ", "A") or _is_hydrogen(f):
            continue
        ch = f["chain"]
        if ch not in residues:
            residues[ch] = {}
            order.append(ch)
        key = (f["resseq"], f["icode"])
        res = residues[ch].setdefault(key, {"resname": f["resname"], "atoms": {}, "b": None})
        if res["resname"] != f["resname"]:
            raise PDBParseError(f"residue {key} changes name within chain {ch}", lineno)
        res["atoms"].setdefault(f["name"], f["xyz"])
        if f["name"] == "CA":
            res["b"] = f["bfactor"]

    warnings = []
    chains = []
    for ch in order:
        res_map = residues[ch]
        bad = sorted({r["resname"] for r in res_map.values() if r["resname"] not in NAME3_TO_TOKEN})
        if bad:
            warnings.append(f"chain {ch}: dropped, non-standard residues {','.join(bad)}")
            continue
        keys, seq, atoms, bfac = [], [], [], []
        for key, r in res_map.items():
            missing = [a for a in ("N", "CA", "C") if a not in r["atoms"]]
            if missing:
                warnings.append(f"chain {ch} residue {key[0]}{key[1].strip()}: dropped, missing {','.join(missing)}")
                continue
            keys.append(key)
            seq.append(NAME3_TO_TOKEN[r["resname"]])
            atoms.append(r["atoms"])
            bfac.append(r["b"] if r["b"] is not None else 0.0)
        if not seq:
            warnings.append(f"chain {ch}: dropped, no complete residues")
            continue
        try:
            frames = frames_from_atoms(atoms)
        except DegenerateGeometryError as exc:
            raise PDBParseError(f"chain {ch}: {exc}") from None
        angles = np.zeros((len(seq), 4))
        mask = np.zeros((len(seq), 4), dtype=bool)
        for i, (tok, at) in enumerate(zip(seq, atoms)):
            angles[i], mask[i] = _chis(at, tok, warnings, f"chain {ch} residue {keys[i][0]}{keys[i][1].strip()}")
        chains.append(Chain(ch, np.array(seq), frames, TorsionSet(angles, mask), atoms, keys, np.array(bfac)))
    if not chains:
        raise EmptyComplexError("no valid chains in PDB input")
    return Complex(chains, source_id=source_id, warnings=warnings)


def read_pdb(path, source_id=None):
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_pdb(data, source_id=source_id if source_id is not None else str(path))


def _format_name(name, element):
    if len(name) >= 4 or len(element) == 2:
        return f"{name:<4s}"
    return f" {name:<3s}"


def write_pdb(c: Complex):
    """Serialise a Complex as ATOM/TER/END records with 3-decimal coordinates."""
    lines = []
    serial = 1
    for chain in c.chains:
        last = None
        for i, tok in enumerate(chain.seq):
            resname = residue_name(tok)
            resseq, icode = chain.res_ids[i]
            b = float(chain.bfactors[i])
            for name, xyz in chain.atoms[i].items():
                element = name[0]
                x, y, z = (float(v) for v in xyz)
                lines.append(
                    f"ATOM  {serial % 100000:5d} {_format_name(name, element)} {resname:>3s} "
                    f"{chain.chain_id}{resseq:4d}{icode}   {x:8.3f}{y:8.3f}{z:8.3f}"
                    f"{1.0:6.2f}{b:6.2f}          {element:>2s}"
                )
                serial += 1
            last = (resname, resseq, icode)
        if last is not None:
            lines.append(f"TER   {serial % 100000:5d}      {last[0]:>3s} {chain.chain_id}{last[1]:4d}{last[2]}")
            serial += 1
    lines.append("END")
    return "\n".join(lines) + "\n"


def write_pdb_file(c, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(write_pdb(c))
