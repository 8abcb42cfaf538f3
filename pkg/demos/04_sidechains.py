"""Sidechains from chi torsions and back.

build_sidechain places heavy atoms from a backbone frame and up to four chi
angles; extract_torsions measures them again from coordinates.
"""
import numpy as np

from protcogen.allatom import build_sidechain, canonicalize_chi, extract_torsions, template
from protcogen.geom3 import random_transform

rng = np.random.default_rng(3)
frame = random_transform(rng)

for aa in ("S", "F", "K", "R", "D"):
    t = template(aa)
    chi = rng.uniform(0, 2 * np.pi, t.chi_count)
    atoms = build_sidechain(aa, frame, chi)
    measured, mask = extract_torsions(atoms, aa)
    print(f"{aa}: {len(t.atom_names)} atoms, chis in  {np.round(canonicalize_chi(aa, chi), 4)}")
    print(f"   chis out {np.round(canonicalize_chi(aa, measured[: t.chi_count]), 4)}")

# Phenylalanine's ring is symmetric: chi2 and chi2 + pi give the same atoms.
a = build_sidechain("F", frame, [1.0, 0.5])
b = build_sidechain("F", frame, [1.0, 0.5 + np.pi])
pa, pb = np.array(list(a.values())), np.array(list(b.values()))
d = np.linalg.norm(pa[:, None] - pb[None], axis=-1).min(axis=1).max()
print("PHE ring flip moves no atom off the atom set; max gap", f"{d:.1e}")
