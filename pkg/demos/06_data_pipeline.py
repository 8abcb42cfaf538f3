"""PDB round trip, curation filters and interface cropping."""
import numpy as np

from protcogen.proteinio import CropSpec, crop_interface, curate, find_interface_pairs, parse_pdb, write_pdb
from protcogen.synthetic import random_complex

rng = np.random.default_rng(5)
c = random_complex((300, 260), rng, source_id="demo", source="pdb-multichain", cluster_id="c1", spacing=9.0)
text = write_pdb(c)
print(text.splitlines()[0])
back = parse_pdb(text, "demo")
print("chains", [ch.chain_id for ch in back.chains], "residues", back.num_residues)

pairs = find_interface_pairs(back)
print("interface residue pairs within 8 A:", len(pairs))
crop = crop_interface(back, CropSpec(max_residues=384), rng)
print("cropped to", crop.num_residues, "residues around pair", crop.metadata["crop_pair"])

short = random_complex((20, 40), rng, source_id="peptide", source="pdb-multichain", cluster_id="c2")
nocl = random_complex((40, 40), rng, source_id="orphan", source="pdb-multichain")
res = curate([c, short, nocl])
print("kept:", [x.source_id for x in res.kept])
print("dropped:", res.dropped)
