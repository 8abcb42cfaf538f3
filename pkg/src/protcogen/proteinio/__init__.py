from .complex import SOURCE_TAGS, Chain, Complex, build_chain, build_complex
from .curation import (
    CropSpec,
    CurationPolicy,
    CurationResult,
    crop_interface,
    curate,
    drop_reasons,
    find_interface_pairs,
)
from .pdb import parse_pdb, read_pdb, write_pdb, write_pdb_file

__all__ = [
    "SOURCE_TAGS",
    "Chain",
    "Complex",
    "CropSpec",
    "CurationPolicy",
    "CurationResult",
    "build_chain",
    "build_complex",
    "crop_interface",
    "curate",
    "drop_reasons",
    "find_interface_pairs",
    "parse_pdb",
    "read_pdb",
    "write_pdb",
    "write_pdb_file",
]
