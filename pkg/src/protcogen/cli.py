"""Command-line entry point: ``protcogen <subcommand> ...``.

Every subcommand prints a one-line JSON summary as the last line of stdout.
Exit codes: 0 success, 2 input or configuration error, 3 a domain
precondition was not met (for example no binding interface to crop around).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import losses as L
from .allatom import CHI_PI_PERIODIC, TorsionSet
from .config import ConfigError, load_config
from .errors import EmptyComplexError, InvalidArgumentError, NoInterfaceError, PDBParseError, ProtCogenError
from .flowmatch import interp_trans, sample_prior, vf_rot, vf_trans, interp_rot, Linear
from .metrics import aar, chi_histograms, kabsch_rmsd
from .proteinio import crop_interface, curate, find_interface_pairs, read_pdb, write_pdb
from .proteinio.complex import SOURCE_TAGS
from .sampler import (
    NullDenoiser,
    chain_by_chain,
    load_denoiser,
    make_ground_truth_oracle,
    run_sampling,
)
from .seqflow import decode, one_hot_logits

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3


class UsageError(Exception):
    pass


def _summary(command, status="ok", **fields):
    print(json.dumps({"command": command, "status": status, **fields}, sort_keys=True))


def _fail(command, code, message):
    print(f"error: {message}", file=sys.stderr)
    _summary(command, status="error", exit_code=code, message=message)
    return code


def _read(path, command):
    try:
        return read_pdb(path, source_id=Path(path).name)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except (PDBParseError, EmptyComplexError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _jsonl(records):
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def _read_manifest(directory):
    """Optional ``manifest.tsv``: file, source, cluster_id (``-`` for none)."""
    path = Path(directory) / "manifest.tsv"
    meta = {}
    if not path.exists():
        return meta
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if parts[0] == "file":
            continue
        if len(parts) < 2 or parts[1] not in SOURCE_TAGS:
            raise UsageError(f"{path}:{lineno}: expected 'file<TAB>source[<TAB>cluster_id]'")
        cluster = parts[2] if len(parts) > 2 and parts[2] not in ("", "-") else None
        meta[parts[0]] = (parts[1], cluster)
    return meta


def cmd_curate(args):
    cfg = load_config(args.config)
    directory = Path(args.input)
    if not directory.is_dir():
        raise UsageError(f"input directory {directory} is not readable")
    manifest = _read_manifest(directory)
    items = []
    for path in sorted(directory.glob("*.pdb")):
        c = _read(path, "curate")
        source, cluster = manifest.get(path.name, (None, None))
        c.source = source or ("pdb-multichain" if c.num_chains > 1 else "pdb-singlechain")
        c.cluster_id = cluster
        if c.source in ("swissprot", "afdb"):
            # Predicted-structure files carry per-residue pLDDT in the B-factor column.
            c.plddt = np.concatenate([ch.bfactors for ch in c.chains])
        items.append(c)
    result = curate(items, cfg.curation)
    records = [
        {"id": c.source_id, "verdict": "drop" if c.source_id in result.dropped else "keep",
         "reasons": result.dropped.get(c.source_id, [])}
        for c in items
    ]
    Path(args.report).write_text(_jsonl(records))
    _summary("curate", items=len(items), kept=len(result.kept), dropped=len(result.dropped),
             report=str(args.report))
    return EXIT_OK


def cmd_crop(args):
    cfg = load_config(args.config)
    c = _read(args.input, "crop")
    if c.num_chains < 2:
        return _fail("crop", EXIT_DOMAIN, "cropping needs a multi-chain complex")
    if not find_interface_pairs(c, cfg.crop.cutoff):
        return _fail("crop", EXIT_DOMAIN, "no inter-chain residue pair within the interface cutoff")
    rng = np.random.default_rng(args.seed)
    try:
        out = crop_interface(c, cfg.crop, rng)
    except NoInterfaceError as exc:
        return _fail("crop", EXIT_DOMAIN, str(exc))
    Path(args.output).write_text(write_pdb(out))
    pair = out.metadata.get("crop_pair")
    if pair is not None:
        pair = [[c.chains[k].chain_id, int(c.chains[k].res_ids[i][0])] for k, i in pair]
    _summary("crop", residues_before=c.num_residues, residues_after=out.num_residues,
             pair=pair, output=str(args.output))
    return EXIT_OK


def _backbone_coords(c):
    # Ideal N/CA/C implied by the frames, so the comparison is not limited by PDB rounding.
    return L.backbone_atoms(c.frames)


def cmd_sample(args):
    cfg = load_config(args.config)
    sampler_cfg = cfg.sampler
    target = None
    if args.oracle:
        target = _read(args.oracle, "sample")
        denoiser = make_ground_truth_oracle(target)
    elif args.denoiser:
        denoiser = load_denoiser(args.denoiser)
    else:
        denoiser = NullDenoiser()
    if args.lengths:
        try:
            lengths = tuple(int(x) for x in args.lengths.split(","))
        except ValueError:
            raise UsageError(f"bad --lengths {args.lengths!r}") from None
    elif target is not None:
        lengths = target.lengths
    else:
        raise UsageError("--lengths is required without --oracle")
    if target is not None and tuple(lengths) != target.lengths:
        raise UsageError(f"--lengths {lengths} do not match oracle target chains {target.lengths}")
    if min(lengths) < 1:
        raise UsageError("chain lengths must be positive")
    rng = np.random.default_rng(args.seed)
    if args.chain_by_chain:
        result = chain_by_chain(denoiser, lengths, sampler_cfg, rng)
    else:
        result = run_sampling(denoiser, lengths, sampler_cfg, rng)
    out = result.complex
    Path(args.output).write_text(write_pdb(out))
    log_path = Path(args.log) if args.log else Path(str(args.output) + ".traj.jsonl")
    log_path.write_text(_jsonl(result.trajectory))
    fields = {"chains": out.num_chains, "residues": out.num_residues, "sequence": decode(out.seq),
              "output": str(args.output), "log": str(log_path), "seed": args.seed}
    if target is not None:
        rmsd = kabsch_rmsd(_backbone_coords(out), _backbone_coords(target))
        recovery = aar(out.seq, target.seq)
        print(f"rmsd\t{rmsd:.3e}")
        print(f"aar\t{recovery:.6f}")
        fields.update(rmsd=rmsd, aar=recovery)
    _summary("sample", **fields)
    return EXIT_OK


def _torsion_rows(c):
    rows = []
    for ch in c.chains:
        for i, tok in enumerate(ch.seq):
            if not ch.torsions.mask[i].any():
                continue
            resseq, icode = ch.res_ids[i]
            chis = [f"{a:.6f}" if m else "" for a, m in zip(ch.torsions.angles[i], ch.torsions.mask[i])]
            rows.append("\t".join([ch.chain_id, str(resseq), icode.strip(), decode([tok])] + chis))
    return rows


def cmd_torsions(args):
    c = _read(args.input, "torsions")
    header = "\t".join(["chain", "resseq", "icode", "aa", "chi1", "chi2", "chi3", "chi4"])
    rows = _torsion_rows(c)
    Path(args.output).write_text("\n".join([header] + rows) + "\n")
    missing = [w for w in c.warnings if "missing atom" in w]
    for w in c.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _summary("torsions", residues=c.num_residues, rows=len(rows), warnings=len(missing),
             output=str(args.output))
    return EXIT_OK


def cmd_hist(args):
    cfg = load_config(args.config)
    bins = args.bins if args.bins is not None else cfg.histogram_bins
    if bins < 2:
        raise UsageError("--bins must be >= 2")
    directory = Path(args.input)
    if not directory.is_dir():
        raise UsageError(f"input directory {directory} is not readable")
    dataset = [_read(p, "hist") for p in sorted(directory.glob("*.pdb"))]
    hist = chi_histograms(dataset, bins)
    Path(args.output).write_text(hist.to_text())
    warnings = sum(1 for c in dataset for w in c.warnings if "missing atom" in w)
    _summary("hist", files=len(dataset), bins=bins, total=hist.total(), warnings=warnings,
             output=str(args.output))
    return EXIT_OK


def evaluate_losses(pred, truth, cfg):
    """Every loss term for a predicted vs reference complex, as an ordered dict."""
    if pred.lengths != truth.lengths:
        raise UsageError(f"chain lengths differ: {pred.lengths} vs {truth.lengths}")
    settings = cfg.losses
    pf, tf = pred.frames, truth.frames
    n = len(tf)
    # Vector fields from a shared, fixed prior draw at time fm_time.
    t = settings.fm_time
    prior = sample_prior(n, np.random.default_rng(0))
    xt = interp_trans(prior.trans, tf.trans, t)
    rt = interp_rot(prior.rot, tf.rot, np.full(n, t), Linear())
    se3 = L.loss_se3_fm(vf_trans(xt, pf.trans, t), vf_trans(xt, tf.trans, t),
                        vf_rot(rt, pf.rot, t), vf_rot(rt, tf.rot, t))
    pred_logits = one_hot_logits(pred.seq)
    discrete = L.loss_discrete(pred_logits, truth.seq)

    pred_atoms, true_atoms = [], []
    for pc, tc in zip(pred.chains, truth.chains):
        for pa, ta in zip(pc.atoms, tc.atoms):
            for name in pa:
                if name in ta:
                    pred_atoms.append(pa[name])
                    true_atoms.append(ta[name])
    fape = L.loss_fape(pf, np.array(pred_atoms), tf, np.array(true_atoms), settings.fape)
    fape_bb = L.loss_fape_backbone(pf, tf, settings.fape)
    dist = L.loss_distogram(pf.trans, tf.trans) if n >= 2 else 0.0

    pt, tt = pred.torsions, truth.torsions
    same = (pred.seq == truth.seq)[:, None] & pt.mask & tt.mask
    chi = L.loss_chi(TorsionSet(pt.angles, same), TorsionSet(tt.angles, same), CHI_PI_PERIODIC[truth.seq])
    corr = L.loss_correction(pred_logits, pf, truth.seq, tf)
    return {
        "se3_fm": se3,
        "discrete": discrete,
        "consistency": None,
        "fape": fape,
        "bb_fape": fape_bb,
        "distogram": dist,
        "chi": chi,
        "correction": corr,
        "refine_total": L.loss_refine_total(corr, fape_bb, dist),
    }


def cmd_losses(args):
    cfg = load_config(args.config)
    pred = _read(args.pred, "losses")
    truth = _read(args.truth, "losses")
    values = evaluate_losses(pred, truth, cfg)
    for name, v in values.items():
        print(f"{name}\t{'n/a' if v is None else format(v, '.9f')}")
    _summary("losses", **{k: v for k, v in values.items()})
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="protcogen", allow_abbrev=False,
                                description="Flow-matching protein co-design toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("curate", allow_abbrev=False, help="filter a directory of PDB files")
    s.add_argument("--input", required=True, help="directory of *.pdb files (optional manifest.tsv)")
    s.add_argument("--config")
    s.add_argument("--report", required=True, help="output JSON-lines report")
    s.set_defaults(func=cmd_curate)

    s = sub.add_parser("crop", allow_abbrev=False, help="interface-centred crop of one complex")
    s.add_argument("--input", required=True)
    s.add_argument("--config")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_crop)

    s = sub.add_parser("sample", allow_abbrev=False, help="generate a complex")
    s.add_argument("--lengths", help="comma-separated chain lengths, e.g. 50,100")
    s.add_argument("--config")
    s.add_argument("--oracle", help="target PDB for the ground-truth oracle denoiser")
    s.add_argument("--denoiser", help="'module:factory' returning a denoiser callable")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--chain-by-chain", action="store_true")
    s.add_argument("--output", required=True)
    s.add_argument("--log", help="trajectory JSON-lines file (default OUTPUT.traj.jsonl)")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("torsions", allow_abbrev=False, help="per-residue chi table")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_torsions)

    s = sub.add_parser("hist", allow_abbrev=False, help="chi-angle histograms over a directory")
    s.add_argument("--input", required=True)
    s.add_argument("--bins", type=int)
    s.add_argument("--config")
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_hist)

    s = sub.add_parser("losses", allow_abbrev=False, help="evaluate every loss term")
    s.add_argument("--pred", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_losses)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        return _fail(args.command, EXIT_INPUT, str(exc))
    except NoInterfaceError as exc:
        return _fail(args.command, EXIT_DOMAIN, str(exc))
    except (InvalidArgumentError, ProtCogenError) as exc:
        return _fail(args.command, EXIT_INPUT, str(exc))
    except OSError as exc:
        return _fail(args.command, EXIT_INPUT, f"{exc.filename}: {exc.strerror}")


if __name__ == "__main__":
    sys.exit(main())
