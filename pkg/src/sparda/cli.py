"""Command-line front end.

Every command echoes its fully resolved configuration (plus the tool
version) into its output so runs are reproducible from the artifact alone.
Exit codes for `decode`: 0 decoded, 2 fraud proof emitted, 3 unavailable.
"""

from __future__ import annotations

import json
import math
import os
import sys
import time

import click

from . import __version__, alist as alist_io, analysis, cmt as cmt_mod, fraud as fraud_mod, game as game_mod
from .codes import (
    CodeError,
    EnsembleParams,
    generate_ensemble_code,
    generate_systematic_code,
    mask_single_error,
)

ENV_SEED = "SPARDA_SEED"


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get(ENV_SEED)
    return int(env) if env else 0


def _emit(obj, out):
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)


def _meta(config: dict) -> dict:
    return {"tool_version": __version__, "config": config}


@click.group()
@click.option("--seed", type=int, default=None,
              help=f"Global RNG seed (default: ${ENV_SEED} or 0).")
@click.option("--threads", type=int, default=1,
              help="Worker count; results are independent of it.")
@click.version_option(__version__)
@click.pass_context
def main(ctx, seed, threads):
    ctx.obj = {"seed": _resolve_seed(seed), "threads": threads}


@main.command("gen-code")
@click.option("--n", default=4096, show_default=True)
@click.option("--rate", default=0.25, show_default=True)
@click.option("--col-weight", default=6, show_default=True)
@click.option("--row-weight", default=8, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--systematic/--no-systematic", default=True, show_default=True,
              help="Retry seeds until the parity part is invertible.")
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def gen_code(ctx, n, rate, col_weight, row_weight, seed, systematic, out):
    """Draw one sparse-graph code and write it as an alist file."""
    seed = seed if seed is not None else ctx.obj["seed"]
    params = EnsembleParams(n, rate, col_weight, row_weight, seed)
    try:
        gen = generate_systematic_code if systematic else generate_ensemble_code
        H = gen(params)
    except CodeError as exc:
        raise click.ClickException(str(exc))
    alist_io.write_alist(H, out)
    _emit(
        _meta({"n": n, "rate": rate, "col_weight": col_weight,
               "row_weight": row_weight, "seed": seed,
               "systematic": systematic, "out": out})
        | {"n_rows": H.n_rows, "seed_used": H.meta.get("seed_used"),
           "retries": H.meta.get("retries")},
        out + ".json",
    )


def _split_block(raw: bytes, k: int):
    """Split raw bytes into k equal symbols, zero-padding at the end."""
    size = max(1, math.ceil(len(raw) / k))
    pad = k * size - len(raw)
    raw = raw + bytes(pad)
    return [raw[i * size : (i + 1) * size] for i in range(k)], pad


@main.command("cmt")
@click.option("--block-file", required=True, type=click.Path(exists=True))
@click.option("--k", default=64, show_default=True, help="Base data symbols.")
@click.option("--rate", default=0.25, show_default=True)
@click.option("--batch", default=8, show_default=True)
@click.option("--root-size", default=32, show_default=True)
@click.option("--col-weight", default=6, show_default=True)
@click.option("--row-weight", default=8, show_default=True)
@click.option("--digest-bits", default=256, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def cmd_cmt(ctx, block_file, k, rate, batch, root_size, col_weight, row_weight,
            digest_bits, seed, out):
    """Build a coded Merkle tree over a raw byte block."""
    seed = seed if seed is not None else ctx.obj["seed"]
    raw = open(block_file, "rb").read()
    block, pad = _split_block(raw, k)
    try:
        params = cmt_mod.make_cmt_params(k, rate, batch, root_size, col_weight,
                                         row_weight, seed, digest_bits)
        tree = cmt_mod.build_cmt(block, params)
    except CodeError as exc:
        raise click.ClickException(str(exc))
    with open(out, "wb") as fh:
        fh.write(cmt_mod.tree_to_bytes(tree))
    _emit(
        _meta({"block_file": block_file, "k": k, "rate": rate, "batch": batch,
               "root_size": root_size, "col_weight": col_weight,
               "row_weight": row_weight, "digest_bits": digest_bits,
               "seed": seed, "out": out})
        | {"pad_bytes": pad, "block_bytes": len(raw),
           "root": [d.hex() for d in tree.root],
           "layer_lengths": [len(x) for x in tree.layers]},
        out + ".meta.json",
    )


@main.command("attack")
@click.option("--strategy",
              type=click.Choice(["weak", "strong", "explicit", "honest", "single-error"]),
              required=True)
@click.option("--alpha", type=float, default=0.0)
@click.option("--positions", default="", help="Comma list for explicit hide sets.")
@click.option("--error-pos", type=int, default=None,
              help="Symbol index for single-error masking.")
@click.option("--code", "code_path", type=click.Path(exists=True), default=None)
@click.option("--n", type=int, default=None)
@click.option("--assume-undecodable", is_flag=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def attack(ctx, strategy, alpha, positions, error_pos, code_path, n,
           assume_undecodable, seed, out):
    """Construct an adversarial hide set (or a masking erasure set)."""
    seed = seed if seed is not None else ctx.obj["seed"]
    H = alist_io.read_alist(code_path) if code_path else None
    try:
        if strategy == "single-error":
            if H is None or error_pos is None:
                raise click.ClickException("--code and --error-pos required")
            hide = mask_single_error(H, error_pos)
        else:
            strat = {
                "weak": game_mod.WeakRandom(alpha),
                "strong": game_mod.StrongStoppingSet(alpha, assume_undecodable),
                "explicit": game_mod.ExplicitHideSet(
                    frozenset(int(x) for x in positions.split(",") if x != "")
                ),
                "honest": game_mod.HonestAvailable(),
            }[strategy]
            target = H if H is not None else n
            if target is None:
                raise click.ClickException("--code or --n required")
            hide = game_mod.adversary_hide_set(strat, target, seed)
    except CodeError as exc:
        raise click.ClickException(str(exc))
    _emit(
        _meta({"strategy": strategy, "alpha": alpha, "error_pos": error_pos,
               "code": code_path, "n": n,
               "assume_undecodable": assume_undecodable, "seed": seed})
        | {"hide_set": sorted(hide), "size": len(hide)},
        out,
    )


@main.command("decode")
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
@click.option("--erase", default="", help="Comma list of base positions to erase.")
@click.option("--erase-file", type=click.Path(exists=True), default=None,
              help="JSON file with a hide_set list (attack output).")
@click.option("--meta", "meta_path", type=click.Path(exists=True), default=None,
              help="Tree sidecar; used to strip block padding.")
@click.option("--out", required=True, type=click.Path(),
              help="Prefix for block/proof/report outputs.")
@click.pass_context
def decode(ctx, tree_path, erase, erase_file, meta_path, out):
    """Hash-aware decode of a stored tree with some base symbols withheld."""
    tree = cmt_mod.tree_from_bytes(open(tree_path, "rb").read())
    erased = {int(x) for x in erase.split(",") if x != ""}
    if erase_file:
        obj = json.loads(open(erase_file).read())
        erased.update(obj["hide_set"] if isinstance(obj, dict) else obj)
    words = [list(layer) for layer in tree.layers]
    for p in erased:
        words[0][p] = None
    outcome = fraud_mod.hash_aware_decode(tree.root, words, tree.params)
    config = {"tree": tree_path, "erased": sorted(erased), "out": out}
    if isinstance(outcome, fraud_mod.FullyDecoded):
        raw = b"".join(outcome.block)
        if meta_path:
            pad = json.loads(open(meta_path).read()).get("pad_bytes", 0)
            if pad:
                raw = raw[:-pad]
        with open(out + ".block", "wb") as fh:
            fh.write(raw)
        _emit(_meta(config) | {"outcome": "decoded", "block_bytes": len(raw)},
              out + ".json")
        sys.exit(0)
    if isinstance(outcome, fraud_mod.Fraud):
        blob = fraud_mod.fraud_to_bytes(outcome.proof, tree.params)
        with open(out + ".fraud", "wb") as fh:
            fh.write(blob)
        _emit(_meta(config)
              | {"outcome": "fraud",
                 "proof": fraud_mod.fraud_debug_json(outcome.proof)},
              out + ".json")
        sys.exit(2)
    reports = {
        str(layer): {"positions": sorted(r.positions), "size_ratio": r.size_ratio}
        for layer, r in outcome.reports.items()
    }
    _emit(_meta(config) | {"outcome": "unavailable", "reports": reports},
          out + ".json")
    sys.exit(3)


@main.group()
def fraud():
    """Fraud-proof utilities."""


@fraud.command("verify")
@click.option("--proof", "proof_path", required=True, type=click.Path(exists=True))
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True),
              help="Tree file supplying the committed root and parameters.")
@click.option("--out", type=click.Path(), default=None)
def fraud_verify(proof_path, tree_path, out):
    """Check a serialized fraud proof against a commitment."""
    tree = cmt_mod.tree_from_bytes(open(tree_path, "rb").read())
    proof = fraud_mod.fraud_from_bytes(open(proof_path, "rb").read())
    ok = fraud_mod.verify_fraud_proof(tree.root, proof, tree.params)
    _emit(_meta({"proof": proof_path, "tree": tree_path}) | {"verifies": ok}, out)
    sys.exit(0 if ok else 1)


@main.command("simulate")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--code", "code_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
def simulate(config_path, code_path, out):
    """Monte-Carlo estimate of the adversary's success probability."""
    config = game_mod.config_from_json(open(config_path).read())
    context = alist_io.read_alist(code_path) if code_path else None
    start = time.perf_counter()
    gamma_hat, stderr = game_mod.estimate_asp(config, context)
    wall = time.perf_counter() - start
    _emit(
        _meta(json.loads(game_mod.config_to_json(config)))
        | {"gamma_hat": gamma_hat, "stderr": stderr, "trials": config.trials,
           "wall_time_s": wall},
        out,
    )


def _bound_params(adversary, m, n, alpha, s):
    if alpha is None:
        ref = analysis.load_reference()["bound_params"]
        alpha = ref["alpha_weak"] if adversary == "weak" else ref["alpha_strong"]
    return analysis.BoundParams((alpha,), (n,), m, s), alpha


@main.command("bounds")
@click.option("--bound", type=click.Choice(["original", "recomputed"]), required=True)
@click.option("--adversary", type=click.Choice(["weak", "strong"]), required=True)
@click.option("--s", "s", type=int, required=True)
@click.option("--m", default=1024, show_default=True)
@click.option("--n", default=4096, show_default=True)
@click.option("--alpha", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
def bounds(bound, adversary, s, m, n, alpha, out):
    """Evaluate one adversarial-success-probability bound."""
    p, alpha = _bound_params(adversary, m, n, alpha, s)
    value = analysis.asp_bound(bound, p)
    _emit(_meta({"bound": bound, "adversary": adversary, "s": s, "m": m,
                 "n": n, "alpha": alpha}) | {"value": value}, out)


@main.command("min-samples")
@click.option("--bound", type=click.Choice(["original", "recomputed"]), required=True)
@click.option("--adversary", type=click.Choice(["weak", "strong"]), required=True)
@click.option("--gamma", type=float, required=True)
@click.option("--m", default=1024, show_default=True)
@click.option("--n", default=4096, show_default=True)
@click.option("--alpha", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
def min_samples_cmd(bound, adversary, gamma, m, n, alpha, out):
    """Invert a bound: smallest sample count meeting a target probability."""
    p, alpha = _bound_params(adversary, m, n, alpha, 1)
    try:
        s = analysis.min_samples(bound, gamma, p)
    except analysis.AnalysisError as exc:
        raise click.ClickException(str(exc))
    _emit(_meta({"bound": bound, "adversary": adversary, "gamma": gamma,
                 "m": m, "n": n, "alpha": alpha}) | {"min_samples": s}, out)


@main.command("cost")
@click.option("--s", "s", type=int, required=True)
@click.option("--block-bytes", type=float, default=1e6, show_default=True)
@click.option("--k", default=1024, show_default=True)
@click.option("--digest-bytes", default=32, show_default=True)
@click.option("--batch", default=8, show_default=True)
@click.option("--rate", default=0.25, show_default=True)
@click.option("--root-hashes", default=256, show_default=True)
@click.option("--digest-bits", default=256, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def cost(s, block_bytes, k, digest_bytes, batch, rate, root_hashes,
         digest_bits, out):
    """Per-node byte costs: sampling, header, total download."""
    c = analysis.CostParams(block_bytes, k, digest_bytes, batch, rate,
                            root_hashes, digest_bits)
    try:
        d = analysis.total_download(s, c)
        br = analysis.sampling_breakdown(c)
    except analysis.AnalysisError as exc:
        raise click.ClickException(str(exc))
    _emit(
        _meta({"s": s, "block_bytes": block_bytes, "k": k,
               "digest_bytes": digest_bytes, "batch": batch, "rate": rate,
               "root_hashes": root_hashes, "digest_bits": digest_bits})
        | {"sampling_bytes": d.sampling_bytes, "header_bytes": d.header_bytes,
           "total_bytes": d.total_bytes, "d_over_b": d.fraction_of_block,
           "per_sample_bytes": br.total_bytes, "layer_count": br.layer_count},
        out,
    )


@main.command("tables")
@click.option("--table", "table_id", type=click.IntRange(1, 5), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.option("--out", type=click.Path(), default=None)
def tables(table_id, fmt, out):
    """Recompute a comparison table and report per-cell deviations."""
    report = analysis.reproduce_table(table_id)
    if fmt == "csv":
        text = analysis.table_to_csv(report)
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        click.echo(text, nl=False)
    else:
        text = analysis.table_to_json(report)
        if out:
            with open(out, "w") as fh:
                fh.write(text + "\n")
        click.echo(text)
    if not report.all_ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
