"""Shared tree-building helpers for the test suite."""

import random

from sparda import cmt
from sparda.codes import systematic_encode


def random_block(params, seed=0):
    rng = random.Random(seed)
    k = params.layer_dim(0)
    return [bytes(rng.randrange(256) for _ in range(8)) for _ in range(k)]


def rebuild_hash_layers(params, base_layer):
    """Honest hash layers and root over an arbitrary (even invalid) base."""
    layers = [list(base_layer)]
    for i in range(params.n_layers - 1):
        u = cmt._hash_batches(params, i, layers[i])
        layers.append(list(systematic_encode(params.layer_codes[i + 1], u).entries))
    top = params.n_layers - 1
    root = [cmt.symbol_hash(params, top, s) for s in layers[top]]
    return cmt.CodedMerkleTree(params, layers, root)


def malicious_tree(params, block, corrupt_pos, delta=b"\xff"):
    """Commit honestly to a base layer whose one symbol was overwritten."""
    honest = cmt.build_cmt(block, params)
    base = list(honest.layers[0])
    sym = bytearray(base[corrupt_pos])
    sym[0] ^= delta[0]
    base[corrupt_pos] = bytes(sym)
    return rebuild_hash_layers(params, base)
