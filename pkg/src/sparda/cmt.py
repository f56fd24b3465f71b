"""Coded Merkle trees: construction, membership proofs, serialization.

Layer 0 is the coded block; each higher layer encodes the batched hashes of
the layer below, and the tree stops when a coded layer has exactly
``root_size`` symbols.  The committed root is the vector of digests of that
top layer.  A plain binary Merkle tree (the uncoded accumulator used for the
transaction list) lives here too.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import alist as alist_io
from .codes import (
    EnsembleParams,
    LayerWord,
    ParameterError,
    SparseParityMatrix,
    generate_systematic_code,
    systematic_encode,
)


@dataclass
class CmtParams:
    """Shape of a coded Merkle tree: batching, digest, and per-layer codes."""

    batch: int                      # hashes grouped per parent symbol
    root_size: int                  # symbols in the top coded layer
    digest_bits: int                # digest length, bits
    rate: float                     # shared code rate of every layer
    layer_codes: list[SparseParityMatrix] = field(default_factory=list)
    partition: str = "contiguous"

    @property
    def digest_bytes(self) -> int:
        return self.digest_bits // 8

    @property
    def n_layers(self) -> int:
        return len(self.layer_codes)

    def layer_length(self, i: int) -> int:
        return self.layer_codes[i].n_cols

    def layer_dim(self, i: int) -> int:
        return self.layer_codes[i].k

    def parity_group_size(self, i: int) -> int:
        n, k = self.layer_length(i), self.layer_dim(i)
        return (n - k) // (n // self.batch)

    def validate(self) -> None:
        if self.digest_bits % 8:
            raise ParameterError("digest_bits must be a multiple of 8")
        if self.batch < 2:
            raise ParameterError("batch must be >= 2")
        if self.partition != "contiguous":
            raise ParameterError(f"unknown partition rule {self.partition!r}")
        if not self.layer_codes:
            raise ParameterError("at least one layer code required")
        for i, H in enumerate(self.layer_codes[:-1]):
            if H.n_cols % self.batch:
                raise ParameterError(f"batch does not divide layer {i} length")
            nxt = self.layer_codes[i + 1]
            if nxt.k != H.n_cols // self.batch:
                raise ParameterError(
                    f"layer {i + 1} dimension {nxt.k} != {H.n_cols}/{self.batch}"
                )
            n_batches = H.n_cols // self.batch
            if (H.n_cols - H.k) % n_batches:
                raise ParameterError(
                    f"layer {i} parity section not partitionable per batch"
                )
        if self.layer_codes[-1].n_cols != self.root_size:
            raise ParameterError(
                f"top layer length {self.layer_codes[-1].n_cols} != "
                f"root_size {self.root_size}"
            )


def cmt_layer_lengths(k: int, rate: float, batch: int, root_size: int) -> list[int]:
    """Coded layer lengths from the base dimension down to the root layer."""
    if batch * rate <= 1.0:
        raise ParameterError("need batch*rate > 1 so layers shrink")
    lengths = []
    dim = k
    while True:
        n = dim / rate
        if abs(n - round(n)) > 1e-9:
            raise ParameterError(f"layer dimension {dim} not encodable at rate {rate}")
        n = round(n)
        lengths.append(n)
        if n == root_size:
            return lengths
        if n < root_size:
            raise ParameterError(
                f"layer lengths {lengths} skip root_size {root_size}"
            )
        if n % batch:
            raise ParameterError(f"batch {batch} does not divide layer length {n}")
        dim = n // batch


def make_cmt_params(
    k: int,
    rate: float,
    batch: int,
    root_size: int,
    v_max: int,
    w_max: int,
    seed: int = 0,
    digest_bits: int = 256,
) -> CmtParams:
    """Convenience builder drawing one encodable ensemble code per layer."""
    lengths = cmt_layer_lengths(k, rate, batch, root_size)
    codes = []
    for i, n in enumerate(lengths):
        ens = EnsembleParams(n, rate, v_max, w_max, seed + 10_000 * i)
        codes.append(generate_systematic_code(ens))
    params = CmtParams(batch, root_size, digest_bits, rate, codes)
    params.validate()
    return params


def symbol_hash(params: CmtParams, layer: int, data: bytes) -> bytes:
    """Digest of one layer symbol; the layer index is the domain separator."""
    return hashlib.sha256(bytes([layer % 256]) + data).digest()[: params.digest_bytes]


@dataclass
class CodedMerkleTree:
    params: CmtParams
    layers: list[list[bytes]]       # layer 0 = base coded block
    root: list[bytes]               # digests of the top layer's symbols

    def block(self) -> list[bytes]:
        return self.layers[0][: self.params.layer_dim(0)]


def _hash_batches(params: CmtParams, layer_idx: int, symbols: Sequence[bytes]):
    b = params.batch
    out = []
    for j in range(len(symbols) // b):
        chunk = symbols[j * b : (j + 1) * b]
        out.append(b"".join(symbol_hash(params, layer_idx, s) for s in chunk))
    return out


def build_cmt(block: Sequence[bytes], params: CmtParams) -> CodedMerkleTree:
    """Encode the block and grow hash layers until the root layer is reached."""
    params.validate()
    if len(block) != params.layer_dim(0):
        raise ParameterError(
            f"block has {len(block)} symbols, layer-0 dimension is "
            f"{params.layer_dim(0)}"
        )
    layers = []
    word = systematic_encode(params.layer_codes[0], list(block))
    layers.append(list(word.entries))
    for i in range(params.n_layers - 1):
        u = _hash_batches(params, i, layers[i])
        word = systematic_encode(params.layer_codes[i + 1], u)
        layers.append(list(word.entries))
    top = params.n_layers - 1
    root = [symbol_hash(params, top, s) for s in layers[top]]
    return CodedMerkleTree(params, layers, root)


def cmt_root(tree: CodedMerkleTree) -> list[bytes]:
    return list(tree.root)


@dataclass(frozen=True)
class ProofLevel:
    sibling_hashes: tuple[bytes, ...]   # batch - 1 digests
    parity_hashes: tuple[bytes, ...]    # batch*(1-rate) digests, payload


@dataclass(frozen=True)
class CmtProof:
    leaf_index: int
    levels: tuple[ProofLevel, ...]
    start_layer: int = 0


class MissingWitnessError(ParameterError):
    """A hash needed for proof construction is not known to the witness."""


def witness_prove_at(
    layers: Sequence[Sequence[Optional[bytes]]],
    params: CmtParams,
    layer: int,
    index: int,
) -> CmtProof:
    """Build a membership proof from (possibly partial) layer knowledge."""
    b = params.batch
    levels = []
    p = index
    for i in range(layer, params.n_layers - 1):
        j = p // b
        sibs = []
        for z in range(j * b, (j + 1) * b):
            if z == p:
                continue
            sym = layers[i][z]
            if sym is None:
                raise MissingWitnessError(f"layer {i} symbol {z} unknown")
            sibs.append(symbol_hash(params, i, sym))
        g = params.parity_group_size(i)
        k_i = params.layer_dim(i)
        par = []
        for z in range(k_i + j * g, k_i + (j + 1) * g):
            sym = layers[i][z]
            if sym is None:
                raise MissingWitnessError(f"layer {i} parity symbol {z} unknown")
            par.append(symbol_hash(params, i, sym))
        levels.append(ProofLevel(tuple(sibs), tuple(par)))
        p = j
    return CmtProof(index, tuple(levels), layer)


def cmt_prove_at(tree: CodedMerkleTree, layer: int, index: int) -> CmtProof:
    if not 0 <= layer < tree.params.n_layers:
        raise ParameterError("layer out of range")
    if not 0 <= index < tree.params.layer_length(layer):
        raise ParameterError("index out of range")
    return witness_prove_at(tree.layers, tree.params, layer, index)


def cmt_prove(tree: CodedMerkleTree, leaf_index: int) -> CmtProof:
    return cmt_prove_at(tree, 0, leaf_index)


def cmt_verify_at(
    root: Sequence[bytes],
    layer: int,
    index: int,
    symbol: bytes,
    proof: CmtProof,
    params: CmtParams,
) -> bool:
    """Recompute the path from (layer, index, symbol) and compare to the root."""
    try:
        if proof.start_layer != layer or proof.leaf_index != index:
            return False
        if len(proof.levels) != params.n_layers - 1 - layer:
            return False
        if not 0 <= index < params.layer_length(layer):
            return False
        b = params.batch
        y = params.digest_bytes
        cur = symbol
        p = index
        for lvl, i in zip(proof.levels, range(layer, params.n_layers - 1)):
            if len(lvl.sibling_hashes) != b - 1:
                return False
            if len(lvl.parity_hashes) != params.parity_group_size(i):
                return False
            if any(len(h) != y for h in lvl.sibling_hashes + lvl.parity_hashes):
                return False
            h = symbol_hash(params, i, cur)
            slot = p % b
            hashes = list(lvl.sibling_hashes)
            hashes.insert(slot, h)
            cur = b"".join(hashes)
            p = p // b
        top = params.n_layers - 1
        return symbol_hash(params, top, cur) == root[p]
    except Exception:
        return False


def cmt_verify(root, leaf_index, symbol, proof, params) -> bool:
    return cmt_verify_at(root, 0, leaf_index, symbol, proof, params)


def proof_level_bytes(params: CmtParams, layer: int) -> int:
    """Digest payload per proof level: siblings plus the parity-side group."""
    y = params.digest_bytes
    return y * (params.batch - 1) + y * params.parity_group_size(layer)


def proof_size_bytes(params: CmtParams, start_layer: int = 0) -> int:
    return sum(
        proof_level_bytes(params, i)
        for i in range(start_layer, params.n_layers - 1)
    )


# ---------------------------------------------------------------------------
# plain (uncoded) Merkle tree, the degenerate accumulator for the raw block
# ---------------------------------------------------------------------------

def _leaf_hash(data: bytes) -> bytes:
    return hashlib.sha256(b"\x00" + data).digest()


def _node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(b"\x01" + left + right).digest()


def _plain_levels(data: Sequence[bytes]) -> list[list[bytes]]:
    if not data:
        raise ParameterError("empty leaf list")
    level = [_leaf_hash(d) for d in data]
    while len(level) & (len(level) - 1):
        level.append(level[-1])        # duplicate-last padding to a power of 2
    levels = [level]
    while len(level) > 1:
        level = [
            _node_hash(level[2 * i], level[2 * i + 1])
            for i in range(len(level) // 2)
        ]
        levels.append(level)
    return levels


def merkle_root_plain(data: Sequence[bytes]) -> bytes:
    return _plain_levels(data)[-1][0]


def merkle_prove_plain(data: Sequence[bytes], index: int) -> list[bytes]:
    levels = _plain_levels(data)
    if not 0 <= index < len(data):
        raise ParameterError("leaf index out of range")
    path = []
    i = index
    for level in levels[:-1]:
        path.append(level[i ^ 1])
        i //= 2
    return path


def merkle_verify_plain(root: bytes, index: int, leaf: bytes, path: Sequence[bytes]) -> bool:
    h = _leaf_hash(leaf)
    i = index
    for sib in path:
        h = _node_hash(h, sib) if i % 2 == 0 else _node_hash(sib, h)
        i //= 2
    return h == root


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_TREE_MAGIC = b"CMT1"
_PROOF_MAGIC = b"CMP1"


def params_to_json_obj(params: CmtParams) -> dict:
    return {
        "batch": params.batch,
        "root_size": params.root_size,
        "digest_bits": params.digest_bits,
        "rate": params.rate,
        "partition": params.partition,
        "layer_codes_alist": [alist_io.to_alist(H) for H in params.layer_codes],
    }


def params_from_json_obj(obj: dict) -> CmtParams:
    codes = [alist_io.from_alist(a) for a in obj["layer_codes_alist"]]
    params = CmtParams(
        obj["batch"], obj["root_size"], obj["digest_bits"], obj["rate"], codes,
        obj.get("partition", "contiguous"),
    )
    params.validate()
    return params


def tree_to_bytes(tree: CodedMerkleTree) -> bytes:
    header = json.dumps(params_to_json_obj(tree.params)).encode()
    out = [_TREE_MAGIC, struct.pack("<I", len(header)), header]
    y = tree.params.digest_bytes
    out.append(struct.pack("<I", len(tree.root)))
    out.extend(tree.root)
    out.append(struct.pack("<H", len(tree.layers)))
    for layer in tree.layers:
        size = len(layer[0])
        out.append(struct.pack("<II", len(layer), size))
        out.extend(layer)
    assert all(len(d) == y for d in tree.root)
    return b"".join(out)


def tree_from_bytes(blob: bytes) -> CodedMerkleTree:
    if blob[:4] != _TREE_MAGIC:
        raise ParameterError("bad tree magic")
    off = 4
    (hlen,) = struct.unpack_from("<I", blob, off)
    off += 4
    params = params_from_json_obj(json.loads(blob[off : off + hlen]))
    off += hlen
    (nroot,) = struct.unpack_from("<I", blob, off)
    off += 4
    y = params.digest_bytes
    root = [bytes(blob[off + i * y : off + (i + 1) * y]) for i in range(nroot)]
    off += nroot * y
    (nlayers,) = struct.unpack_from("<H", blob, off)
    off += 2
    layers = []
    for _ in range(nlayers):
        count, size = struct.unpack_from("<II", blob, off)
        off += 8
        layer = [bytes(blob[off + i * size : off + (i + 1) * size]) for i in range(count)]
        off += count * size
        layers.append(layer)
    return CodedMerkleTree(params, layers, root)


def proof_to_bytes(proof: CmtProof, params: CmtParams) -> bytes:
    y = params.digest_bytes
    out = [
        _PROOF_MAGIC,
        struct.pack("<IHHH", proof.leaf_index, proof.start_layer, y, len(proof.levels)),
    ]
    for lvl in proof.levels:
        out.append(struct.pack("<HH", len(lvl.sibling_hashes), len(lvl.parity_hashes)))
        out.extend(lvl.sibling_hashes)
        out.extend(lvl.parity_hashes)
    return b"".join(out)


def proof_from_bytes(blob: bytes) -> CmtProof:
    if blob[:4] != _PROOF_MAGIC:
        raise ParameterError("bad proof magic")
    leaf, start, y, nlev = struct.unpack_from("<IHHH", blob, 4)
    off = 14
    levels = []
    for _ in range(nlev):
        nsib, npar = struct.unpack_from("<HH", blob, off)
        off += 4
        sibs = tuple(bytes(blob[off + i * y : off + (i + 1) * y]) for i in range(nsib))
        off += nsib * y
        pars = tuple(bytes(blob[off + i * y : off + (i + 1) * y]) for i in range(npar))
        off += npar * y
        levels.append(ProofLevel(sibs, pars))
    return CmtProof(leaf, tuple(levels), start)


def tree_debug_json(tree: CodedMerkleTree) -> dict:
    return {
        "params": params_to_json_obj(tree.params),
        "root": [d.hex() for d in tree.root],
        "layers": [[s.hex() for s in layer] for layer in tree.layers],
    }


def proof_debug_json(proof: CmtProof) -> dict:
    return {
        "leaf_index": proof.leaf_index,
        "start_layer": proof.start_layer,
        "levels": [
            {
                "sibling_hashes": [h.hex() for h in lvl.sibling_hashes],
                "parity_hashes": [h.hex() for h in lvl.parity_hashes],
            }
            for lvl in proof.levels
        ],
    }
