"""Hash-aware decoding of coded Merkle trees and compact fraud proofs.

Decoding runs top-down: each decoded layer commits the digests of the layer
below, so every symbol (supplied or recovered by peeling) is checked against
its committed digest.  A mismatch yields a self-contained fraud proof that a
verifier can check against the root alone; a peeling stall yields a stopping
set report instead.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .cmt import (
    CmtParams,
    CmtProof,
    CodedMerkleTree,
    MissingWitnessError,
    ProofLevel,
    cmt_verify_at,
    proof_from_bytes,
    proof_to_bytes,
    symbol_hash,
    witness_prove_at,
)
from .codes import LayerWord, ParameterError, StoppingSetReport, xor_bytes


@dataclass(frozen=True)
class SymbolWitness:
    """One symbol together with its membership proof at a given layer."""

    index: int
    symbol: bytes
    proof: CmtProof


@dataclass(frozen=True)
class ParityFraudProof:
    """A parity check whose reconstruction contradicts a committed digest.

    ``entries`` carry the check's support minus ``omitted_index``; XOR-ing
    them reconstructs what the omitted symbol must be, and its digest is
    compared to the committed one (the root for the top layer, otherwise a
    slice of the witnessed parent symbol).
    """

    layer: int
    row: int
    omitted_index: int
    entries: tuple[SymbolWitness, ...]
    parent_witness: Optional[SymbolWitness] = None


@dataclass(frozen=True)
class HashFraudProof:
    """A circulated symbol whose digest contradicts its commitment."""

    layer: int
    index: int
    symbol: bytes
    parent_witness: Optional[SymbolWitness] = None


FraudProof = Union[ParityFraudProof, HashFraudProof]


@dataclass(frozen=True)
class FullyDecoded:
    block: tuple[bytes, ...]            # systematic part of the base layer
    layers: tuple[tuple[bytes, ...], ...]


@dataclass(frozen=True)
class Fraud:
    proof: FraudProof


@dataclass(frozen=True)
class Unavailable:
    reports: dict


def _prove_from_hashes(
    hash_arrays: Sequence[Optional[Sequence[bytes]]],
    params: CmtParams,
    layer: int,
    index: int,
) -> CmtProof:
    """Membership proof built from digest knowledge alone (no symbols)."""
    b = params.batch
    levels = []
    p = index
    for i in range(layer, params.n_layers - 1):
        digests = hash_arrays[i]
        if digests is None:
            raise MissingWitnessError(f"layer {i} digests unknown")
        j = p // b
        sibs = tuple(digests[z] for z in range(j * b, (j + 1) * b) if z != p)
        g = params.parity_group_size(i)
        k_i = params.layer_dim(i)
        par = tuple(digests[z] for z in range(k_i + j * g, k_i + (j + 1) * g))
        levels.append(ProofLevel(sibs, par))
        p = j
    return CmtProof(index, tuple(levels), layer)


def _committed_hash(root, params, hash_arrays, layer, index):
    if layer == params.n_layers - 1:
        return root[index]
    return hash_arrays[layer][index]


def _parent_witness(params, decoded, hash_arrays, layer, index):
    """Witness for the parent symbol committing the digest of (layer, index)."""
    if layer == params.n_layers - 1:
        return None
    j = index // params.batch
    return SymbolWitness(
        j, decoded[layer + 1][j], _prove_from_hashes(hash_arrays, params, layer + 1, j)
    )


def hash_aware_decode(root: Sequence[bytes], layer_words, params: CmtParams):
    """Decode all layers against the commitment.

    ``layer_words`` is one LayerWord (or symbol/None sequence) per layer,
    base first.  Returns FullyDecoded, Fraud, or Unavailable.
    """
    params.validate()
    L = params.n_layers
    if len(layer_words) != L:
        raise ParameterError(f"expected {L} layer words, got {len(layer_words)}")
    words = []
    for i, w in enumerate(layer_words):
        if not isinstance(w, LayerWord):
            w = LayerWord(list(w))
        if len(w) != params.layer_length(i):
            raise ParameterError(
                f"layer {i} word has {len(w)} symbols, expected "
                f"{params.layer_length(i)}"
            )
        words.append(w)
    if len(root) != params.root_size:
        raise ParameterError("root length does not match root_size")

    # hash_arrays[i]: committed digest of every symbol of layer i, filled in
    # as the layer above decodes; the top layer's digests are the root itself
    decoded: list[Optional[list[bytes]]] = [None] * L
    hash_arrays: list[Optional[list[bytes]]] = [None] * L
    hash_arrays[L - 1] = list(root)

    for i in range(L - 1, -1, -1):
        expected = hash_arrays[i]
        H = params.layer_codes[i]
        entries = list(words[i].entries)

        for z, sym in enumerate(entries):
            if sym is not None and symbol_hash(params, i, sym) != expected[z]:
                return Fraud(
                    HashFraudProof(
                        i, z, sym,
                        _parent_witness(params, decoded, hash_arrays, i, z),
                    )
                )

        outcome = _peel_layer(
            root, params, decoded, hash_arrays, i, H, entries, expected
        )
        if outcome is not None:
            return outcome

        decoded[i] = entries
        if i > 0:
            hash_arrays[i - 1] = _child_digests(params, i, entries)

    layers = tuple(tuple(layer) for layer in decoded)
    return FullyDecoded(tuple(decoded[0][: params.layer_dim(0)]), layers)


def _child_digests(params, layer, entries):
    """Digests of the layer below, read off a decoded layer's data symbols."""
    y = params.digest_bytes
    k = params.layer_dim(layer)
    out = []
    for sym in entries[:k]:
        out.extend(sym[t * y : (t + 1) * y] for t in range(params.batch))
    return out


def _make_parity_proof(params, decoded, hash_arrays, layer, row, omitted,
                       entries):
    H = params.layer_codes[layer]
    witnesses = tuple(
        SymbolWitness(z, entries[z], _prove_from_hashes(hash_arrays, params, layer, z))
        for z in H.rows[row]
        if z != omitted
    )
    return ParityFraudProof(
        layer, row, omitted, witnesses,
        _parent_witness(params, decoded, hash_arrays, layer, omitted),
    )


def _peel_layer(root, params, decoded, hash_arrays, layer, H, entries, expected):
    """Peel one layer in place; returns a Fraud/Unavailable outcome or None."""
    counts = [sum(1 for j in row if entries[j] is None) for row in H.rows]
    size = next((len(e) for e in entries if e is not None), 0)
    zero = bytes(size)

    progress = True
    while progress:
        progress = False
        for r, row in enumerate(H.rows):
            if counts[r] != 1:
                continue
            pos = next(j for j in row if entries[j] is None)
            acc = zero
            for j in row:
                if j != pos:
                    acc = xor_bytes(acc, entries[j])
            if symbol_hash(params, layer, acc) != expected[pos]:
                return Fraud(
                    _make_parity_proof(
                        params, decoded, hash_arrays, layer, r, pos, entries
                    )
                )
            entries[pos] = acc
            for ri in H.cols[pos]:
                counts[ri] -= 1
            progress = True

    for r, row in enumerate(H.rows):
        if counts[r]:
            continue
        acc = zero
        for j in row:
            acc = xor_bytes(acc, entries[j])
        if acc != zero:
            omitted = max(row)
            return Fraud(
                _make_parity_proof(
                    params, decoded, hash_arrays, layer, r, omitted, entries
                )
            )

    residual = frozenset(j for j, e in enumerate(entries) if e is None)
    if residual:
        report = StoppingSetReport(residual, True, len(residual) / H.n_cols)
        return Unavailable({layer: report})
    return None


def make_parity_fraud_proof(
    tree: CodedMerkleTree, layer: int, row: int, omitted_index: Optional[int] = None
) -> ParityFraudProof:
    """Build a parity fraud proof from full layer knowledge.

    Useful against a tree whose hash layers honestly commit a block that
    violates a parity check; ``omitted_index`` defaults to the check's
    highest support index.
    """
    params = tree.params
    H = params.layer_codes[layer]
    if not 0 <= row < H.n_rows:
        raise ParameterError("row out of range")
    support = H.rows[row]
    if omitted_index is None:
        omitted_index = max(support)
    if omitted_index not in support:
        raise ParameterError("omitted index not in the check's support")
    entries = tuple(
        SymbolWitness(z, tree.layers[layer][z], witness_prove_at(tree.layers, params, layer, z))
        for z in support
        if z != omitted_index
    )
    parent = None
    if layer < params.n_layers - 1:
        j = omitted_index // params.batch
        parent = SymbolWitness(
            j,
            tree.layers[layer + 1][j],
            witness_prove_at(tree.layers, params, layer + 1, j),
        )
    return ParityFraudProof(layer, row, omitted_index, entries, parent)


def _verified_committed_hash(root, params, layer, index, parent_witness):
    """Committed digest of (layer, index), or None if the witness fails."""
    if layer == params.n_layers - 1:
        return root[index]
    if parent_witness is None:
        return None
    j = index // params.batch
    if parent_witness.index != j:
        return None
    if not cmt_verify_at(root, layer + 1, j, parent_witness.symbol,
                         parent_witness.proof, params):
        return None
    y = params.digest_bytes
    slot = index % params.batch
    return parent_witness.symbol[slot * y : (slot + 1) * y]


def verify_fraud_proof(root: Sequence[bytes], proof: FraudProof,
                       params: CmtParams) -> bool:
    """True iff the proof demonstrates an inconsistency with the root."""
    try:
        if isinstance(proof, ParityFraudProof):
            return _verify_parity(root, proof, params)
        if isinstance(proof, HashFraudProof):
            return _verify_hash(root, proof, params)
        return False
    except Exception:
        return False


def _verify_parity(root, proof, params) -> bool:
    if not 0 <= proof.layer < params.n_layers:
        return False
    H = params.layer_codes[proof.layer]
    if not 0 <= proof.row < H.n_rows:
        return False
    support = H.rows[proof.row]
    if proof.omitted_index not in support:
        return False
    if tuple(w.index for w in proof.entries) != tuple(
        z for z in support if z != proof.omitted_index
    ):
        return False
    sizes = {len(w.symbol) for w in proof.entries}
    if len(sizes) != 1:
        return False
    for w in proof.entries:
        if not cmt_verify_at(root, proof.layer, w.index, w.symbol, w.proof, params):
            return False
    committed = _verified_committed_hash(
        root, params, proof.layer, proof.omitted_index, proof.parent_witness
    )
    if committed is None:
        return False
    v = bytes(sizes.pop())
    for w in proof.entries:
        v = xor_bytes(v, w.symbol)
    return symbol_hash(params, proof.layer, v) != committed


def _verify_hash(root, proof, params) -> bool:
    if not 0 <= proof.layer < params.n_layers:
        return False
    if not 0 <= proof.index < params.layer_length(proof.layer):
        return False
    committed = _verified_committed_hash(
        root, params, proof.layer, proof.index, proof.parent_witness
    )
    if committed is None:
        return False
    return symbol_hash(params, proof.layer, proof.symbol) != committed


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_FRAUD_MAGIC = b"SFP1"
_KIND_PARITY = 1
_KIND_HASH = 2


def _pack_bytes(data: bytes) -> bytes:
    return struct.pack("<I", len(data)) + data


def _unpack_bytes(blob, off):
    (n,) = struct.unpack_from("<I", blob, off)
    off += 4
    return bytes(blob[off : off + n]), off + n


def _pack_witness(w: SymbolWitness, params) -> bytes:
    return (
        struct.pack("<I", w.index)
        + _pack_bytes(w.symbol)
        + _pack_bytes(proof_to_bytes(w.proof, params))
    )


def _unpack_witness(blob, off):
    (index,) = struct.unpack_from("<I", blob, off)
    off += 4
    symbol, off = _unpack_bytes(blob, off)
    raw, off = _unpack_bytes(blob, off)
    return SymbolWitness(index, symbol, proof_from_bytes(raw)), off


def fraud_to_bytes(proof: FraudProof, params: CmtParams) -> bytes:
    out = [_FRAUD_MAGIC]
    if isinstance(proof, ParityFraudProof):
        out.append(struct.pack("<BHIIH", _KIND_PARITY, proof.layer, proof.row,
                               proof.omitted_index, len(proof.entries)))
        for w in proof.entries:
            out.append(_pack_witness(w, params))
    elif isinstance(proof, HashFraudProof):
        out.append(struct.pack("<BHI", _KIND_HASH, proof.layer, proof.index))
        out.append(_pack_bytes(proof.symbol))
    else:
        raise ParameterError(f"unknown proof type {type(proof).__name__}")
    if proof.parent_witness is None:
        out.append(b"\x00")
    else:
        out.append(b"\x01")
        out.append(_pack_witness(proof.parent_witness, params))
    return b"".join(out)


def fraud_from_bytes(blob: bytes) -> FraudProof:
    if blob[:4] != _FRAUD_MAGIC:
        raise ParameterError("bad fraud proof magic")
    kind = blob[4]
    off = 5
    if kind == _KIND_PARITY:
        layer, row, omitted, n_ent = struct.unpack_from("<HIIH", blob, off)
        off += 12
        entries = []
        for _ in range(n_ent):
            w, off = _unpack_witness(blob, off)
            entries.append(w)
        parent, off = _unpack_parent(blob, off)
        return ParityFraudProof(layer, row, omitted, tuple(entries), parent)
    if kind == _KIND_HASH:
        layer, index = struct.unpack_from("<HI", blob, off)
        off += 6
        symbol, off = _unpack_bytes(blob, off)
        parent, off = _unpack_parent(blob, off)
        return HashFraudProof(layer, index, symbol, parent)
    raise ParameterError(f"unknown fraud proof kind {kind}")


def _unpack_parent(blob, off):
    flag = blob[off]
    off += 1
    if not flag:
        return None, off
    return _unpack_witness(blob, off)


def fraud_debug_json(proof: FraudProof) -> dict:
    def wit(w):
        return None if w is None else {
            "index": w.index,
            "symbol": w.symbol.hex(),
            "proof_levels": len(w.proof.levels),
        }

    if isinstance(proof, ParityFraudProof):
        return {
            "kind": "parity",
            "layer": proof.layer,
            "row": proof.row,
            "omitted_index": proof.omitted_index,
            "entries": [wit(w) for w in proof.entries],
            "parent_witness": wit(proof.parent_witness),
        }
    return {
        "kind": "hash",
        "layer": proof.layer,
        "index": proof.index,
        "symbol": proof.symbol.hex(),
        "parent_witness": wit(proof.parent_witness),
    }
