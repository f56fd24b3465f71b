import random

import pytest

from sparda import cmt
from sparda.codes import ParameterError


def small_params(seed=3):
    return cmt.make_cmt_params(k=16, rate=0.5, batch=4, root_size=8,
                               v_max=2, w_max=4, seed=seed)


def small_tree(seed=3, data_seed=0):
    params = small_params(seed)
    rng = random.Random(data_seed)
    block = [bytes(rng.randrange(256) for _ in range(8)) for _ in range(16)]
    return cmt.build_cmt(block, params), block


def test_layer_lengths_geometric_shrink():
    assert cmt.cmt_layer_lengths(1024, 0.25, 8, 256) == [4096, 2048, 1024, 512, 256]
    assert cmt.cmt_layer_lengths(16, 0.5, 4, 8) == [32, 16, 8]
    assert cmt.cmt_layer_lengths(4, 0.5, 4, 8) == [8]


def test_layer_lengths_rejects_bad_shapes():
    with pytest.raises(ParameterError):
        cmt.cmt_layer_lengths(16, 0.5, 2, 8)      # batch*rate = 1, never shrinks
    with pytest.raises(ParameterError):
        cmt.cmt_layer_lengths(15, 0.5, 4, 8)      # non-integer layer length
    with pytest.raises(ParameterError):
        cmt.cmt_layer_lengths(16, 0.5, 4, 12)     # skips the root size


def test_params_validation():
    params = small_params()
    params.validate()
    assert params.n_layers == 3
    assert [params.layer_length(i) for i in range(3)] == [32, 16, 8]
    assert params.parity_group_size(0) == 2      # batch * (1 - rate)
    bad = cmt.CmtParams(params.batch, 12, params.digest_bits, params.rate,
                        params.layer_codes)
    with pytest.raises(ParameterError):
        bad.validate()


def test_build_requires_exact_block_size():
    params = small_params()
    with pytest.raises(ParameterError):
        cmt.build_cmt([b"x" * 8] * 15, params)


def test_tree_structure_and_root():
    tree, block = small_tree()
    params = tree.params
    assert tree.block() == block
    assert [len(layer) for layer in tree.layers] == [32, 16, 8]
    assert len(tree.root) == 8
    assert all(len(d) == params.digest_bytes for d in tree.root)
    top = params.n_layers - 1
    assert tree.root == [cmt.symbol_hash(params, top, s) for s in tree.layers[top]]
    # upper-layer data symbols are concatenated digests of the batch below
    y = params.digest_bytes
    sym = tree.layers[1][0]
    expect = b"".join(cmt.symbol_hash(params, 0, tree.layers[0][z]) for z in range(4))
    assert sym == expect and len(sym) == 4 * y


def test_all_positions_prove_and_verify():
    tree, _ = small_tree()
    params = tree.params
    for layer in range(params.n_layers):
        for idx in range(params.layer_length(layer)):
            proof = cmt.cmt_prove_at(tree, layer, idx)
            assert cmt.cmt_verify_at(tree.root, layer, idx,
                                     tree.layers[layer][idx], proof, params)


def test_verify_rejects_wrong_inputs():
    tree, _ = small_tree()
    params = tree.params
    proof = cmt.cmt_prove(tree, 5)
    sym = tree.layers[0][5]
    assert not cmt.cmt_verify(tree.root, 5, sym + b"x", proof, params)
    assert not cmt.cmt_verify(tree.root, 6, tree.layers[0][6], proof, params)
    other, _ = small_tree(seed=3, data_seed=1)
    assert not cmt.cmt_verify(other.root, 5, sym, proof, params)
    # tampered sibling digest
    lvl = proof.levels[0]
    bad_lvl = cmt.ProofLevel((b"\x00" * params.digest_bytes,) + lvl.sibling_hashes[1:],
                             lvl.parity_hashes)
    bad = cmt.CmtProof(5, (bad_lvl,) + proof.levels[1:], 0)
    assert not cmt.cmt_verify(tree.root, 5, sym, bad, params)


def test_proof_size_formula():
    tree, _ = small_tree()
    params = tree.params
    y, b, rate = params.digest_bytes, params.batch, params.rate
    per_level = y * (b - 1) + int(y * b * (1 - rate))
    assert cmt.proof_level_bytes(params, 0) == per_level
    assert cmt.proof_size_bytes(params) == per_level * (params.n_layers - 1)
    proof = cmt.cmt_prove(tree, 0)
    payload = sum(
        sum(map(len, lvl.sibling_hashes)) + sum(map(len, lvl.parity_hashes))
        for lvl in proof.levels
    )
    assert payload == cmt.proof_size_bytes(params)


def test_proof_serialization_roundtrip():
    tree, _ = small_tree()
    params = tree.params
    for idx in (0, 7, 31):
        proof = cmt.cmt_prove(tree, idx)
        blob = cmt.proof_to_bytes(proof, params)
        again = cmt.proof_from_bytes(blob)
        assert again == proof
        assert cmt.cmt_verify(tree.root, idx, tree.layers[0][idx], again, params)
    with pytest.raises(ParameterError):
        cmt.proof_from_bytes(b"nope" + blob)


def test_tree_serialization_roundtrip(tmp_path):
    tree, _ = small_tree()
    blob = cmt.tree_to_bytes(tree)
    again = cmt.tree_from_bytes(blob)
    assert again.root == tree.root
    assert again.layers == tree.layers
    assert again.params.batch == tree.params.batch
    assert [c.rows for c in again.params.layer_codes] == \
           [c.rows for c in tree.params.layer_codes]
    with pytest.raises(ParameterError):
        cmt.tree_from_bytes(b"XXXX" + blob[4:])


def test_debug_json_forms():
    tree, _ = small_tree()
    obj = cmt.tree_debug_json(tree)
    assert obj["root"] == [d.hex() for d in tree.root]
    proof = cmt.cmt_prove(tree, 2)
    pj = cmt.proof_debug_json(proof)
    assert pj["leaf_index"] == 2 and len(pj["levels"]) == 2


def test_witness_prove_requires_known_symbols():
    tree, _ = small_tree()
    params = tree.params
    partial = [list(layer) for layer in tree.layers]
    partial[0][1] = None
    with pytest.raises(cmt.MissingWitnessError):
        cmt.witness_prove_at(partial, params, 0, 0)   # sibling 1 unknown
    proof = cmt.witness_prove_at(partial, params, 0, 12)
    assert cmt.cmt_verify(tree.root, 12, tree.layers[0][12], proof, params)


def test_plain_merkle_roundtrip_and_padding():
    data = [bytes([i]) * 3 for i in range(5)]    # non-power-of-two leaf count
    root = cmt.merkle_root_plain(data)
    for i in range(5):
        path = cmt.merkle_prove_plain(data, i)
        assert cmt.merkle_verify_plain(root, i, data[i], path)
        assert not cmt.merkle_verify_plain(root, i, b"tampered", path)
    assert not cmt.merkle_verify_plain(root, 0, data[1],
                                       cmt.merkle_prove_plain(data, 0))
    with pytest.raises(ParameterError):
        cmt.merkle_prove_plain(data, 5)
    with pytest.raises(ParameterError):
        cmt.merkle_root_plain([])


def test_domain_separated_hashing():
    assert cmt.symbol_hash(small_params(), 0, b"abc") != \
           cmt.symbol_hash(small_params(), 1, b"abc")
