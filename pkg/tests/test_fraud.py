import random

import pytest

from sparda import cmt, fraud
from sparda.codes import ParameterError, peel_pattern
from test_cmt import small_params, small_tree
from util import malicious_tree, random_block


def erase_base(tree, positions):
    words = [list(layer) for layer in tree.layers]
    for p in positions:
        words[0][p] = None
    return words


def test_decode_complete_tree():
    tree, block = small_tree()
    out = fraud.hash_aware_decode(tree.root, [list(l) for l in tree.layers],
                                  tree.params)
    assert isinstance(out, fraud.FullyDecoded)
    assert list(out.block) == block


def test_decode_with_recoverable_erasures():
    tree, block = small_tree()
    rng = random.Random(0)
    decoded_rounds = 0
    for _ in range(30):
        erased = rng.sample(range(32), rng.randint(1, 8))
        out = fraud.hash_aware_decode(tree.root, erase_base(tree, erased),
                                      tree.params)
        assert not isinstance(out, fraud.Fraud)
        if isinstance(out, fraud.FullyDecoded):
            decoded_rounds += 1
            assert list(out.block) == block
        else:
            residual = peel_pattern(tree.params.layer_codes[0], erased)
            assert out.reports[0].positions == residual
    assert decoded_rounds > 0


def test_decode_unavailable_on_hide_all():
    tree, _ = small_tree()
    out = fraud.hash_aware_decode(tree.root, erase_base(tree, range(32)),
                                  tree.params)
    assert isinstance(out, fraud.Unavailable)
    assert 0 in out.reports


def test_upper_layer_erasures_also_recovered():
    tree, block = small_tree()
    words = [list(l) for l in tree.layers]
    words[1][0] = None
    words[1][9] = None
    words[0][3] = None
    out = fraud.hash_aware_decode(tree.root, words, tree.params)
    assert isinstance(out, fraud.FullyDecoded)
    assert list(out.block) == block


def test_malicious_base_symbol_yields_verifying_parity_proof():
    params = small_params()
    block = random_block(params, seed=1)
    bad = malicious_tree(params, block, corrupt_pos=20)
    out = fraud.hash_aware_decode(bad.root, [list(l) for l in bad.layers],
                                  params)
    assert isinstance(out, fraud.Fraud)
    assert isinstance(out.proof, fraud.ParityFraudProof)
    assert fraud.verify_fraud_proof(bad.root, out.proof, params)
    # the honest root does not condemn the honest tree's data
    honest = cmt.build_cmt(block, params)
    assert not fraud.verify_fraud_proof(honest.root, out.proof, params)


def test_malicious_tree_with_erasures_caught_on_recovery():
    params = small_params()
    block = random_block(params, seed=2)
    bad = malicious_tree(params, block, corrupt_pos=5)
    rng = random.Random(3)
    caught = 0
    for _ in range(20):
        erased = set(rng.sample(range(32), 6))
        out = fraud.hash_aware_decode(bad.root, erase_base(bad, erased), params)
        assert not isinstance(out, fraud.FullyDecoded) or 5 in erased or \
            list(out.block) != block
        if isinstance(out, fraud.Fraud):
            caught += 1
            assert fraud.verify_fraud_proof(bad.root, out.proof, params)
    assert caught > 0


def test_supplied_symbol_hash_mismatch_is_hash_fraud():
    tree, _ = small_tree()
    words = [list(l) for l in tree.layers]
    words[0][4] = b"\x00" * 8
    out = fraud.hash_aware_decode(tree.root, words, tree.params)
    assert isinstance(out, fraud.Fraud)
    assert isinstance(out.proof, fraud.HashFraudProof)
    assert out.proof.index == 4
    assert fraud.verify_fraud_proof(tree.root, out.proof, tree.params)


def test_hash_fraud_on_top_layer_uses_root_directly():
    tree, _ = small_tree()
    words = [list(l) for l in tree.layers]
    words[2][3] = b"\x11" * len(words[2][3])
    out = fraud.hash_aware_decode(tree.root, words, tree.params)
    assert isinstance(out, fraud.Fraud)
    assert isinstance(out.proof, fraud.HashFraudProof)
    assert out.proof.layer == 2 and out.proof.parent_witness is None
    assert fraud.verify_fraud_proof(tree.root, out.proof, tree.params)


def test_make_parity_fraud_proof_explicit():
    params = small_params()
    block = random_block(params, seed=4)
    bad = malicious_tree(params, block, corrupt_pos=2)
    H = params.layer_codes[0]
    row = sorted(H.cols[2])[0]
    proof = fraud.make_parity_fraud_proof(bad, 0, row)
    assert fraud.verify_fraud_proof(bad.root, proof, params)
    proof2 = fraud.make_parity_fraud_proof(bad, 0, row, omitted_index=2)
    assert fraud.verify_fraud_proof(bad.root, proof2, params)
    with pytest.raises(ParameterError):
        fraud.make_parity_fraud_proof(bad, 0, row, omitted_index=999)


def test_honest_tree_never_condemned():
    tree, _ = small_tree()
    params = tree.params
    H = params.layer_codes[0]
    for row in range(0, H.n_rows, 3):
        proof = fraud.make_parity_fraud_proof(tree, 0, row)
        assert not fraud.verify_fraud_proof(tree.root, proof, params)


def test_verify_rejects_malformed_proofs():
    params = small_params()
    block = random_block(params, seed=5)
    bad = malicious_tree(params, block, corrupt_pos=7)
    out = fraud.hash_aware_decode(bad.root, [list(l) for l in bad.layers], params)
    proof = out.proof
    assert isinstance(proof, fraud.ParityFraudProof)
    # wrong row, truncated entries, tampered symbol: all rejected, no crash
    wrong_row = fraud.ParityFraudProof(proof.layer, (proof.row + 1) %
                                       params.layer_codes[0].n_rows,
                                       proof.omitted_index, proof.entries,
                                       proof.parent_witness)
    assert not fraud.verify_fraud_proof(bad.root, wrong_row, params)
    truncated = fraud.ParityFraudProof(proof.layer, proof.row,
                                       proof.omitted_index, proof.entries[:-1],
                                       proof.parent_witness)
    assert not fraud.verify_fraud_proof(bad.root, truncated, params)
    w0 = proof.entries[0]
    tampered = fraud.ParityFraudProof(
        proof.layer, proof.row, proof.omitted_index,
        (fraud.SymbolWitness(w0.index, b"\x00" * len(w0.symbol), w0.proof),)
        + proof.entries[1:],
        proof.parent_witness,
    )
    assert not fraud.verify_fraud_proof(bad.root, tampered, params)
    assert not fraud.verify_fraud_proof(bad.root, "not a proof", params)


def test_fraud_serialization_roundtrip():
    params = small_params()
    block = random_block(params, seed=6)
    bad = malicious_tree(params, block, corrupt_pos=9)
    out = fraud.hash_aware_decode(bad.root, [list(l) for l in bad.layers], params)
    blob = fraud.fraud_to_bytes(out.proof, params)
    again = fraud.fraud_from_bytes(blob)
    assert again == out.proof
    assert fraud.verify_fraud_proof(bad.root, again, params)

    tree, _ = small_tree()
    words = [list(l) for l in tree.layers]
    words[0][4] = b"\x00" * 8
    hproof = fraud.hash_aware_decode(tree.root, words, tree.params).proof
    again = fraud.fraud_from_bytes(fraud.fraud_to_bytes(hproof, tree.params))
    assert again == hproof
    with pytest.raises(ParameterError):
        fraud.fraud_from_bytes(b"bad!" + blob[4:])
    assert fraud.fraud_debug_json(again)["kind"] == "hash"
    assert fraud.fraud_debug_json(out.proof)["kind"] == "parity"


def test_decode_input_validation():
    tree, _ = small_tree()
    with pytest.raises(ParameterError):
        fraud.hash_aware_decode(tree.root, [list(l) for l in tree.layers[:-1]],
                                tree.params)
    with pytest.raises(ParameterError):
        fraud.hash_aware_decode(tree.root[:-1],
                                [list(l) for l in tree.layers], tree.params)
