import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modsum import (
    PRESETS,
    AlgorithmSpec,
    BadCheckLength,
    CodeWord,
    EmptyDataWord,
    EvenModulus,
    Family,
    InvalidSpec,
    StateConsumed,
    WrongFamily,
    checksum,
    dual_sum_checksum,
    encode_codeword,
    koopman_checksum,
    koopman_parity_checksum,
    parity_bit,
    single_sum_checksum,
    stream_finalize,
    stream_init,
    stream_update,
    verify_codeword,
)
from modsum.checksum import _koopman_fold
from modsum.faults import FaultPattern, apply_faults

import oracles

K8 = PRESETS["koopman8"]
K16 = PRESETS["koopman16"]


def koopman(m, k, block=1, seed=0):
    return AlgorithmSpec(Family.KOOPMAN, m, k, block, seed)


# --- koopman_checksum -------------------------------------------------------


@pytest.mark.parametrize(
    "data, spec, expected",
    [
        (b"\x12\x34\x56", K8, 0xC8),
        (b"\x00", K8, 0x00),
        (b"\xff\xff", K8, 0x18),
        (b"\x12\x34", K16, 0x3585),
    ],
)
def test_koopman_examples(data, spec, expected):
    assert koopman_checksum(data, spec) == expected


def test_koopman_examples_match_big_integer_oracle():
    assert oracles.koopman_direct(b"\xff\xff", 253, 8) == 0x18
    assert oracles.koopman_direct(b"\x12\x34", 65519, 16) == 0x3585


def test_koopman_errors():
    with pytest.raises(EmptyDataWord):
        koopman_checksum(b"", K8)
    with pytest.raises(WrongFamily):
        koopman_checksum(b"\x01", PRESETS["fletcher16"])
    with pytest.raises(WrongFamily):
        koopman_parity_checksum(b"\x01", K8)


def test_seed_is_xored_into_first_block():
    spec = koopman(253, 8, seed=0x5A)
    assert koopman_checksum(b"\x12\x34", spec) == koopman_checksum(b"\x48\x34", K8)


def test_generic_k_not_a_byte_multiple():
    spec = koopman(32749, 15)
    data = bytes(range(1, 40))
    assert koopman_checksum(data, spec) == oracles.koopman_direct(data, 32749, 15)


@settings(max_examples=300, deadline=None)
@given(
    data=st.binary(min_size=1, max_size=80),
    k=st.integers(4, 32),
    block=st.integers(1, 5),
    seed_frac=st.floats(0, 1, exclude_max=True),
    mod_frac=st.floats(0.5, 1),
)
def test_pipeline_equals_big_integer_mod(data, k, block, seed_frac, mod_frac):
    m = max(3, int(mod_frac * (1 << k))) | 1
    if m > 1 << k:
        m -= 2
    seed = int(seed_frac * min(1 << k, 1 << (8 * block)))
    spec = koopman(m, k, block, seed)
    assert koopman_checksum(data, spec) == oracles.koopman_direct(data, m, k, seed, block)


@settings(max_examples=200, deadline=None)
@given(data=st.binary(min_size=1, max_size=64), k=st.integers(4, 32), block=st.integers(1, 4))
def test_intermediates_stay_within_check_plus_block(data, k, block):
    m = (1 << k) - 1 if k > 1 else 3
    seen = []
    _koopman_fold(data, m, 0, block, k, observe=seen.append)
    assert max(seen) <= (1 << (k + 8 * block)) - 1


@settings(max_examples=200, deadline=None)
@given(data=st.binary(min_size=1, max_size=64), m=st.integers(3, 255).filter(lambda x: x % 2))
def test_or_and_add_forms_agree_for_byte_moduli(data, m):
    total_or = total_add = data[0] % m
    for byte in data[1:]:
        total_or = ((total_or << 8) | byte) % m
        total_add = ((total_add << 8) + byte) % m
        assert total_or == total_add


@pytest.mark.parametrize("name", ["koopman8", "koopman8-239", "koopman16", "koopman32"])
def test_single_data_bit_flips_always_change_check(name, rng):
    spec = PRESETS[name]
    for length in (1, 2, 7, 13, 64):
        data = bytes(rng.randrange(256) for _ in range(length))
        base = koopman_checksum(data, spec)
        for pos in range(8 * length):
            flipped = bytearray(data)
            flipped[pos // 8] ^= 1 << (pos % 8)
            assert koopman_checksum(bytes(flipped), spec) != base


# --- parity variant ---------------------------------------------------------


def test_parity_variant_examples():
    k16p, k8p = PRESETS["koopman16p"], PRESETS["koopman8p"]
    assert koopman_parity_checksum(b"\x00", k16p) == 0
    assert koopman_parity_checksum(b"\x01", k8p) == 0x0D
    assert koopman_parity_checksum(b"\x12\x34", k16p) == 0x682E
    assert (0x1234 << 16) % 32749 == 0x682E >> 1


@settings(max_examples=300, deadline=None)
@given(data=st.binary(min_size=1, max_size=64), name=st.sampled_from(["koopman8p", "koopman16p", "koopman32p"]), seed=st.integers(0, 255))
def test_parity_variant_matches_oracle(data, name, seed):
    spec = PRESETS[name].replace(seed=seed)
    assert koopman_parity_checksum(data, spec) == oracles.koopman_parity_direct(
        data, spec.modulus, spec.check_bits, seed
    )


def test_parity_catches_every_odd_weight_fault(rng):
    spec = PRESETS["koopman8p"]
    cw = encode_codeword(bytes(rng.randrange(256) for _ in range(4)), spec)
    n_bits = spec.code_word_bits(4)
    for _ in range(2000):
        weight = rng.choice([1, 3, 5, 7])
        pattern = FaultPattern(tuple(rng.sample(range(n_bits), weight)))
        assert not verify_codeword(apply_faults(cw, pattern, spec.check_bits), spec)


@pytest.mark.parametrize(
    "data, expected", [(b"", 0), (b"\x01", 1), (b"\xff\x0f", 0), (b"\x80\x80\x80", 1)]
)
def test_parity_bit(data, expected):
    assert parity_bit(data) == expected
    assert parity_bit(data) == oracles.popcount_parity(data)


# --- single and dual sums ---------------------------------------------------


def test_single_sum_examples():
    assert single_sum_checksum(b"\x01\x02", AlgorithmSpec("SingleSum", 253, 8)) == 3
    assert single_sum_checksum(bytes(9), AlgorithmSpec("SingleSum", 65525, 16, 4)) == 0
    assert single_sum_checksum(b"\xff\x01", AlgorithmSpec("SingleSum", 65536, 16, 2)) == 0xFF01


def test_single_sum_pads_final_block_on_the_right():
    spec = AlgorithmSpec("SingleSum", 65536, 16, 2)
    assert single_sum_checksum(b"\x01\x02\x03", spec) == 0x0102 + 0x0300


def test_dual_sum_examples():
    f255 = AlgorithmSpec("DualSum", 255, 16)
    assert dual_sum_checksum(b"\x01\x02", f255) == 0x0304
    assert dual_sum_checksum(bytes(50), f255) == 0
    assert dual_sum_checksum(b"\x01" * 256, f255) == 0x0101
    assert oracles.dual_sum_direct(b"\x01" * 256, 255, 16) == 0x0101


@settings(max_examples=300, deadline=None)
@given(data=st.binary(min_size=1, max_size=64), name=st.sampled_from(sorted(PRESETS)), seed=st.integers(0, 200))
def test_every_preset_matches_direct_oracle(data, name, seed):
    spec = PRESETS[name].replace(seed=seed)
    assert checksum(data, spec) == oracles.direct(data, spec)


# --- spec validation --------------------------------------------------------


@pytest.mark.parametrize(
    "args, exc",
    [
        (("Koopman", 254, 8), EvenModulus),
        (("KoopmanParity", 200, 8), InvalidSpec),
        (("Koopman", 257, 8), InvalidSpec),
        (("DualSum", 255, 15), InvalidSpec),
        (("DualSum", 257, 16), InvalidSpec),
        (("SingleSum", 1, 8), InvalidSpec),
        (("Koopman", 253, 3), InvalidSpec),
        (("Koopman", 253, 33), InvalidSpec),
        (("Bogus", 253, 8), InvalidSpec),
    ],
)
def test_invalid_specs_rejected(args, exc):
    with pytest.raises(exc):
        AlgorithmSpec(*args)


def test_koopman_seed_must_fit_a_block():
    with pytest.raises(InvalidSpec):
        AlgorithmSpec("Koopman", 65519, 16, 1, 0x100)
    AlgorithmSpec("Koopman", 65519, 16, 2, 0x100)


def test_presets_resolve_exactly():
    expect = {
        "koopman8": ("Koopman", 253, 8, 1),
        "koopman8-239": ("Koopman", 239, 8, 1),
        "koopman16": ("Koopman", 65519, 16, 1),
        "koopman32": ("Koopman", 4294967291, 32, 1),
        "koopman8p": ("KoopmanParity", 125, 8, 1),
        "koopman16p": ("KoopmanParity", 32749, 16, 1),
        "koopman32p": ("KoopmanParity", 2147483629, 32, 1),
        "fletcher16": ("DualSum", 255, 16, 1),
        "adler-style16": ("DualSum", 251, 16, 1),
        "d253_b4": ("DualSum", 253, 16, 4),
        "d239_b14": ("DualSum", 239, 16, 14),
        "add65525_b4": ("SingleSum", 65525, 16, 4),
    }
    assert set(expect) == set(PRESETS)
    for name, (fam, m, k, bb) in expect.items():
        s = PRESETS[name]
        assert (s.family.value, s.modulus, s.check_bits, s.block_bytes, s.seed) == (fam, m, k, bb, 0)


# --- streaming --------------------------------------------------------------


def test_stream_worked_example():
    state = stream_init(K8, b"\x12")
    stream_update(state, b"\x34")
    stream_update(state, b"\x56")
    assert stream_finalize(state) == 0xC8


def test_stream_single_update_equals_one_shot(preset_spec):
    data = bytes(range(200, 217))
    assert stream_init(preset_spec).update(data).finalize() == checksum(data, preset_spec)


def test_stream_every_split_of_1kib(preset_spec, rng):
    data = bytes(rng.randrange(256) for _ in range(1024))
    expected = checksum(data, preset_spec)
    for cut in range(0, len(data) + 1, 7 if preset_spec.block_bytes == 1 else 1):
        state = stream_init(preset_spec, data[:cut])
        assert state.update(data[cut:]).finalize() == expected


@settings(max_examples=200, deadline=None)
@given(
    data=st.binary(min_size=1, max_size=120),
    cuts=st.lists(st.integers(0, 120), max_size=6),
    name=st.sampled_from(sorted(PRESETS)),
)
def test_stream_arbitrary_chunking(data, cuts, name):
    spec = PRESETS[name]
    bounds = sorted({0, len(data), *(c for c in cuts if c <= len(data))})
    state = stream_init(spec)
    for lo, hi in zip(bounds, bounds[1:]):
        state.update(data[lo:hi])
    assert state.finalize() == checksum(data, spec)


def test_stream_state_consumed():
    state = stream_init(K8, b"\x01")
    state.finalize()
    with pytest.raises(StateConsumed):
        state.update(b"\x02")
    with pytest.raises(StateConsumed):
        state.finalize()


def test_stream_empty_is_an_error():
    with pytest.raises(EmptyDataWord):
        stream_init(K8).finalize()


def test_stream_sums_stay_reduced(rng):
    for spec in (K16, PRESETS["fletcher16"], PRESETS["d253_b4"]):
        state = stream_init(spec)
        for _ in range(50):
            state.update(bytes(rng.randrange(256) for _ in range(rng.randrange(1, 9))))
            assert state.sum < spec.modulus
            if spec.family is Family.DUAL_SUM:
                assert state.sum_b < spec.modulus


# --- code words -------------------------------------------------------------


def test_encode_examples():
    assert encode_codeword(b"\x12\x34\x56", K8).to_bytes() == b"\x12\x34\x56\xc8"
    assert encode_codeword(b"\x00", K16).check == b"\x00\x00"
    assert encode_codeword(b"\x12\x34", K16).check == b"\x35\x85"
    with pytest.raises(EmptyDataWord):
        encode_codeword(b"", K16)


def test_round_trip_and_single_bit_flips(preset_spec, rng):
    data = bytes(rng.randrange(256) for _ in range(24))
    cw = encode_codeword(data, preset_spec)
    assert verify_codeword(cw, preset_spec)
    assert CodeWord.from_bytes(cw.to_bytes(), preset_spec) == cw
    for pos in range(preset_spec.code_word_bits(len(data))):
        bad = apply_faults(cw, FaultPattern((pos,)), preset_spec.check_bits)
        assert not verify_codeword(bad, preset_spec), pos


def test_unreachable_residue_is_rejected():
    cw = encode_codeword(b"\x12\x34", K16)
    forged = CodeWord(cw.data, (65519).to_bytes(2, "big"))
    assert not verify_codeword(forged, K16)
    k16p = PRESETS["koopman16p"]
    cw = encode_codeword(b"\x12\x34", k16p)
    for par in (0, 1):
        forged = CodeWord(cw.data, ((32749 << 1) | par).to_bytes(2, "big"))
        assert not verify_codeword(forged, k16p)


def test_bad_check_length():
    with pytest.raises(BadCheckLength):
        verify_codeword(CodeWord(b"\x01", b"\x00"), K16)
    with pytest.raises(BadCheckLength):
        CodeWord.from_bytes(b"\x01\x02", K16)
