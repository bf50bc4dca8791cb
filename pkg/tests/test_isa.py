import pytest
from hypothesis import given
from hypothesis import strategies as st

from cimbram.errors import EncodingError, RangeError
from cimbram.isa import (
    TT_XOR,
    Instruction,
    Predicate,
    W1Sel,
    W2Sel,
    decode_instruction,
    encode_instruction,
)


def test_minimal_word_sets_only_wps1_bit():
    word = encode_instruction(Instruction(0, 0, 0, 0))
    assert word == 1 << 31


def test_round_trip_named_case():
    instr = Instruction(5, 9, 20, TT_XOR, c_en=True)
    assert decode_instruction(encode_instruction(instr)) == instr


def test_round_trip_random_legal_fields():
    import random

    rnd = random.Random(1234)
    for _ in range(1000):
        wps1 = rnd.random() < 0.5
        instr = Instruction(
            src1=rnd.randrange(128),
            src2=rnd.randrange(128),
            dst=rnd.randrange(128),
            tt=rnd.randrange(16),
            predicate=Predicate(rnd.randrange(4)),
            w1_sel=W1Sel(rnd.randrange(3)),
            w2_sel=W2Sel(rnd.randrange(3)),
            wps1=wps1,
            wps2=not wps1,
            c_en=rnd.random() < 0.5,
            c_rst=rnd.random() < 0.5,
            m_en=rnd.random() < 0.5,
            b_inv=rnd.random() < 0.5,
        )
        assert decode_instruction(encode_instruction(instr)) == instr


def test_encode_rejects_row_out_of_range():
    with pytest.raises(RangeError):
        encode_instruction(Instruction(128, 0, 0, 0))


def test_encode_rejects_double_write_select():
    with pytest.raises(EncodingError):
        encode_instruction(Instruction(0, 0, 0, 0, wps1=True, wps2=True))
    with pytest.raises(EncodingError):
        encode_instruction(Instruction(0, 0, 0, 0, wps1=False, wps2=False))


def test_decode_rejects_both_wps_bits():
    word = 1 << 31 | 1 << 32
    with pytest.raises(EncodingError):
        decode_instruction(word)


def test_decode_rejects_reserved_bits():
    word = (1 << 31) | (0b111 << 37)
    with pytest.raises(EncodingError):
        decode_instruction(word)


def test_decode_rejects_undefined_write_select():
    word = (1 << 31) | (3 << 27)
    with pytest.raises(EncodingError):
        decode_instruction(word)


@given(st.integers(0, (1 << 40) - 1))
def test_decode_is_total_and_involutive(word):
    """Any 40-bit word either decodes (and then round-trips) or raises
    the encoding error; nothing else."""
    try:
        instr = decode_instruction(word)
    except EncodingError:
        return
    assert encode_instruction(instr) == word
