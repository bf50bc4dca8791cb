"""Pure-numpy processing-element semantics.

This is the reference implementation of one compute cycle over all 160
column lanes.  The compiled extension in ``_core.pyx`` must match it
bit for bit; ``tests/test_engine_parity.py`` enforces that.

State arrays are shared with the block object: ``mem`` is the 128x160
bit grid, ``carry`` and ``mask`` are the 160 per-lane latches, all uint8
holding 0/1.
"""

import numpy as np

from ..errors import IllegalSelectError

NAME = "pure"

_W1_SUM, _W1_DATA, _W1_RIGHT = 0, 1, 2
_W2_CARRY, _W2_DATA, _W2_LEFT = 0, 1, 2


def step(mem, carry, mask, word, chain_in_left=0, chain_in_right=0):
    """Execute one encoded instruction; returns (chain_out_left, chain_out_right).

    The chain outputs are the port-A read bits of the two corner lanes,
    sampled before the write commits.
    """
    src1 = word & 0x7F
    src2 = word >> 7 & 0x7F
    dst = word >> 14 & 0x7F
    tt = word >> 21 & 0xF
    predicate = word >> 25 & 3
    w1 = word >> 27 & 3
    w2 = word >> 29 & 3
    wps1 = word >> 31 & 1
    c_en = word >> 33 & 1
    c_rst = word >> 34 & 1
    m_en = word >> 35 & 1
    b_inv = word >> 36 & 1

    a = mem[src1]
    b = mem[src2]
    out_left = int(a[0])
    out_right = int(a[-1])

    bs = b ^ b_inv if b_inv else b
    c = np.zeros_like(carry) if c_rst else carry
    t = (tt >> (2 * a + b).astype(np.uint8)).astype(np.uint8) & 1
    s = t ^ c
    carry_next = (a & bs) | (c & t)

    if predicate == 0:
        p = None  # write everywhere
    elif predicate == 1:
        p = mask
    elif predicate == 2:
        p = c
    else:
        p = 1 - c

    if wps1:
        if w1 == _W1_SUM:
            v = s
        elif w1 == _W1_RIGHT:
            v = np.empty_like(a)
            v[:-1] = a[1:]
            v[-1] = chain_in_right
        else:
            raise IllegalSelectError("data-in write select during compute")
    else:
        if w2 == _W2_CARRY:
            v = carry_next
        elif w2 == _W2_LEFT:
            v = np.empty_like(a)
            v[1:] = a[:-1]
            v[0] = chain_in_left
        else:
            raise IllegalSelectError("data-in write select during compute")

    if p is None:
        mem[dst] = v
    else:
        np.copyto(mem[dst], v, where=p.astype(bool))

    if m_en:
        mask[:] = t
    if c_en:
        carry[:] = carry_next
    elif c_rst:
        carry[:] = 0
    return out_left, out_right


def run(mem, carry, mask, words):
    """Execute a chain-free program (all chain inputs read 0)."""
    for word in words:
        step(mem, carry, mask, int(word))
