# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled processing-element kernel.

Semantics are defined by engine/pure.py; this version exists to make
long instruction streams cheap (one C loop per instruction instead of a
dozen numpy dispatches).
"""

from libc.stdint cimport uint64_t

from ..errors import IllegalSelectError

NAME = "compiled"

DEF COLS = 160


cdef inline int _step(unsigned char[:, ::1] mem,
                      unsigned char[::1] carry,
                      unsigned char[::1] mask,
                      uint64_t word,
                      int chain_in_left,
                      int chain_in_right) except -1:
    cdef int src1 = word & 0x7F
    cdef int src2 = (word >> 7) & 0x7F
    cdef int dst = (word >> 14) & 0x7F
    cdef int tt = (word >> 21) & 0xF
    cdef int predicate = (word >> 25) & 3
    cdef int w1 = (word >> 27) & 3
    cdef int w2 = (word >> 29) & 3
    cdef int wps1 = (word >> 31) & 1
    cdef int c_en = (word >> 33) & 1
    cdef int c_rst = (word >> 34) & 1
    cdef int m_en = (word >> 35) & 1
    cdef int b_inv = (word >> 36) & 1

    cdef unsigned char a_buf[COLS]
    cdef unsigned char v_buf[COLS]
    cdef int i, a, b, bs, c, t, s, cn, p, v
    cdef int out_left, out_right

    if (wps1 and w1 == 1) or (not wps1 and w2 == 1):
        raise IllegalSelectError("data-in write select during compute")

    for i in range(COLS):
        a_buf[i] = mem[src1, i]
    out_left = a_buf[0]
    out_right = a_buf[COLS - 1]

    for i in range(COLS):
        a = a_buf[i]
        b = mem[src2, i]
        bs = b ^ b_inv
        c = 0 if c_rst else carry[i]
        t = (tt >> (2 * a + b)) & 1
        s = t ^ c
        cn = (a & bs) | (c & t)

        if predicate == 0:
            p = 1
        elif predicate == 1:
            p = mask[i]
        elif predicate == 2:
            p = c
        else:
            p = 1 - c

        if wps1:
            if w1 == 0:
                v = s
            else:  # from right
                v = a_buf[i + 1] if i < COLS - 1 else chain_in_right
        else:
            if w2 == 0:
                v = cn
            else:  # from left
                v = a_buf[i - 1] if i > 0 else chain_in_left

        v_buf[i] = v if p else mem[dst, i]
        if m_en:
            mask[i] = t
        if c_en:
            carry[i] = cn
        elif c_rst:
            carry[i] = 0

    for i in range(COLS):
        mem[dst, i] = v_buf[i]
    return (out_left << 1) | out_right


def step(unsigned char[:, ::1] mem, unsigned char[::1] carry,
         unsigned char[::1] mask, word, chain_in_left=0, chain_in_right=0):
    cdef int packed = _step(mem, carry, mask, <uint64_t> word,
                            <int> chain_in_left, <int> chain_in_right)
    return packed >> 1, packed & 1


def run(unsigned char[:, ::1] mem, unsigned char[::1] carry,
        unsigned char[::1] mask, uint64_t[::1] words):
    cdef Py_ssize_t k
    for k in range(words.shape[0]):
        _step(mem, carry, mask, words[k], 0, 0)
