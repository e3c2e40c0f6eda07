#!/usr/bin/env python3
"""Independent Threefry-2x64-20 reference implementation.

Written directly from the published algorithm description (Salmon,
Moraes, Dror, Shaw, "Parallel random numbers: as easy as 1, 2, 3",
SC'11): 20 rounds, rotation schedule {16,42,12,31,16,32,24,21}
repeating with period 8, Skein parity constant 0x1BD11BDAA9FC1A22,
subkey injection after every 4th round with the Threefish schedule
  x0 += ks[s % 3]; x1 += ks[(s+1) % 3] + s
for injection counter s = 1, 2, ... (s = 0 is the initial injection).

Cross-checks the values frozen in tests/test_randgen.cpp:
 1. the raw block function against the Random123 known-answer vectors,
 2. the stream pipeline (uniform mapping, Box-Muller) end to end.
"""
import math

MASK = (1 << 64) - 1
PARITY = 0x1BD11BDAA9FC1A22
ROT = [16, 42, 12, 31, 16, 32, 24, 21]


def rotl(x, r):
    return ((x << r) | (x >> (64 - r))) & MASK


def threefry2x64_20(key, ctr):
    ks = [key[0], key[1], PARITY ^ key[0] ^ key[1]]
    x0 = (ctr[0] + ks[0]) & MASK
    x1 = (ctr[1] + ks[1]) & MASK
    for r in range(20):
        x0 = (x0 + x1) & MASK
        x1 = rotl(x1, ROT[r % 8])
        x1 ^= x0
        if r % 4 == 3:
            s = r // 4 + 1
            x0 = (x0 + ks[s % 3]) & MASK
            x1 = (x1 + ks[(s + 1) % 3] + s) & MASK
    return x0, x1


print("== raw block known-answer vectors (Random123 kat_vectors format) ==")
cases = [
    ((0, 0), (0, 0)),
    ((MASK, MASK), (MASK, MASK)),
    ((0xA4093822299F31D0, 0x082EFA98EC4E6C89),
     (0x243F6A8885A308D3, 0x13198A2E03707344)),
]
for key, ctr in cases:
    o0, o1 = threefry2x64_20(key, ctr)
    print(f"key=({key[0]:016x},{key[1]:016x}) ctr=({ctr[0]:016x},{ctr[1]:016x})"
          f" -> {o0:016x} {o1:016x}")


class Stream:
    """Mirror of the C++ RngStream contract: key = (seed, stream_id),
    counter = (word_position >> 1, substream), word index = position & 1."""

    def __init__(self, seed, stream_id, sub=0):
        self.key = (seed, stream_id)
        self.sub = sub
        self.pos = 0

    def substream(self, b):
        return Stream(self.key[0], self.key[1], b + 1)

    def next_u64(self):
        block = threefry2x64_20(self.key, (self.pos >> 1, self.sub))
        w = block[self.pos & 1]
        self.pos += 1
        return w

    def next_unit(self):
        return ((self.next_u64() >> 11) + 1) * 2.0 ** -53

    def normal_pair(self):
        u1 = self.next_unit()
        u2 = self.next_unit()
        r = math.sqrt(-2.0 * math.log(u1))
        th = 6.283185307179586476925286766559 * u2
        return r * math.cos(th), r * math.sin(th)


print("\n== stream pipeline, seed=42 stream_id=7 ==")
s = Stream(42, 7)
words = [s.next_u64() for _ in range(4)]
for i, w in enumerate(words):
    print(f"word[{i}] = 0x{w:016x} = {w}")

s = Stream(42, 7)
print("next_unit[0] =", repr(s.next_unit()))
s = Stream(42, 7)
a, b = s.normal_pair()
print("normal_pair  =", repr(a), repr(b))

print("\n== substream(0) of (42, 7) differs from parent ==")
t = Stream(42, 7).substream(0)
print("sub word[0]  = 0x%016x" % t.next_u64())

print("\n== uniform mapping edge values ==")
print("u64=0   -> ", repr((0 + 1) * 2.0 ** -53))
print("u64=max -> ", repr(((MASK >> 11) + 1) * 2.0 ** -53))
