"""Independent derivation of the frozen expected values in
tests/support/frozen_values.hpp. Uses only the Python standard library and
straight-line formulas; rerun and diff after changing a definition."""
import math
import struct


def softmax(xs):
    m = max(xs)
    e = [math.exp(x - m) for x in xs]
    s = sum(e)
    return [v / s for v in e]


def kl(p, q):
    return sum(a * math.log(max(a, 1e-8) / max(b, 1e-8)) for a, b in zip(p, q) if a > 0)


def gaussian(sigma):
    r = math.ceil(3 * sigma)
    k = [math.exp(-(x * x) / (2 * sigma * sigma)) for x in range(-r, r + 1)]
    s = sum(k)
    return [v / s for v in k]


def sobel_center_of_column_ramp():
    img = [[n for n in range(3)] for _ in range(3)]
    gx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
    gy = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]
    sx = sum(gx[i][j] * img[i][j] for i in range(3) for j in range(3))
    sy = sum(gy[i][j] * img[i][j] for i in range(3) for j in range(3))
    return sx, sy, math.hypot(sx, sy)


def ealt_1x1_u8(value):
    return b"EALT" + struct.pack("<HBB", 1, 0, 2) + struct.pack("<II", 1, 1) + bytes([value])


phi = softmax([0.9 * 1.0, 0.1 * 1.0])
ed = kl([0.9, 0.1], phi)
g1 = gaussian(1.0)
sx, sy, mag = sobel_center_of_column_ramp()
blob = ealt_1x1_u8(7)

print("#pragma once")
print("// Generated by tests/oracles/derive_values.py; do not edit by hand.")
print("namespace frozen {")
print(f"inline constexpr double kPhiFirst = {phi[0]!r};")
print(f"inline constexpr double kPhiSecond = {phi[1]!r};")
print(f"inline constexpr double kDivergence = {ed!r};")
print(f"inline constexpr double kLn2 = {math.log(2)!r};")
print(f"inline constexpr double kSobelGx = {float(sx)!r};")
print(f"inline constexpr double kSobelGy = {float(sy)!r};")
print(f"inline constexpr double kSobelMagnitude = {mag!r};")
print("inline constexpr double kGaussianSigma1[] = {" + ", ".join(repr(v) for v in g1) + "};")
print("inline constexpr unsigned char kEalt1x1U8Seven[] = {" + ", ".join(f"0x{b:02x}" for b in blob) + "};")
print(f"inline constexpr unsigned kEalt1x1U8Size = {len(blob)};")
print("// Seed set on the default synthetic set: one whole 64x64 image out of 24 pool images.")
print(f"inline constexpr double kDefaultSeedFraction = {1 / 24!r};")
print("}  // namespace frozen")
