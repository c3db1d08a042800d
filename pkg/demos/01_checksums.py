"""
Computing check values
======================

Four checksum families share one ``AlgorithmSpec`` description.  This demo
computes each of them on the same bytes, checks the Koopman result against
a single big-integer reduction, and streams a message in pieces.
"""

from modsum import PRESETS, AlgorithmSpec, checksum, encode_codeword, stream_init, verify_codeword

data = b"\x12\x34\x56"

# A Koopman checksum is the data word, followed by k zero bits, reduced
# modulo M.  For three bytes and M = 253 that is 0x12345600 mod 0xFD.
k8 = PRESETS["koopman8"]
print("koopman8 check value:", hex(checksum(data, k8)))
print("direct reduction    :", hex(0x12345600 % 0xFD))

# The presets cover every recommended configuration.
for name, spec in sorted(PRESETS.items()):
    value = checksum(data, spec)
    print(f"{name:14s} {spec.family.value:14s} M={spec.modulus:<11d} -> {value:0{2 * spec.check_bytes}x}")

# Any valid combination can be built explicitly, e.g. a 15-bit Koopman sum.
k15 = AlgorithmSpec("Koopman", 32749, 15)
print("koopman15:", hex(checksum(data, k15)))

# Streaming gives the same answer however the input is chunked.
state = stream_init(PRESETS["koopman16"])
for piece in (b"\x12", b"\x34\x56", b"\x78"):
    state.update(piece)
print("streamed koopman16:", hex(state.finalize()))
print("one-shot koopman16:", hex(checksum(b"\x12\x34\x56\x78", PRESETS["koopman16"])))

# A code word is the data followed by the big-endian check bytes.
cw = encode_codeword(b"hello", PRESETS["koopman16p"])
print("code word:", cw.to_bytes().hex(), "valid:", verify_codeword(cw, PRESETS["koopman16p"]))
