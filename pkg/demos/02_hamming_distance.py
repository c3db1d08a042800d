"""
Where does HD=3 end?
====================

Flipping data bit ``e`` moves a Koopman check value by ``2^e mod M``.  Once
the data word is long enough for two such moves to cancel, or for one to
mimic a check-bit flip, some 2-bit faults go undetected.  The boundary is
set by ``t*``, the least ``t`` with ``2^t = +-1 (mod M)``.
"""

from modsum import PRESETS
from modsum.faults import exhaustive_undetected_count
from modsum.hd import pm1_order, rollover_report, screen_moduli

for name in ("koopman8", "koopman8-239", "koopman16", "koopman8p", "koopman16p"):
    spec = PRESETS[name]
    report = rollover_report(spec)
    print(
        f"{name:13s} M={spec.modulus:<6d} t*={pm1_order(spec.modulus):<6d} "
        f"HD={report.hd} through {report.max_hd_length_bytes} bytes"
    )

# The scan is data independent; brute force agrees.  Every 2-bit fault in
# a 12-byte word is caught with M = 253, but not at 13 bytes.
spec = PRESETS["koopman8"]
for n in (12, 13):
    undetected, total = exhaustive_undetected_count(spec, n, 2)
    print(f"M=253, {n} bytes: {undetected} of {total} two-bit patterns undetected")

# A witness is a concrete data word plus fault that slips through.
witness = rollover_report(spec).witness
cw, pattern = witness.codeword(spec)
print("witness data:", cw.data.hex(), "flipped bits:", pattern.positions, "undetected:", witness.verify(spec))

# Screening every odd 8-bit modulus shows 239 reaches furthest.
print("best 8-bit moduli:", screen_moduli(8, (128, 255)).ranking[:5])

# For 32-bit moduli the boundary is far out; the order computation finds it
# without touching data.
print("koopman32:", rollover_report(PRESETS["koopman32"]).row())
print("koopman32p:", rollover_report(PRESETS["koopman32p"]).row())
