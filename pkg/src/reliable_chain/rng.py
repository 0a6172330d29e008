"""Portable SplitMix64 generator.

Used for the expedited-cost draws so that generated instances can be
reproduced bit-for-bit by any implementation that follows the same recipe:
state += 0x9E3779B97F4A7C15, followed by the standard two xor-shift-multiply
mixing rounds.  Reference outputs for seed 0 are
0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform double on (0, 1] built from the top 53 bits."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53
