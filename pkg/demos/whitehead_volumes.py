"""
Volumes of the Whitehead fillings (1, l), l odd, approaching the volume
of the unfilled link complement.
"""
from dehncan.whitehead import solve, unfilled_volume

V = unfilled_volume()
print(f"unfilled {V:.12f}")
print(f"{'l':>4} {'N':>4} {'volume':>16} {'deficit':>12} {'min margin':>12}")
for l in range(3, 42, 4):  # noqa: E741
    r = solve((1, l))
    print(f"{l:>4} {r.setup.path.N:>4} {r.volume:16.12f} {V - r.volume:12.4e} "
          f"{float(r.min_margin):12.3e}")
