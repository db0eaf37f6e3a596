"""
Write the nested-hexagon picture of a Whitehead filling cusp to an SVG file.

    python3 demos/cusp_picture.py 11 8 cusp.svg
"""
import sys

from dehncan.cli import Config, cmd_cuspview, cmd_whitehead

k, l = (int(v) for v in sys.argv[1:3]) if len(sys.argv) > 2 else (11, 8)  # noqa: E741
out = sys.argv[3] if len(sys.argv) > 3 else f"cusp_{k}_{l}.svg"
cert = cmd_whitehead(k, l, Config())
with open(out, "w", encoding="utf-8") as fh:
    fh.write(cmd_cuspview(cert))
print(f"({k},{l}) {cert['input']['parity']}, {cert['N']} layers, {cert['verdict']} -> {out}")
