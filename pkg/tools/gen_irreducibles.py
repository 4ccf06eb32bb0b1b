"""Regenerate src/g2rmt/data/irreducibles.json (first primitive polynomial per (p, r))."""

import json
import pathlib

from g2rmt.ffield import find_primitive_modulus

table = {str(p): {str(r): list(find_primitive_modulus(p, r)) for r in range(2, 13)} for p in (2, 3, 5, 7)}
out = pathlib.Path(__file__).resolve().parents[1] / "src" / "g2rmt" / "data" / "irreducibles.json"
lines = []
for p, rows in table.items():
    inner = ",\n".join(f'    "{r}": {json.dumps(m)}' for r, m in rows.items())
    lines.append(f'  "{p}": {{\n{inner}\n  }}')
out.write_text("{\n" + ",\n".join(lines) + "\n}\n")
print(f"wrote {out}")
