"""Write the three non-uniqueness demos to a directory."""

import json
import sys
from pathlib import Path

from ordinal_embed.harness import COUNTEREXAMPLES, counterexample

if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    out.mkdir(parents=True, exist_ok=True)
    for which in COUNTEREXAMPLES:
        rep = counterexample(which)
        (out / f"{which}.json").write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
        print(f"{which}: rank data equal {rep.rank_data_equal}, residual {rep.residual:.3f} "
              f"(floor {rep.floor}), passed {rep.passed}")
