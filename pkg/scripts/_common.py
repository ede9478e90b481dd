import argparse
import json
from pathlib import Path

from ordinal_embed.harness import SHIPPED_SEED, run_identifiability_experiment
from ordinal_embed.plots import plot_report


def parser(description: str, trials: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=SHIPPED_SEED)
    p.add_argument("--threads", type=int, default=None)
    return p


def run_and_save(spec, out: str, name: str, plot: bool = True):
    rep = run_identifiability_experiment(spec)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / f"{name}.json").write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    if plot:
        plot_report(rep, path / f"{name}.svg")
    for row in rep.summary():
        err = row["recovery_error"]
        print(f"{name} size={row['size']}: median error {err['median']:.3g} "
              f"(IQR {err['iqr']:.3g}), zero-violation rate {row['zero_violation_rate']:.2f}, "
              f"failed {row['failed']}")
    return rep
