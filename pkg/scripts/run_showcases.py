"""Run the bundled configs and write CSV/JSON reports to an output directory.

    python3 scripts/run_showcases.py --out results/
"""

import argparse
from pathlib import Path

from cstar_stability import report
from cstar_stability.config import load_config
from cstar_stability.experiment import run_experiment

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("configs", nargs="*", help="config files (default: every file in configs/)")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [Path(p) for p in args.configs] or sorted(CONFIG_DIR.glob("*.json"))
    for path in paths:
        art = run_experiment(load_config(path))
        for fmt in ("csv", "json"):
            report.emit_report(art, fmt, out / f"{path.stem}.{fmt}")
        st = art.stabilization
        rate = "n/a" if st.rate is None else f"{st.rate:.10f}"
        status = "ok" if not art.violations else "violations: " + ", ".join(art.violations)
        print(f"{path.stem:22s} cauchy={st.cauchy_step:.2e} rate={rate} "
              f"uniqueness={art.uniqueness:.2e}  {status}")


if __name__ == "__main__":
    main()
