"""Rewrite the golden outputs used by tests/test_cli.py."""

import sys
from pathlib import Path

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE.parent))

from test_cli import CASES, invoke  # noqa: E402

MONTE_CARLO = ("simulate", "decompose", "bessel")


def main():
    for name, args in sorted(CASES.items()):
        formats = ["json"] + (["csv"] if args[0] in MONTE_CARLO else [])
        for fmt in formats:
            status, out, err = invoke(args + ["--format", fmt])
            if status != 0:
                raise SystemExit(f"{name}: exit {status}\n{err}")
            (HERE / f"{name}.{fmt}").write_text(out)
            print(f"wrote {name}.{fmt}")


if __name__ == "__main__":
    main()
