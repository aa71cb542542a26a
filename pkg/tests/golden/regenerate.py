"""Rewrite the golden reports from the spec files next to this script.
Run only after checking that a change in the reports is intended."""

import contextlib
import io
import pathlib

from chanthermo.cli import main

HERE = pathlib.Path(__file__).parent

if __name__ == "__main__":
    for spec in sorted(HERE.glob("*.spec.json")):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(["analyze", str(spec)])
        if code != 0:
            raise SystemExit(f"{spec.name}: exit code {code}")
        spec.with_name(spec.name.replace(".spec.json", ".report.json")).write_text(buf.getvalue(), encoding="utf-8")
        print(spec.name)
