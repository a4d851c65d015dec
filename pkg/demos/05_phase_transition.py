"""
A small phase-transition sweep
===============================

Run a grid of recovery trials from ``phase_transition.cfg`` and draw the
success-rate heatmap. The same thing from the shell::

    spf run demos/phase_transition.cfg --out /tmp/pt --workers 4
    spf plot /tmp/pt/results.csv --x m --y s1
"""
import pathlib
import tempfile

from spf.experiments import load_config, render_heatmap, run_grid, success_rates, write_csv

here = pathlib.Path(__file__).parent
config = load_config(here / "phase_transition.cfg")
print(len(config.cells()), "cells x", config.trials_per_cell, "trials")

records = run_grid(config, workers=1)
for (m, s1), rate in success_rates(records, ["m", "s1"]).items():
    print(f"m = {m:4d}  s1 = {s1}  success = {rate:.2f}")

out = pathlib.Path(tempfile.mkdtemp())
write_csv(records, out / "results.csv")
render_heatmap(records, "m", "s1", out / "heatmap.svg", title="success rate")
print("wrote", out / "results.csv", "and", out / "heatmap.svg")
