"""Phase diagram sweep over (lam, mu): global existence vs blowup.

Runs the Burgers-model sweep through the CLI machinery and renders the
outcome grid: the critical line is lam = 1 with critical strength
mu = 1 (for the 1-D model).

Run:  python demos/phase_diagram.py
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dampedflow.cli import run_sweep

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

lambdas = ["0", "0.25", "0.5", "0.75", "0.9", "1", "1.1", "1.5", "2"]
mus = ["0.25", "0.5", "0.75", "1", "1.5", "2", "3"]
cfg = {"mode": "sweep", "cell_mode": "burgers",
       "lambdas": lambdas, "mus": mus, "eps": [1e-3], "budget": 128}
_, rows = run_sweep(cfg, OUT)

grid = np.zeros((len(mus), len(lambdas)))
for lam_s, mu_s, eps, case, outcome, tb in rows:
    i, j = mus.index(mu_s), lambdas.index(lam_s)
    grid[i, j] = 1.0 if outcome.startswith("blowup") else 0.0

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.imshow(grid, origin="lower", cmap="RdYlGn_r", aspect="auto", vmin=0, vmax=1)
ax.set_xticks(range(len(lambdas)), lambdas)
ax.set_yticks(range(len(mus)), mus)
ax.set_xlabel("decay power lam")
ax.set_ylabel("strength mu")
ax.set_title("damped Burgers lifespan: green = global, red = finite")
for lam_s, mu_s, eps, case, outcome, tb in rows:
    i, j = mus.index(mu_s), lambdas.index(lam_s)
    ax.text(j, i, case[-1], ha="center", va="center", fontsize=7)
fig.tight_layout()
fig.savefig(OUT / "phase_diagram.png", dpi=110)
print(f"{len(rows)} cells; wrote {OUT / 'phase_diagram.png'} "
      f"(cell labels = case number)")
