//! Matplotlib scripts written next to the CSV tables they plot.

const HEADER: &str = "#!/usr/bin/env python3
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent


def load(name):
    with open(here / name, newline=\"\") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) if r[k] else float(\"nan\") for r in rows] for k in rows[0]}

";

pub fn solution(dims: usize) -> String {
    let body = if dims == 0 {
        "d = load(\"solution.csv\")
plt.plot(d[\"t\"], d[\"u\"], \"o-\", label=\"spectral\")
if \"exact\" in d:
    plt.plot(d[\"t\"], d[\"exact\"], \"k--\", label=\"exact\")
plt.xlabel(\"t\")
plt.ylabel(\"u\")
plt.legend()
"
    } else {
        "d = load(\"solution.csv\")
plt.tricontourf(d[\"t\"], d[\"x_1\"], d[\"u\"], levels=30)
plt.colorbar(label=\"u\")
plt.xlabel(\"t\")
plt.ylabel(\"x\")
"
    };
    format!("{HEADER}{body}plt.savefig(here / \"solution.png\", dpi=150)\nif \"--show\" in sys.argv:\n    plt.show()\n")
}

pub fn statistics(dims: usize) -> String {
    let body = if dims == 0 {
        "d = load(\"statistics.csv\")
m, s = d[\"mean\"], d[\"std\"]
plt.plot(d[\"t\"], m, label=\"E[u]\")
plt.fill_between(d[\"t\"], [a - b for a, b in zip(m, s)], [a + b for a, b in zip(m, s)], alpha=0.3, label=\"±σ\")
plt.xlabel(\"t\")
plt.legend()
"
    } else {
        "d = load(\"statistics.csv\")
times = sorted(set(d[\"t\"]))
for t in (times[0], times[len(times) // 2], times[-1]):
    idx = [i for i, v in enumerate(d[\"t\"]) if v == t]
    x = [d[\"x_1\"][i] for i in idx]
    m = [d[\"mean\"][i] for i in idx]
    s = [d[\"std\"][i] for i in idx]
    plt.plot(x, m, label=f\"t={t:.3f}\")
    plt.fill_between(x, [a - b for a, b in zip(m, s)], [a + b for a, b in zip(m, s)], alpha=0.25)
plt.xlabel(\"x\")
plt.ylabel(\"E[u] ± σ\")
plt.legend()
"
    };
    format!("{HEADER}{body}plt.savefig(here / \"statistics.png\", dpi=150)\nif \"--show\" in sys.argv:\n    plt.show()\n")
}

pub const CONVERGENCE: &str = "#!/usr/bin/env python3
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
with open(here / \"convergence.csv\", newline=\"\") as f:
    rows = list(csv.DictReader(f))
x = [float(r[\"value\"]) for r in rows]
for col in (\"l2_error\", \"rel_mean_vs_finest\", \"rel_std_vs_finest\"):
    pts = [(a, float(r[col])) for a, r in zip(x, rows) if r[col] and float(r[col]) > 0]
    if pts:
        plt.loglog(*zip(*pts), \"o-\", label=col)
plt.xlabel(rows[0][\"sweep\"])
plt.legend()
plt.savefig(here / \"convergence.png\", dpi=150)
if \"--show\" in sys.argv:
    plt.show()
";
