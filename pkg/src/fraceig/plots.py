"""Optional figure rendering for experiment outputs.

Figures are written next to the delimited output when ``--plot`` is given;
nothing in the numerical pipeline depends on this module.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_experiment_figure(experiment: str, columns, rows, path: str) -> None:
    """One summary figure per experiment kind, from its CSV row dicts."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if experiment == "qcont":
        ax.semilogy([r["q"] for r in rows], [r["abs_err"] for r in rows], "o-")
        ax.set_xlabel("q")
        ax.set_ylabel("|lambda1(q) - lambda1(2)|")
        ax.set_title("Right-continuity of lambda1 at q = 2")
    elif experiment == "convergence":
        hs = [r["h"] for r in rows[:-1]]
        ds = [r["diff_to_next"] for r in rows[:-1]]
        ax.loglog(hs, ds, "o-")
        ax.set_xlabel("h")
        ax.set_ylabel("|lambda1(h) - lambda1(h/2)|")
        ax.set_title("Self-convergence under grid halving")
    elif experiment == "qscan":
        ax.plot([r["q"] for r in rows], [r["lambda_min"] for r in rows], "o-")
        ax.set_xlabel("q")
        ax.set_ylabel("min critical value")
        ax.set_title("Super-homogeneous scan")
    elif experiment == "isolation":
        ax.plot(
            [r["lambda"] for r in rows],
            [r["multiplicity"] for r in rows],
            "o",
        )
        ax.set_xlabel("critical value")
        ax.set_ylabel("multiplicity")
        ax.set_title("Critical-value clusters")
    else:  # suite and anything tabular: signed margins per audit
        names = [str(r["name"]) for r in rows]
        margins = [r["worst_margin"] for r in rows]
        ax.barh(range(len(names)), margins)
        ax.set_yticks(range(len(names)))
        ax.set_yticklabels(names, fontsize=8)
        ax.axvline(0.0, color="k", linewidth=0.8)
        ax.set_xlabel("worst margin (>= 0 passes)")
        ax.set_title("Audit margins")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
