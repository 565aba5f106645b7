"""Registry of reproducible experiment presets.

Each preset is a canonical argument list for one of the data-producing
subcommands; `chaosctl repro <id>` replays it through the normal parsing
path, so a preset's output is byte-identical to running the printed flags
explicitly.

Naming: fig1/fig2 are the plain bifurcation diagrams (no y-control vs 0.9
y-control), fig3-fig7 the single-run and limit-set noise studies, fig8/fig9
the bifurcation diagrams under Bernoulli/uniform noise, fig10 the limit sets
comparing the two noise distributions under 0.9 y-control.
"""

from __future__ import annotations

_HENON = ["--map", "henon", "--a", "1.4", "--b", "0.3", "--branch", "plus"]
_LOZI = ["--map", "lozi", "--a", "1.4", "--b", "0.3", "--branch", "plus"]


def _run(base, alpha1, ell1, dist1, alpha2, ell2, x0, y0):
    return (
        ["simulate"]
        + base
        + ["--alpha1", alpha1, "--ell1", ell1, "--dist1", dist1]
        + ["--alpha2", alpha2, "--ell2", ell2, "--dist2", "bernoulli"]
        + ["--x0", x0, "--y0", y0, "--steps", "2000"]
    )


def _limits(base, alpha1, ell1, dist1, alpha2, x0, y0):
    return (
        ["limitset"]
        + base
        + ["--alpha1", alpha1, "--ell1", ell1, "--dist1", dist1]
        + ["--alpha2", alpha2, "--ell2", "0", "--dist2", "bernoulli"]
        + ["--x0", x0, "--y0", y0, "--steps", "700"]
    )


def _bif(base, rng, alpha2, ell1, dist1):
    return (
        ["bifurcation"]
        + base
        + ["--alpha-range", rng, "--alpha2", alpha2, "--ell2", "0"]
        + ["--ell1", ell1, "--dist1", dist1, "--inits", "20", "--steps", "700"]
    )


PRESETS: dict[str, list[str]] = {
    # Plain bifurcation diagrams.
    "fig1a": _bif(_HENON, "0:0.9:200", "0", "0", "bernoulli"),
    "fig1b": _bif(_HENON, "0:0.9:200", "0.9", "0", "bernoulli"),
    "fig2a": _bif(_LOZI, "0:0.9:200", "0", "0", "bernoulli"),
    "fig2b": _bif(_LOZI, "0:0.9:200", "0.9", "0", "bernoulli"),
    # Henon runs, alpha1 = 0.44, no y-control, Bernoulli noise.
    "fig3a": _run(_HENON, "0.44", "0", "bernoulli", "0", "0", "0.3", "0.1"),
    "fig3b": _run(_HENON, "0.44", "0.15", "bernoulli", "0", "0", "0.3", "0.1"),
    "fig3c": _run(_HENON, "0.44", "0.25", "bernoulli", "0", "0", "0.3", "0.1"),
    "fig3d": _run(_HENON, "0.44", "0.3", "bernoulli", "0", "0", "0.3", "0.1"),
    # Henon limit sets for the same family.
    "fig4a": _limits(_HENON, "0.44", "0.05", "bernoulli", "0", "0.3", "0.1"),
    "fig4b": _limits(_HENON, "0.44", "0.15", "bernoulli", "0", "0.3", "0.1"),
    "fig4c": _limits(_HENON, "0.44", "0.25", "bernoulli", "0", "0.3", "0.1"),
    "fig4d": _limits(_HENON, "0.44", "0.3", "bernoulli", "0", "0.3", "0.1"),
    # Lozi runs, alpha1 = 0.4, no y-control, far initial state.
    "fig5a": _run(_LOZI, "0.4", "0", "bernoulli", "0", "0", "-10", "-15"),
    "fig5b": _run(_LOZI, "0.4", "0.05", "bernoulli", "0", "0", "-10", "-15"),
    "fig5c": _run(_LOZI, "0.4", "0.1", "bernoulli", "0", "0", "-10", "-15"),
    "fig5d": _run(_LOZI, "0.4", "0.15", "bernoulli", "0", "0", "-10", "-15"),
    # Lozi limit sets for the same family.
    "fig6a": _limits(_LOZI, "0.4", "0.03", "bernoulli", "0", "-10", "-15"),
    "fig6b": _limits(_LOZI, "0.4", "0.08", "bernoulli", "0", "-10", "-15"),
    "fig6c": _limits(_LOZI, "0.4", "0.135", "bernoulli", "0", "-10", "-15"),
    "fig6d": _limits(_LOZI, "0.4", "0.145", "bernoulli", "0", "-10", "-15"),
    # Lozi runs showing the role of the second noise channel.
    "fig7a": _run(_LOZI, "0.27", "0.2", "bernoulli", "0.9", "0", "-10", "-15"),
    "fig7b": _run(_LOZI, "0.27", "0.2", "bernoulli", "0.9", "0.4", "-10", "-15"),
    "fig7c": _run(_LOZI, "0.27", "0.2", "bernoulli", "0.9", "0.5", "-10", "-15"),
    "fig7d": _run(_LOZI, "0.27", "0.2", "bernoulli", "0.9", "0.55", "-10", "-15"),
    # Henon bifurcation diagrams under noise, 0.8 y-control.
    "fig8a": _bif(_HENON, "0.3:0.6:200", "0.8", "0", "bernoulli"),
    "fig8b": _bif(_HENON, "0.3:0.6:200", "0.8", "0.2861", "bernoulli"),
    "fig8c": _bif(_HENON, "0.3:0.6:200", "0.8", "0.2861", "uniform"),
    # Lozi bifurcation diagrams under noise, 0.9 y-control.
    "fig9a": _bif(_LOZI, "0.15:0.45:200", "0.9", "0", "bernoulli"),
    "fig9b": _bif(_LOZI, "0.15:0.45:200", "0.9", "0.2", "bernoulli"),
    "fig9c": _bif(_LOZI, "0.15:0.45:200", "0.9", "0.2", "uniform"),
    # Henon limit sets comparing noise distributions, 0.9 y-control.
    "fig10a": _limits(_HENON, "0.3", "0.2861", "bernoulli", "0.9", "0.3", "0.1"),
    "fig10b": _limits(_HENON, "0.3", "0.2861", "uniform", "0.9", "0.3", "0.1"),
    "fig10c": _limits(_HENON, "0.36", "0.2861", "bernoulli", "0.9", "0.3", "0.1"),
    "fig10d": _limits(_HENON, "0.36", "0.2861", "uniform", "0.9", "0.3", "0.1"),
}
