"""SVG rendering of explanations (per-step bars plus the odds panel)."""

from __future__ import annotations

from .explain import Explanation


def render_explanation_svg(explanation: Explanation, path: str) -> None:
    """One horizontal bar chart per step (atoms sorted by evidence, sign
    color-coded, non-salient bars dimmed, guides at the salience
    threshold) and a bottom panel showing prior + evidence = posterior."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    steps = explanation.steps
    names = explanation.class_names
    tau = explanation.config.salience_threshold
    fig, axes = plt.subplots(
        len(steps) + 1,
        1,
        figsize=(7, 2.2 * len(steps) + 2),
        gridspec_kw={"height_ratios": [3] * len(steps) + [2]},
    )
    axes = list(axes) if len(steps) + 1 > 1 else [axes]

    for ax, step in zip(axes, steps):
        pairs = sorted(
            zip(step.atom_order, step.atom_woes, step.salient), key=lambda p: p[1]
        )
        labels = [explanation.partition.atom_names[pos] for pos, _, _ in pairs]
        values = [w for _, w, _ in pairs]
        colors = ["#2b6cb0" if w >= 0 else "#c53030" for w in values]
        alphas = [1.0 if sal else 0.35 for _, _, sal in pairs]
        bars = ax.barh(range(len(values)), values, color=colors)
        for bar, alpha in zip(bars, alphas):
            bar.set_alpha(alpha)
        ax.set_yticks(range(len(values)), labels, fontsize=8)
        ax.axvline(0, color="black", linewidth=0.8)
        if tau > 0:
            ax.axvline(tau, color="gray", linewidth=0.6, linestyle=":")
            ax.axvline(-tau, color="gray", linewidth=0.6, linestyle=":")
        kept = ", ".join(names[c] for c in step.kept)
        ruled = ", ".join(names[c] for c in step.ruled_out)
        ax.set_title(f"kept: {{{kept}}}  vs  ruled out: {{{ruled}}}", fontsize=9)
        ax.set_xlabel("weight of evidence (nats)", fontsize=8)

    ax = axes[-1]
    last = steps[-1]
    posterior = last.prior_log_odds + last.total_woe
    ax.barh(
        [0, 1, 2],
        [last.prior_log_odds, last.total_woe, posterior],
        color=["#718096", "#2b6cb0", "#276749"],
    )
    ax.set_yticks([0, 1, 2], ["prior log odds", "total evidence", "posterior log odds"], fontsize=8)
    ax.axvline(0, color="black", linewidth=0.8)
    ax.set_title("final step: prior + evidence = posterior (nats)", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
