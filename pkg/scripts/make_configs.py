"""Regenerate the figure spec files under configs/ (paper and desk scale)."""

from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "configs"

FIXED_POINTS = """
[histogram]
target = fixed_points
binning = linear
lo = 0
hi = 1
bins = 50
"""

RATIOS = """
[histogram]
target = ratios_A
binning = log
lo = 1
hi = 100
bins = 40
fit_min = 1
fit_max = 30

[histogram]
target = ratios_B
binning = log
lo = 1
hi = 100
bins = 40
"""

# figure -> (paper-scale days, curves); a curve is (label, strategy lines)
FIGURES = {
    "fig1": (40000, [(f"alpha{a}", f"strategy = fixed_preference\nalpha = {a}") for a in ("0", "0.3", "0.6", "0.9")]),
    "fig2": (10000, [(f"alpha{a}", f"strategy = random_preference\nalpha_abs = {a}") for a in ("0", "10", "100")]),
    "fig3": (20000, [("gamma1", "strategy = history_weighted\ngamma = 1\ndelta = 1")] + [
        (f"delta{d}_gamma{g}", f"strategy = history_weighted\ngamma = {g}\ndelta = {d}")
        for d in ("1e-5", "1", "1.1") for g in ("0.9", "0.7")
    ]),
    "fig4": (10000, [(f"alpha{a}", f"strategy = fixed_preference\nalpha = {a}") for a in ("0", "0.3", "0.6", "0.9")]),
    "fig5": (20000, [(f"alpha{a}", f"strategy = random_preference\nalpha_abs = {a}") for a in ("0", "10", "20", "50")]),
    "fig6": (15000, [
        (f"delta{d}_gamma{g}", f"strategy = history_weighted\ngamma = {g}\ndelta = {d}")
        for d in ("1e-5", "1", "1.1") for g in ("0.9", "0.8", "0.7")
    ]),
}
SCALES = {"paper": (5000, None), "desk": (1000, 2000)}


def main():
    for scale, (n_agents, desk_days) in SCALES.items():
        for fig, (days, curves) in FIGURES.items():
            out = ROOT / scale / fig
            out.mkdir(parents=True, exist_ok=True)
            tables = FIXED_POINTS + (RATIOS if fig in ("fig4", "fig5", "fig6") else "")
            for label, strategy in curves:
                name = f"{fig}_{label}"
                text = (
                    f"# {fig} curve {label}, {scale} scale\n"
                    f"name = {name}\n{strategy}\n"
                    f"n_agents = {n_agents}\nn_days = {desk_days or days}\nseed = 1\n"
                    f"output_dir = out/{scale}/{fig}\n{tables}"
                )
                (out / f"{name}.ini").write_text(text)


if __name__ == "__main__":
    main()
