"""Minimal static SVG line plots (ROC curves, CV fold scores).

Hand-rolled rather than pulled from a plotting library so that re-running a
command with identical inputs rewrites byte-identical figure files.
"""

from __future__ import annotations

from pathlib import Path

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 160, 50, 60

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def svg_line_plot(
    series: list[dict],
    path,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    x_range: tuple[float, float] | None = None,
    y_range: tuple[float, float] | None = None,
    diagonal: bool = False,
) -> None:
    """Write a line plot; each series is {"label", "xs", "ys", "dashed"?}."""
    if not series:
        raise ValueError("no series to plot")
    all_x = [v for s in series for v in s["xs"]]
    all_y = [v for s in series for v in s["ys"]]
    x_lo, x_hi = x_range if x_range else (min(all_x), max(all_x))
    y_lo, y_hi = y_range if y_range else (min(all_y), max(all_y))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    px_l, px_r = MARGIN_L, WIDTH - MARGIN_R
    px_t, px_b = MARGIN_T, HEIGHT - MARGIN_B
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{title}</text>',
    ]
    # Axes box and ticks.
    out.append(
        f'<rect x="{px_l}" y="{px_t}" width="{px_r - px_l}" height="{px_b - px_t}" '
        'fill="none" stroke="black" stroke-width="1"/>'
    )
    n_ticks = 5
    for i in range(n_ticks + 1):
        fx = x_lo + (x_hi - x_lo) * i / n_ticks
        px = px_l + (px_r - px_l) * i / n_ticks
        out.append(
            f'<line x1="{_fmt(px)}" y1="{px_b}" x2="{_fmt(px)}" y2="{px_b + 5}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{px_b + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(fx)}</text>'
        )
        fy = y_lo + (y_hi - y_lo) * i / n_ticks
        py = px_b - (px_b - px_t) * i / n_ticks
        out.append(
            f'<line x1="{px_l - 5}" y1="{_fmt(py)}" x2="{px_l}" y2="{_fmt(py)}" stroke="black"/>'
        )
        out.append(
            f'<text x="{px_l - 10}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(fy)}</text>'
        )
    out.append(
        f'<text x="{(px_l + px_r) // 2}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{(px_t + px_b) // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {(px_t + px_b) // 2})">{ylabel}</text>'
    )
    if diagonal:
        out.append(
            f'<line x1="{px_l}" y1="{px_b}" x2="{px_r}" y2="{px_t}" '
            'stroke="#999999" stroke-width="1" stroke-dasharray="4,4"/>'
        )
    for i, s in enumerate(series):
        xs = _scale(s["xs"], x_lo, x_hi, px_l, px_r)
        ys = _scale(s["ys"], y_lo, y_hi, px_b, px_t)
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
        color = PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="6,4"' if s.get("dashed") else ""
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        ly = px_t + 16 + 18 * i
        out.append(
            f'<line x1="{px_r + 10}" y1="{ly - 4}" x2="{px_r + 34}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"{dash}/>'
        )
        out.append(
            f'<text x="{px_r + 40}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{s["label"]}</text>'
        )
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


def write_roc_figure(curves, path, title: str = "One-vs-rest ROC curves") -> None:
    series = [
        {
            "label": f"class {c.cls} (AUC={c.auc:.2f})",
            "xs": [p[0] for p in c.points],
            "ys": [p[1] for p in c.points],
        }
        for c in curves
    ]
    svg_line_plot(
        series,
        path,
        title=title,
        xlabel="False positive rate",
        ylabel="True positive rate",
        x_range=(0.0, 1.0),
        y_range=(0.0, 1.0),
        diagonal=True,
    )


def write_cv_figure(fold_scores, mean_score, path, title: str = "Cross-validation F1 by fold") -> None:
    folds = list(range(1, len(fold_scores) + 1))
    series = [
        {"label": "fold F1", "xs": folds, "ys": list(fold_scores)},
        {"label": f"mean ({mean_score:.3f})", "xs": folds, "ys": [mean_score] * len(folds), "dashed": True},
    ]
    svg_line_plot(
        series,
        path,
        title=title,
        xlabel="Fold",
        ylabel="Macro F1",
        y_range=(min(min(fold_scores), mean_score) - 0.02, 1.0),
    )
