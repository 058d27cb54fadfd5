"""Figure rendering for report runs.

Every CLI report writes its delimited data and a matching PNG next to it.
All functions take a path and return it, so callers can log what was
written.  The Agg backend is forced: runs are headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_map(f, path, n: int = 2048):
    """Two panels: branch values and the derivative, split at the breakpoint."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    for lo, hi, branch in ((0.0, f.a, 1), (f.a, 1.0, 2)):
        xs = np.linspace(lo, hi, n // 2)
        ax0.plot(xs, f.eval_branch(branch, xs), color="C0")
        ax1.plot(xs, f.deriv_branch(branch, xs), color="C1")
    ax0.axvline(f.a, color="gray", lw=0.6, ls=":")
    ax1.axvline(f.a, color="gray", lw=0.6, ls=":")
    ax1.axhline(1.0, color="gray", lw=0.6)
    ax0.set_xlabel("x")
    ax0.set_ylabel("f(x)")
    ax1.set_xlabel("x")
    ax1.set_ylabel("f'(x)")
    return _finish(fig, path)


def plot_density(profile, path, n: int = 2048):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    xs = np.linspace(0.0, 1.0, n)
    ax0.plot(xs, profile.density(xs), color="C0")
    ax0.axhline(1.0, color="gray", lw=0.6)
    ax0.set_xlabel("x")
    ax0.set_ylabel("density")
    ax1.plot(xs, profile.cumulative(xs), color="C2")
    ax1.set_xlabel("x")
    ax1.set_ylabel("cumulative mass")
    return _finish(fig, path)


def plot_invariance(xs, target, pushed, path):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    ax0.plot(xs, target, label="density", color="C0")
    ax0.plot(xs, pushed, label="pushed forward", color="C3", ls="--", lw=0.9)
    ax0.legend(fontsize=8)
    ax0.set_xlabel("x")
    resid = np.abs(np.asarray(pushed) - np.asarray(target))
    ax1.semilogy(xs, np.maximum(resid, 1e-18), color="C3", lw=0.8)
    ax1.set_xlabel("x")
    ax1.set_ylabel("|push - density|")
    return _finish(fig, path)


def plot_distortion(report, path):
    rows = report.rows()
    ks = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    for idx, label, style in ((1, "distortion", "o-"), (2, "witness pair", "s--"), (3, "growth floor", "^:")):
        vals = [r[idx] for r in rows]
        if not all(np.isnan(v) for v in vals):
            ax.plot(ks, vals, style, label=label, ms=4)
    ax.set_xlabel("iterate order k")
    ax.set_ylabel("log-derivative spread")
    ax.set_title(f"verdict: {report.verdict}")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_dini_trace(ks, partial_sums, path, verdict=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    mask = partial_sums > 0
    ax.semilogx(np.asarray(ks)[mask], np.asarray(partial_sums)[mask], color="C0", lw=1.0)
    ax.set_xlabel("k")
    ax.set_ylabel("partial geometric sum")
    if verdict:
        ax.set_title(verdict)
    return _finish(fig, path)


def plot_residual_history(history, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(np.arange(1, len(history) + 1), np.maximum(history, 1e-18), "o-", ms=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("successive sup distance")
    return _finish(fig, path)
