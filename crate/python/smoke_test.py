#!/usr/bin/env python3
"""Smoke test for the convtrack_py extension module.

Builds nothing itself: run `cargo build --release -p convtrack-py` first,
then `python3 python/smoke_test.py`. The script loads the cdylib straight
from the cargo target directory, tracks a synthetic sequence frame by
frame, and cross-checks the result against the one-shot OPE entry point.
"""

import importlib.util
import sys
from importlib.machinery import ExtensionFileLoader
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libconvtrack_py.so",
        root / "target" / "debug" / "libconvtrack_py.so",
        root / "target" / "release" / "libconvtrack_py.dylib",
        root / "target" / "debug" / "libconvtrack_py.dylib",
    ]
    for path in candidates:
        if path.exists():
            loader = ExtensionFileLoader("convtrack_py", str(path))
            spec = importlib.util.spec_from_loader("convtrack_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit(
        "convtrack_py library not found; build it with "
        "`cargo build --release -p convtrack-py`"
    )


def main():
    ct = load_module()

    cfg = ct.TrackerConfig()
    print(f"config: {cfg!r}")
    assert cfg.patch_size == 64
    assert abs(cfg.padding - 1.8) < 1e-12

    seq = ct.synth("translate", frames=40, seed=7)
    assert len(seq) == 40

    # frame-by-frame tracking through the Tracker class
    pixels, h, w = seq.frame(0)
    tracker = ct.Tracker(cfg, pixels, h, w, seq.ground_truth(0))
    errors = []
    overlaps = []
    for t in range(1, len(seq)):
        pixels, h, w = seq.frame(t)
        rect = tracker.step(pixels, h, w)
        gt = seq.ground_truth(t)
        errors.append(ct.center_error(rect, gt))
        overlaps.append(ct.iou(rect, gt))

    mean_err = sum(errors) / len(errors)
    mean_iou = sum(overlaps) / len(overlaps)
    print(f"tracked {len(errors)} frames: mean center error {mean_err:.2f}px, mean IoU {mean_iou:.3f}")
    assert mean_err < 5.0, f"tracking drifted: mean error {mean_err:.2f}px"
    assert mean_iou > 0.5, f"tracking overlap too low: {mean_iou:.3f}"

    # the one-shot evaluation entry point must agree with the manual loop
    metrics = ct.ope(cfg, seq)
    print(
        f"ope: precision20={metrics['precision20']:.3f} auc={metrics['auc']:.3f} "
        f"updates={metrics['updates']} fps={metrics['mean_fps']:.1f}"
    )
    assert metrics["precision20"] >= 0.95
    assert metrics["auc"] >= 0.5
    final_manual = tracker.position
    final_ope = metrics["rects"][-1]
    for a, b in zip(final_manual, final_ope):
        assert abs(a - b) < 1e-9, "manual loop and ope disagree"

    # config file text round-trips
    cfg2 = ct.TrackerConfig.from_text(cfg.to_text())
    assert cfg2.to_text() == cfg.to_text()
    cfg2.set("patch_size", "32")
    assert cfg2.patch_size == 32

    print("smoke test OK")


if __name__ == "__main__":
    main()
