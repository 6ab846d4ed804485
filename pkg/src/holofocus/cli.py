"""Command line: ``holofocus simulate | reconstruct | quadratic | evaluate``.

Failures exit non-zero and print one JSON line on stderr:
``{"error": "<kind>", "message": "..."}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, quadratic
from .config import ExperimentConfig, load_config
from .losses import CandidateSet
from .metrics import ImagePair, normalize_amplitude, psnr, ssim
from .optics import ComplexField, Hologram, OpticalConfig, synthesize_hologram, transmittance_from_image
from .samples import make_sample
from .strategies import ReconstructionAborted, StrategyKind, reconstruct, score

log = logging.getLogger("holofocus")


class CLIError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _load_sample(spec: str, size: int) -> np.ndarray:
    if spec.startswith("builtin:"):
        return make_sample(spec.split(":", 1)[1], size)
    img = io.read_image(spec)
    if img.shape != (size, size):
        raise CLIError("shape", f"sample {spec} is {img.shape}, expected ({size}, {size})")
    return img


def _config_from_args(args) -> ExperimentConfig:
    overrides = {k: v for k, v in vars(args).items()
                 if k in ExperimentConfig.__dataclass_fields__ and v is not None}
    return load_config(getattr(args, "config", None), **overrides)


def _metadata(cfg: ExperimentConfig, intensity_max: float, mean: float) -> dict:
    return {
        "wavelength": cfg.wavelength,
        "pitch": cfg.pitch,
        "grid": [cfg.size, cfg.size],
        "true_distance": cfg.z,
        "intensity_max": intensity_max,
        "intensity_mean": mean,
        "alpha": cfg.alpha,
        "phase_object": cfg.phase_object,
        "noise_std": cfg.noise_std,
        "normalize": cfg.normalize,
        "pad": cfg.pad,
        "seed": cfg.seed,
        "sample": cfg.sample,
    }


# -- simulate ------------------------------------------------------------------------

def cmd_simulate(args) -> dict:
    cfg = _config_from_args(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    img = _load_sample(cfg.sample, cfg.size)
    optical = cfg.optical
    t = transmittance_from_image(img, optical, alpha=cfg.alpha, phase_object=cfg.phase_object)
    holo = synthesize_hologram(t, cfg.z, pad=cfg.pad, noise_std=cfg.noise_std,
                               rng=np.random.default_rng(cfg.seed))
    vmax = io.write_png16(out / "hologram.png", holo.intensity)
    io.write_png16(out / "ground_truth.png", t.amplitude, vmax=1.0)
    io.write_phase_png(out / "ground_truth_phase.png", t.phase)
    meta = _metadata(cfg, vmax, float(holo.intensity.mean()))
    io.write_json(out / "hologram.json", meta)
    io.write_json(out / "manifest.json", {"command": "simulate", "config": cfg.to_dict(),
                                          "versions": io.versions()})
    return {"hologram": str(out / "hologram.png"), **meta}


def read_hologram(path: str | Path) -> tuple[Hologram, dict]:
    """Inverse of ``simulate``: the PNG plus its JSON sidecar."""
    path = Path(path)
    if path.is_dir():
        path = path / "hologram.png"
    side = path.with_suffix(".json")
    if not path.exists():
        raise CLIError("missing-file", f"no hologram at {path}")
    if not side.exists():
        raise CLIError("missing-file", f"no metadata sidecar at {side}")
    meta = io.read_json(side)
    intensity = io.read_png16(path, meta["intensity_max"])
    config = OpticalConfig(meta["wavelength"], meta["pitch"], tuple(meta["grid"]))
    return Hologram(intensity, config, meta.get("true_distance")), meta


# -- reconstruct ---------------------------------------------------------------------

def _write_result(out: Path, result, candidates: CandidateSet, truth: np.ndarray | None,
                  cfg: ExperimentConfig, meta: dict, status: str, error: str | None = None) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    io.write_csv(out / "trace.csv", result.trace_rows(), io.TRACE_COLUMNS)
    io.write_png16(out / "amplitude.png", result.object_estimate.amplitude)
    io.write_phase_png(out / "phase.png", result.object_estimate.phase)
    summary = {
        "status": status,
        "strategy": result.strategy.value,
        "predicted_distance": result.predicted_distance,
        "true_distance": candidates.true_distance,
        "candidates": list(candidates.distances),
        "epochs": result.epochs,
        "seed": result.seed,
        "wall_time": result.wall_time,
        "final_loss": float(result.totals[-1]) if result.epochs else None,
    }
    if truth is not None:
        p, s = score(result, truth)
        summary.update(psnr=p, ssim=s)
    if error:
        summary["error"] = error
    io.write_json(out / "summary.json", summary)
    io.write_json(out / "manifest.json", {"command": "reconstruct", "config": cfg.to_dict(),
                                          "hologram_metadata": meta, "versions": io.versions()})
    return summary


def cmd_reconstruct(args) -> dict:
    holo, meta = read_hologram(args.hologram)
    cfg = _config_from_args(args)
    # optics always come from the sidecar so simulate and reconstruct cannot disagree
    cfg = cfg.replace(wavelength=meta["wavelength"], pitch=meta["pitch"], size=meta["grid"][0])
    if args.z is not None and args.zmin is None and args.zmax is None:
        candidates = CandidateSet((args.z,), 0)
    else:
        candidates = cfg.candidates(meta.get("true_distance"))
    strategy = StrategyKind(cfg.strategy)
    if strategy is StrategyKind.KNOWN and candidates.true_index is None:
        raise CLIError("config", "known strategy needs the true distance on the candidate grid")
    truth_path = Path(args.hologram)
    truth_path = (truth_path if truth_path.is_dir() else truth_path.parent) / "ground_truth.png"
    truth = io.read_png16(truth_path) if truth_path.exists() else None
    out = Path(cfg.output)
    try:
        result = reconstruct(holo, candidates, strategy, holo.config, cfg.reconstruction,
                             distance_index=cfg.z_index, normalize=cfg.normalize)
    except ReconstructionAborted as exc:
        _write_result(out, exc.partial, candidates, truth, cfg, meta, "aborted", str(exc))
        raise CLIError("aborted", str(exc)) from exc
    return _write_result(out, result, candidates, truth, cfg, meta, "ok")


# -- quadratic -----------------------------------------------------------------------

def cmd_quadratic(args) -> dict:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for n in args.n:
        for seed in range(args.seeds):
            ens = quadratic.generate(n, seed)
            ground = quadratic.descend(ens, "ground", args.x0, args.iterations)
            ra = quadratic.descend(ens, "reverse_attention", args.x0, args.iterations)
            kg, kr = quadratic.compare_rates(ground, ra, args.threshold)
            if args.traces:
                for name, tr in (("ground", ground), ("reverse_attention", ra)):
                    cols = ["iteration", "x", "total"] + [f"{p}_{i}" for i in range(n)
                                                          for p in ("loss", "weight")]
                    io.write_csv(out / f"trace_n{n}_seed{seed}_{name}.csv", tr.rows(), cols)
            x_star = ens.optimum
            rows.append({
                "n": n, "seed": seed, "ground_index": ens.ground_index,
                "lipschitz": ens.lipschitz, "step_size": ra.step_size,
                "k_ground": kg, "k_reverse_attention": kr,
                "ratio": kr / kg if kg > 0 else (1.0 if kr == kg else float("inf")),
                "final_error_ground": float(np.max(np.abs(ground.final - x_star))),
                "final_error_reverse_attention": float(np.max(np.abs(ra.final - x_star))),
            })
    io.write_csv(out / "summary.csv", rows, io.QUADRATIC_SUMMARY_COLUMNS)
    io.write_json(out / "manifest.json", {"command": "quadratic", "n": args.n, "seeds": args.seeds,
                                          "iterations": args.iterations, "x0": args.x0,
                                          "threshold": args.threshold, "versions": io.versions()})
    return {"summary": str(out / "summary.csv"), "rows": len(rows)}


# -- evaluate ------------------------------------------------------------------------

def evaluate_images(reference: np.ndarray, test: np.ndarray) -> dict:
    if reference.shape != test.shape:
        raise CLIError("shape", f"shape mismatch {reference.shape} vs {test.shape}")
    pair = ImagePair(reference, test)
    return {"psnr": psnr(pair), "ssim": ssim(pair)}


def cmd_evaluate(args) -> dict:
    reference = io.read_image(args.reference)
    if args.batch:
        root = Path(args.batch)
        rows = []
        for run in sorted(p for p in root.iterdir() if (p / "amplitude.png").exists()):
            amp = io.read_image(run / "amplitude.png")
            rows.append({"run": run.name, **evaluate_images(normalize_amplitude(reference),
                                                            normalize_amplitude(amp))})
        target = Path(args.csv) if args.csv else root / "evaluation.csv"
        io.write_csv(target, rows, io.EVALUATE_COLUMNS)
        return {"csv": str(target), "rows": len(rows)}
    if not args.test:
        raise CLIError("usage", "evaluate needs a test image or --batch")
    record = evaluate_images(reference, io.read_image(args.test))
    if args.csv:
        io.write_csv(args.csv, [{"run": Path(args.test).name, **record}], io.EVALUATE_COLUMNS)
    return record


# -- argument parsing ----------------------------------------------------------------

def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--wavelength", type=float)
    p.add_argument("--pitch", type=float)
    p.add_argument("--size", type=int)
    p.add_argument("--z", type=float, help="true (simulate) or single known (reconstruct) distance")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holofocus", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize an in-line hologram from a sample image")
    _add_experiment_flags(p)
    p.add_argument("--sample", help="image path or builtin:target|cell|dendrite")
    p.add_argument("--alpha", type=float)
    p.add_argument("--phase-object", dest="phase_object", action="store_const", const=True)
    p.add_argument("--noise-std", dest="noise_std", type=float)
    p.add_argument("--pad", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="untrained reconstruction under an autofocus strategy")
    p.add_argument("hologram", help="hologram.png (with .json sidecar) or its directory")
    _add_experiment_flags(p)
    p.add_argument("--strategy", choices=[s.value for s in StrategyKind])
    p.add_argument("--zmin", type=float)
    p.add_argument("--zmax", type=float)
    p.add_argument("--zstep", type=float)
    p.add_argument("--z-index", dest="z_index", type=int, help="fixed candidate for --strategy random")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--precision", choices=["float32", "float64"])
    p.add_argument("--widths", type=lambda s: tuple(int(v) for v in s.split(",")))
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("quadratic", help="noisy-quadratic convergence sweep")
    p.add_argument("--n", type=int, nargs="+", default=[2, 5, 20, 100])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--x0", type=float, default=10.0)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--traces", action="store_true", help="also write per-seed trace CSVs")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_quadratic)

    p = sub.add_parser("evaluate", help="PSNR and SSIM of a test image against a reference")
    p.add_argument("reference")
    p.add_argument("test", nargs="?")
    p.add_argument("--batch", help="directory of run folders, each holding amplitude.png")
    p.add_argument("--csv", help="write the record(s) to this CSV")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "quadratic" and args.output is None:
        from .config import default_output_root
        args.output = str(default_output_root() / "quadratic")
    try:
        record = args.func(args)
    except CLIError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError, KeyError) as exc:
        kind = "missing-file" if isinstance(exc, FileNotFoundError) else "invalid-input"
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return 2
    print(json.dumps(record, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
