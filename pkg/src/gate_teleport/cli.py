"""Command-line driver.

Exit codes: 0 success, 1 identity check failed, 2 usage error,
3 I/O error (unwritable or missing files), 4 reconstruction failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import campaign
from .config import RunConfig
from .core import PureState, ket, random_state, state_fidelity
from .io import CoincidenceTable, read_probabilities, write_matrix, write_probabilities
from .optics import DETECTOR_PAIRS
from .protocol import ideal_output, verify_identity
from .tomography import QPT_INPUTS, TomographyError, entanglement_witness

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO, EXIT_RECONSTRUCTION = 0, 1, 2, 3, 4
IDENTITY_TOL = 1e-12
FEATURED = "RR"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(report: dict) -> None:
    print(json.dumps(report, indent=1, sort_keys=True))


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def _prepare_out(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise CliError(f"output directory {path} is not writable: {err}", EXIT_IO) from None
    return path


def _config(args) -> RunConfig:
    try:
        cfg = RunConfig.load(args.config)
    except FileNotFoundError as err:
        raise CliError(str(err), EXIT_IO) from None
    except Exception as err:  # schema or value errors
        raise CliError(f"invalid config: {err}", EXIT_USAGE) from None
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "exact", False):
        updates["exact"] = True
    if getattr(args, "counts", None) is not None:
        if args.counts <= 0:
            raise CliError("--counts must be positive", EXIT_USAGE)
        updates["mean_counts_per_setting"] = args.counts
    if getattr(args, "out", None) is not None:
        updates["output_dir"] = Path(args.out)
    return replace(cfg, **updates)


def _target_fields(rho, target: PureState) -> dict:
    fields = {"f_s": state_fidelity(rho, target)}
    try:
        fields["entangled"] = entanglement_witness(rho, target)[1]
    except ValueError:
        fields["entangled"] = None  # witness needs a maximally entangled target
    return fields


def _state_artifact(result: campaign.StateResult) -> dict:
    return {
        "label": result.label,
        "target": {"re": result.target.amplitudes.real.tolist(), "im": result.target.amplitudes.imag.tolist()},
        "raw_min_eigenvalue": float(np.linalg.eigvalsh(result.raw).min()),
        **_target_fields(result.rho, result.target),
    }


# --- commands ----------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.inputs < 1:
        raise CliError("--inputs must be at least 1", EXIT_USAGE)
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    inputs = {label: ket(label) for label in QPT_INPUTS}
    inputs.update({f"haar_{i}": random_state(2, rng) for i in range(args.inputs)})
    deviations = {label: verify_identity(state).max_deviation for label, state in inputs.items()}
    worst = max(deviations.values())

    featured = verify_identity(ket(FEATURED))
    rr_target = PureState.from_unnormalized(ket("HR").amplitudes - ket("VL").amplitudes)
    report = {
        "inputs_checked": len(inputs),
        "max_deviation": worst,
        "worst_input": max(deviations, key=deviations.get),
        "featured_input": FEATURED,
        "featured_output_fidelity": state_fidelity(ideal_output(ket(FEATURED)), rr_target),
        "featured_branch_probabilities": {f"{m2}{m3}": p for (m2, m3), p in featured.branch_probabilities.items()},
        "passed": worst <= IDENTITY_TOL,
    }
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = _prepare_out(cfg.output_dir)
    label = cfg.input_label
    data = campaign.record(cfg.input_spec, cfg.noise_with_counts, cfg.seed, cfg.exact)
    written = []
    if cfg.exact:
        path = out / f"probabilities_{label}.csv"
        write_probabilities(data, path)
        written.append(path.name)
    else:
        for pair in DETECTOR_PAIRS:
            table = CoincidenceTable(tuple(r for r in data if r.detector_pair == pair))
            for ext, writer in (("csv", table.to_csv), ("json", table.to_json)):
                path = out / f"counts_{label}_{pair}.{ext}"
                writer(path)
                written.append(path.name)
    _write_json(out / "config.json", cfg.to_dict())
    _emit({"input_label": label, "files": written, "exact": cfg.exact})
    return EXIT_OK


def _load_tables(paths: list[Path]) -> CoincidenceTable:
    rows = []
    for p in paths:
        try:
            rows.extend(CoincidenceTable.read(p).rows)
        except OSError as err:
            raise CliError(f"cannot read {p}: {err}", EXIT_IO) from None
    return CoincidenceTable(tuple(rows))


def cmd_tomo_state(args) -> int:
    cfg = _config(args)
    out = _prepare_out(cfg.output_dir)
    label = cfg.input_label
    target = ideal_output(cfg.input_state)
    if args.files:
        paths = [Path(f) for f in args.files]
        if cfg.exact:
            data = {}
            for p in paths:
                data.update(read_probabilities(p))
        else:
            data = _load_tables(paths)
    elif cfg.exact:
        path = out / f"probabilities_{label}.csv"
        if not path.exists():
            raise CliError(f"missing {path}; run simulate --exact first", EXIT_IO)
        data = read_probabilities(path)
    else:
        paths = sorted(out.glob(f"counts_{label}_*.csv"))
        if not paths:
            raise CliError(f"no count tables for {label} in {out}; run simulate first", EXIT_IO)
        data = _load_tables(paths)

    try:
        result = campaign.reconstruct(label, target, data, cfg.detector_pair)
    except TomographyError as err:
        raise CliError(f"reconstruction failed: {err}", EXIT_RECONSTRUCTION) from None
    artifact = _state_artifact(result)
    write_matrix(result.rho, out / f"state_{label}.json", **artifact)
    _emit(artifact)
    return EXIT_OK


def cmd_tomo_process(args) -> int:
    cfg = _config(args)
    out = _prepare_out(cfg.output_dir)
    try:
        result = campaign.process_campaign(
            cfg.noise_with_counts, cfg.seed, cfg.exact, cfg.detector_pair, workers=args.workers
        )
    except TomographyError as err:
        raise CliError(f"reconstruction failed: {err}", EXIT_RECONSTRUCTION) from None
    for label, state in result.states.items():
        write_matrix(state.rho, out / f"state_{label}.json", **_state_artifact(state))
    summary = {"f_p": result.f_p, "f_bar": result.f_bar,
               "raw_min_eigenvalue": float(np.linalg.eigvalsh(result.chi.raw).min())}
    write_matrix(result.chi.elements, out / "chi.json", **summary)
    _write_json(out / "config.json", cfg.to_dict())
    _emit(summary)
    return EXIT_OK


REPORT_STATES = {"f_s_rr": "RR", "f_s_hh": "HH", "f_s_hv": "HV", "f_s_vh": "VH", "f_s_vv": "VV"}


def cmd_report(args) -> int:
    root = Path(args.dir) if args.dir else _config(args).output_dir
    if not root.is_dir():
        raise CliError(f"artifact directory {root} does not exist", EXIT_IO)
    states = {}
    for path in sorted(root.glob("state_*.json")):
        data = json.loads(path.read_text())
        states[data["label"]] = data
    chi_path = root / "chi.json"
    if not states and not chi_path.exists():
        raise CliError(f"no artifacts in {root}", EXIT_IO)

    summary: dict = {"states": {k: {"f_s": v["f_s"], "entangled": v["entangled"]} for k, v in states.items()}}
    for key, label in REPORT_STATES.items():
        if label in states:
            summary[key] = states[label]["f_s"]
    if FEATURED in states:
        summary["witness_rr_entangled"] = states[FEATURED]["entangled"]
    if chi_path.exists():
        chi = json.loads(chi_path.read_text())
        summary["f_p"] = chi["f_p"]
        summary["f_bar"] = chi["f_bar"]
    config_path = root / "config.json"
    if config_path.exists():
        summary["config"] = json.loads(config_path.read_text())
    _write_json(root / "summary.json", summary)
    _emit(summary)
    return EXIT_OK


# --- entry point -------------------------------------------------------------


def _add_run_flags(p: argparse.ArgumentParser, exact: bool = True) -> None:
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--seed", type=int, help="override the configured seed")
    if exact:
        p.add_argument("--exact", action="store_true", help="use exact probabilities instead of sampled counts")
    p.add_argument("--counts", type=float, help="mean counts per analyzer setting")
    p.add_argument("--out", type=Path, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gate-teleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check the teleportation identity on canonical and random inputs")
    p.add_argument("--inputs", type=int, default=100, help="number of Haar-random inputs")
    p.add_argument("--seed", type=int, help="seed for the random inputs")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="simulate coincidence tables for the configured input")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tomo-state", help="reconstruct the output state from coincidence tables")
    _add_run_flags(p)
    p.add_argument("files", nargs="*", help="count tables (CSV or JSON); defaults to the output dir")
    p.set_defaults(func=cmd_tomo_state)

    p = sub.add_parser("tomo-process", help="run the 16-input campaign and reconstruct chi")
    _add_run_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_tomo_process)

    p = sub.add_parser("report", help="summarize the artifacts of earlier commands")
    p.add_argument("dir", nargs="?", help="artifact directory (defaults to the configured output dir)")
    p.add_argument("--config", type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())
