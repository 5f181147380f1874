"""Command-line front end.

Subcommands
-----------
estimate : read a long-format trial CSV, write the correlation estimate.
power    : marginal/conjunctive power and testing-order reports.
simulate : run replicate studies from scenario JSON, append results CSV.

Exit codes: 0 success; 2 parse/config/validation failure; 3 degenerate
data (no events or a zero-variance endpoint); 4 the correlation matrix
needed positive-semidefinite repair beyond tolerance (power still runs
and the output is flagged).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import _json
from .errors import (
    DatasetError,
    DomainError,
    InsufficientEventsError,
    NoEventsError,
    ZeroDenominatorError,
    ZeroVarianceError,
)
from .influence import correlation_matrix
from .mvn import psd_repair
from .power import (
    EndpointPlan,
    PowerSpec,
    conjunctive_power,
    marginal_power,
    optimize_hierarchy,
    sensitivity_sweep,
)
from .simulate import ScenarioConfig, run_study
from .survival import TrialDataset, build_timeline, logrank_z, validate_dataset

CSV_HEADER = "subject_id,arm,endpoint,time,status"
RESULT_COLUMNS = (
    "copula", "theta", "censoring", "n_obs", "n_sim",
    "bias", "rho_tilde", "rho_bar", "pct2_5", "pct97_5", "error",
)
PSD_TOLERANCE = 0.05


class CliError(Exception):
    """Carries the process exit code alongside the message."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# long-format CSV ingestion


def read_long_csv(path: str):
    """Parse a long-format trial CSV into column form.

    Returns (subject_ids, arms, endpoint_names, time, status) where time
    and status are dicts endpoint -> {subject_id: value}.  Raises
    CliError with a line-numbered message on the first violation.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc
    if not lines:
        raise CliError(f"{path}: line 1: empty file, expected header {CSV_HEADER!r}")
    if lines[0] != CSV_HEADER:
        raise CliError(f"{path}: line 1: header must be exactly {CSV_HEADER!r}")

    subject_ids: list[str] = []
    arms: dict[str, int] = {}
    endpoints: list[str] = []
    time: dict[str, dict[str, float]] = {}
    status: dict[str, dict[str, int]] = {}

    for lineno, row in enumerate(csv.reader(lines[1:]), start=2):
        if not row:
            continue
        if len(row) != 5:
            raise CliError(f"{path}: line {lineno}: expected 5 fields, got {len(row)}")
        subject, arm_text, endpoint, time_text, status_text = row
        if not subject:
            raise CliError(f"{path}: line {lineno}: empty subject_id")
        if arm_text not in ("0", "1"):
            raise CliError(f"{path}: line {lineno}: arm must be 0 or 1, got {arm_text!r}")
        if status_text not in ("0", "1"):
            raise CliError(f"{path}: line {lineno}: status must be 0 or 1, got {status_text!r}")
        try:
            t = float(time_text)
        except ValueError:
            raise CliError(f"{path}: line {lineno}: time {time_text!r} is not a number") from None
        if not math.isfinite(t) or t < 0:
            raise CliError(f"{path}: line {lineno}: time must be finite and >= 0, got {time_text}")
        arm = int(arm_text)
        if subject in arms:
            if arms[subject] != arm:
                raise CliError(f"{path}: line {lineno}: subject {subject!r} changes arm")
        else:
            arms[subject] = arm
            subject_ids.append(subject)
        if endpoint not in time:
            endpoints.append(endpoint)
            time[endpoint] = {}
            status[endpoint] = {}
        if subject in time[endpoint]:
            raise CliError(
                f"{path}: line {lineno}: duplicate row for subject {subject!r} endpoint {endpoint!r}"
            )
        time[endpoint][subject] = t
        status[endpoint][subject] = int(status_text)

    if not endpoints:
        raise CliError(f"{path}: line 2: no data rows")
    for endpoint in endpoints:
        for subject in subject_ids:
            if subject not in time[endpoint]:
                raise CliError(
                    f"{path}: subject {subject!r} has no row for endpoint {endpoint!r}"
                )
    return subject_ids, arms, endpoints, time, status


def _parse_composite(text: str):
    name, sep, rest = text.partition("=")
    rest = rest.strip()
    if not sep or not rest.startswith("min(") or not rest.endswith(")"):
        raise CliError(f"--composite must look like name=min(a,b), got {text!r}")
    parts = [p.strip() for p in rest[4:-1].split(",")]
    if len(parts) != 2 or not all(parts) or not name.strip():
        raise CliError(f"--composite must look like name=min(a,b), got {text!r}")
    return name.strip(), parts[0], parts[1]


def dataset_from_long(path: str, endpoints_arg: str = "all", composites=()):
    """Build a TrialDataset from a long CSV, applying --composite
    definitions and the --endpoints selection (duplicates allowed)."""
    subject_ids, arms, endpoints, time, status = read_long_csv(path)

    for spec_text in composites:
        new, a, b = _parse_composite(spec_text)
        for component in (a, b):
            if component not in time:
                raise CliError(f"composite {new!r}: unknown endpoint {component!r}")
        if new in time:
            raise CliError(f"composite {new!r} already exists in the data")
        endpoints.append(new)
        time[new], status[new] = {}, {}
        for subject in subject_ids:
            ta, tb = time[a][subject], time[b][subject]
            t = min(ta, tb)
            event = (status[a][subject] if ta <= t else 0) or (
                status[b][subject] if tb <= t else 0
            )
            time[new][subject] = t
            status[new][subject] = int(event)

    if endpoints_arg == "all":
        selected = list(endpoints)
    else:
        selected = [name.strip() for name in endpoints_arg.split(",") if name.strip()]
        if not selected:
            raise CliError("--endpoints must name at least one endpoint")
        for name in selected:
            if name not in time:
                raise CliError(f"--endpoints: unknown endpoint {name!r}")

    # repeated selections get distinct internal column labels
    labels, seen = [], {}
    for name in selected:
        seen[name] = seen.get(name, 0) + 1
        labels.append(name if seen[name] == 1 else f"{name}#{seen[name]}")

    time_arr = np.array([[time[name][s] for name in selected] for s in subject_ids])
    status_arr = np.array([[status[name][s] for name in selected] for s in subject_ids])
    data = TrialDataset(
        arm=np.array([arms[s] for s in subject_ids]),
        time=time_arr,
        status=status_arr,
        endpoint_names=tuple(labels),
        subject_ids=tuple(subject_ids),
    )
    return validate_dataset(data), selected


def write_long_csv(data: TrialDataset, path: str) -> None:
    """Inverse of read_long_csv, used to ship example datasets."""
    ids = data.subject_ids or tuple(f"S{i + 1:05d}" for i in range(data.n))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for j, endpoint in enumerate(data.endpoint_names):
            for i in range(data.n):
                writer.writerow(
                    [ids[i], int(data.arm[i]), endpoint,
                     repr(float(data.time[i, j])), int(data.status[i, j])]
                )


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(args) -> int:
    data, requested = dataset_from_long(args.input, args.endpoints, args.composite or ())
    try:
        corr = correlation_matrix(data)
        events, z_scores = [], []
        for endpoint in data.endpoint_names:
            tl = build_timeline(data, endpoint)
            events.append(int(tl.total_events))
            z_scores.append(logrank_z(data, endpoint))
    except (NoEventsError, ZeroVarianceError, ZeroDenominatorError) as exc:
        raise CliError(str(exc), code=3) from exc

    payload = {
        "schema_version": _json.SCHEMA_VERSION,
        "n": data.n,
        "endpoint_names": list(requested),
        "events_per_endpoint": events,
        "z_scores": [float(z) for z in z_scores],
        "correlation": [[float(v) for v in row] for row in corr.entries],
    }
    if args.output:
        _json.dump(payload, args.output)
    else:
        sys.stdout.write(_json.dumps(payload))
    return 0


# ---------------------------------------------------------------------------
# power


def _load_correlation_reference(path: str, names: list[str]) -> np.ndarray:
    try:
        doc = _json.load(path)
    except OSError as exc:
        raise CliError(f"cannot read correlation file {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "correlation" not in doc or "endpoint_names" not in doc:
        raise CliError(f"{path}: expected an estimate output with endpoint_names and correlation")
    their_names = list(doc["endpoint_names"])
    if sorted(their_names) != sorted(names):
        raise CliError(
            f"{path}: endpoints {their_names} do not match config endpoints {names}"
        )
    full = np.asarray(doc["correlation"], dtype=np.float64)
    idx = [their_names.index(name) for name in names]
    return full[np.ix_(idx, idx)]


def _power_spec_from_config(doc: dict, seed_override) -> tuple[PowerSpec, int]:
    if not isinstance(doc, dict):
        raise CliError("power config must be a JSON object")
    if doc.get("schema_version", _json.SCHEMA_VERSION) != _json.SCHEMA_VERSION:
        raise CliError(f"unsupported schema_version {doc.get('schema_version')!r}")
    known = {"schema_version", "endpoints", "correlation", "alpha", "primary", "seed"}
    extra = set(doc) - known
    if extra:
        raise CliError(f"unknown power config fields {sorted(extra)}")
    if "endpoints" not in doc or "correlation" not in doc:
        raise CliError("power config needs endpoints and correlation")

    plans = []
    for k, entry in enumerate(doc["endpoints"]):
        if not isinstance(entry, dict) or "name" not in entry:
            raise CliError(f"endpoints[{k}]: each endpoint needs a name")
        name = entry["name"]
        has_delta = "delta" in entry
        has_hr = "hr" in entry or "events" in entry
        if has_delta == has_hr:
            raise CliError(
                f"endpoints[{k}] ({name}): give either delta or both hr and events"
            )
        if has_delta:
            plans.append(EndpointPlan(name, float(entry["delta"])))
        else:
            if "hr" not in entry or "events" not in entry:
                raise CliError(f"endpoints[{k}] ({name}): hr and events go together")
            plans.append(EndpointPlan.from_hr(name, float(entry["hr"]), int(entry["events"])))
    names = [p.name for p in plans]

    corr_field = doc["correlation"]
    if isinstance(corr_field, str):
        corr = _load_correlation_reference(corr_field, names)
    else:
        corr = np.asarray(corr_field, dtype=np.float64)
        if corr.shape != (len(names), len(names)):
            raise CliError(
                f"correlation must be {len(names)}x{len(names)}, got {corr.shape}"
            )

    seed = int(doc.get("seed", 0)) if seed_override is None else int(seed_override)
    try:
        spec = PowerSpec(
            endpoints=tuple(plans),
            corr=corr,
            alpha=float(doc.get("alpha", 0.025)),
            primary=doc.get("primary"),
        )
    except DomainError as exc:
        raise CliError(str(exc)) from exc
    return spec, seed


def cmd_power(args) -> int:
    try:
        doc = _json.load(args.config)
    except OSError as exc:
        raise CliError(f"cannot read {args.config}: {exc.strerror}") from exc
    except ValueError as exc:
        raise CliError(f"{args.config}: invalid JSON: {exc}") from exc
    spec, seed = _power_spec_from_config(doc, args.seed)

    repaired = psd_repair(spec.corr)
    max_adjustment = float(np.max(np.abs(repaired - spec.corr)))
    beyond_tolerance = max_adjustment > PSD_TOLERANCE
    if beyond_tolerance:
        print(
            f"warning: correlation matrix needed PSD repair of {max_adjustment:.4f} "
            f"(> {PSD_TOLERANCE}); results use the repaired matrix",
            file=sys.stderr,
        )

    marginals = [marginal_power(p.delta, spec.alpha) for p in spec.endpoints]
    try:
        full_power = conjunctive_power(spec, None, seed)
    except DomainError as exc:
        raise CliError(str(exc)) from exc

    payload = {
        "schema_version": _json.SCHEMA_VERSION,
        "endpoint_names": list(spec.names),
        "primary": spec.primary,
        "alpha": spec.alpha,
        "seed": seed,
        "delta": [float(p.delta) for p in spec.endpoints],
        "marginal_power": [float(p) for p in marginals],
        "conjunctive_power": float(full_power),
        "psd_repaired": bool(max_adjustment > 1e-12),
        "max_psd_adjustment": max_adjustment,
        "psd_beyond_tolerance": beyond_tolerance,
    }

    lines = ["endpoint  delta  marginal_power"]
    for plan, power in zip(spec.endpoints, marginals):
        lines.append(f"{plan.name}  {plan.delta:.4f}  {power:.4f}")
    lines.append(f"conjunctive power (all endpoints): {full_power:.4f}")

    if args.optimize or args.exhaustive:
        if len(spec.names) < 2:
            raise CliError("--optimize needs at least two endpoints")
        result = optimize_hierarchy(spec, seed, exhaustive=args.exhaustive)
        payload["order"] = list(result.order)
        payload["stepwise_power"] = [float(p) for p in result.stepwise_power]
        payload["exhaustive"] = bool(args.exhaustive)
        steps = " -> ".join(
            f"{name} ({power:.3f})"
            for name, power in zip(result.order, result.stepwise_power)
        )
        lines.append(f"testing order: {steps}")

    if args.sensitivity:
        try:
            shifts = [float(s) for s in args.sensitivity.split(",") if s.strip()]
        except ValueError:
            raise CliError(f"--sensitivity must be a comma list of shifts, got {args.sensitivity!r}") from None
        if not shifts:
            raise CliError("--sensitivity must name at least one shift")
        rows = sensitivity_sweep(spec, shifts, seed)
        payload["sensitivity"] = [
            {
                "shift": row["shift"],
                "power": float(row["power"]),
                "order": list(row["order"]),
                "stepwise_power": [float(p) for p in row["stepwise_power"]],
            }
            for row in rows
        ]
        lines.append("sensitivity:")
        for row in rows:
            lines.append(
                f"  shift {row['shift']:+.3f}: power {row['power']:.4f}, "
                f"order {' -> '.join(row['order'])}"
            )

    print("\n".join(lines))
    if args.output:
        _json.dump(payload, args.output)
    if args.figures:
        from . import report

        report.ensure_dir(args.figures)
        report.power_figure(payload, os.path.join(args.figures, "power_hierarchy.png"))
    return 4 if beyond_tolerance else 0


# ---------------------------------------------------------------------------
# simulate


def _format_cell(value: float) -> str:
    return repr(float(value))


def cmd_simulate(args) -> int:
    try:
        doc = _json.load(args.scenario)
    except OSError as exc:
        raise CliError(f"cannot read {args.scenario}: {exc.strerror}") from exc
    except ValueError as exc:
        raise CliError(f"{args.scenario}: invalid JSON: {exc}") from exc
    scenario_docs = doc if isinstance(doc, list) else [doc]
    if not scenario_docs:
        raise CliError(f"{args.scenario}: empty scenario list")

    configs = []
    for k, entry in enumerate(scenario_docs):
        if not isinstance(entry, dict):
            raise CliError(f"{args.scenario}: scenario {k} is not a JSON object")
        entry = dict(entry)
        entry.pop("schema_version", None)
        if args.seed is not None:
            entry["seed"] = args.seed
        try:
            configs.append(ScenarioConfig.from_dict(entry))
        except (DomainError, TypeError, ValueError) as exc:
            raise CliError(f"{args.scenario}: scenario {k}: {exc}") from exc

    rows = []
    for cfg in configs:
        row = {
            "copula": cfg.copula,
            "theta": _format_cell(cfg.theta),
            "censoring": _format_cell(cfg.censor_target),
            "n_obs": str(cfg.n_obs),
            "n_sim": str(cfg.n_sim),
            "bias": "", "rho_tilde": "", "rho_bar": "",
            "pct2_5": "", "pct97_5": "", "error": "",
        }
        try:
            result = run_study(cfg, jobs=args.jobs)
        except InsufficientEventsError as exc:
            row["error"] = str(exc)
        else:
            row["bias"] = _format_cell(result.bias)
            row["rho_tilde"] = _format_cell(result.rho_tilde)
            row["rho_bar"] = _format_cell(result.rho_bar)
            row["pct2_5"] = _format_cell(result.pct_2_5)
            row["pct97_5"] = _format_cell(result.pct_97_5)
        rows.append(row)

    write_header = not os.path.exists(args.out) or os.path.getsize(args.out) == 0
    with open(args.out, "a", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        if write_header:
            writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([row[column] for column in RESULT_COLUMNS])

    if args.figures:
        from . import report

        report.ensure_dir(args.figures)
        report.study_figure(rows, os.path.join(args.figures, "study_summary.png"))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrcorr",
        description="Correlation of log-rank statistics, conjunctive power, trial simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate test-statistic correlations from a trial CSV")
    p_est.add_argument("--input", required=True, help=f"CSV with header {CSV_HEADER!r}")
    p_est.add_argument("--endpoints", default="all",
                       help="comma list of endpoints (repeats allowed), or 'all'")
    p_est.add_argument("--composite", action="append", metavar="NAME=min(A,B)",
                       help="define a composite endpoint at ingestion; repeatable")
    p_est.add_argument("--output", help="write the JSON report here instead of stdout")
    p_est.add_argument("--seed", type=int, default=None,
                       help="accepted for interface uniformity; estimation is deterministic")
    p_est.set_defaults(func=cmd_estimate)

    p_pow = sub.add_parser("power", help="marginal and conjunctive power from a config")
    p_pow.add_argument("--config", required=True, help="power config JSON")
    p_pow.add_argument("--optimize", action="store_true", help="choose the testing order greedily")
    p_pow.add_argument("--exhaustive", action="store_true",
                       help="score every order (<= 8 endpoints); implies --optimize")
    p_pow.add_argument("--sensitivity", metavar="S1,S2,...",
                       help="comma list of additive correlation shifts to sweep")
    p_pow.add_argument("--output", help="write the JSON report here")
    p_pow.add_argument("--figures", metavar="DIR", help="render figures into DIR")
    p_pow.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_pow.set_defaults(func=cmd_power)

    p_sim = sub.add_parser("simulate", help="run replicate studies from scenario JSON")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON (object or list)")
    p_sim.add_argument("--out", required=True, help="results CSV to append to")
    p_sim.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    p_sim.add_argument("--figures", metavar="DIR", help="render figures into DIR")
    p_sim.add_argument("--seed", type=int, default=None, help="override every scenario's seed")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"lrcorr: error: {exc}", file=sys.stderr)
        return exc.code
    except DatasetError as exc:
        print(f"lrcorr: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
