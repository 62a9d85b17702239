"""The harness subcommands. Each returns an exit code and writes flat files."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core import REAL, Params, real
from ..engine import (
    COLORED,
    REACHED_IMAX,
    AvailabilityIndex,
    ColoringState,
    Phase1Result,
    count_extensions,
    make_rng,
    probe_steps,
    run_phase1,
    step,
)
from ..errors import EnumerationError, ParameterError
from ..phase2 import resample_until_valid
from ..platonic.types import COL, Label, PartialEmbedding, PlatonicType, repeats_of
from ..trajectory import Trajectory, TypeSignature, default_grid
from ..verify import count_colors, format_violations, verify_partial, verify_pq
from .config import RunConfig
from .records import (
    RunRecord,
    StoredColoring,
    dumps_csv,
    dumps_history,
    dumps_index,
    read_coloring,
    write_coloring,
    write_record,
)
from .svg import line_chart

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_STUCK = 3

RETRY_STREAM = 3
SAMPLE_STREAM = 4
REPORT_TIMES = (0.25, 0.5)


def retry_seed(seed: int, attempt: int) -> int:
    """Seed for retry ``attempt`` of ``seed``; attempt 0 is the seed itself."""
    if attempt == 0:
        return seed
    state = np.random.SeedSequence([seed, RETRY_STREAM, attempt]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def _prepare_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _trajectory(params: Params) -> Optional[Trajectory]:
    try:
        return Trajectory(params)
    except (EnumerationError, ParameterError) as exc:
        log.warning("no trajectory for p=%d q=%d: %s", params.p, params.q, exc)
        return None


def _traj_columns(traj: Optional[Trajectory], params: Params, t: float) -> Tuple[float, float]:
    """|C| a(t) and |C| f_Ava(t), nan when unavailable."""
    if traj is None or not 0 <= t <= 1:
        return math.nan, math.nan
    ava = traj.ava(t)
    if t > params.t_max:
        return ava, math.nan
    return ava, params.num_colors * traj.windows(t)["f_Ava"]


# --- run ------------------------------------------------------------------------------


def run_one(cfg: RunConfig, seed: int) -> RunRecord:
    """Phase 1 (and Phase 2 in full mode) for one seed; writes the seed directory."""
    t0 = time.perf_counter()
    params = cfg.params()
    res: Optional[Phase1Result] = None
    attempts = 0
    for attempt in range(cfg.retries + 1):
        attempts = attempt + 1
        rs = retry_seed(seed, attempt)
        res = run_phase1(params, rs, probes=cfg.probes, eager_stuck=cfg.eager_stuck)
        if res.succeeded:
            break
    assert res is not None
    st = res.state
    outdir = _prepare_dir(cfg.instance_dir() / str(seed))
    (outdir / "history.txt").write_text(dumps_history(st.history))

    traj = _trajectory(params) if cfg.probes else None
    rows = []
    for m in res.metrics:
        ava, win = _traj_columns(traj, params, m.t)
        rows.append([m.i, m.t, m.uncolored, m.mean_available, m.min_available, m.max_available, ava, win])
    (outdir / "deviations.csv").write_text(
        dumps_csv(["i", "t", "uncolored", "mean_ava", "min_ava", "max_ava", "ava_traj", "ava_window"], rows)
    )
    ts = [r[1] for r in rows]
    (outdir / "plot.svg").write_text(
        line_chart(
            [("mean Ava", ts, [r[3] for r in rows]), ("|C| a(t)", ts, [r[6] for r in rows])],
            title=f"p={params.p} q={params.q} n={params.n} seed={seed}",
            x_label="t",
            y_label="available colors",
        )
    )

    partial_bad = verify_partial(st)
    rec = RunRecord(
        mode=cfg.mode,
        p=params.p,
        q=params.q,
        n=params.n,
        seed=seed,
        run_seed=res.seed,
        attempts=attempts,
        epsilon=str(params.epsilon),
        kappa=float(params.kappa),
        num_colors=params.num_colors,
        i_max=params.i_max,
        outcome=res.outcome.kind,
        step_reached=st.step,
        stuck_edge="" if res.outcome.edge is None or res.succeeded else f"{res.outcome.edge[0]}-{res.outcome.edge[1]}",
        eager_stuck=res.outcome.eager,
        colors_used=count_colors(st),
        verified="fail" if partial_bad else "pass",
        violations=len(partial_bad),
        config=cfg.lines(),
    )
    stored = StoredColoring(params.p, params.q, params.n, res.seed, "phase1", st.color.copy(), st.num_colors, 0)
    if cfg.mode == "full" and res.succeeded and not partial_bad:
        p2 = resample_until_valid(res, res.seed, max_rounds=cfg.max_rounds)
        full = p2.coloring
        rec.phase2_rounds = p2.rounds
        rec.phase2_ok = p2.ok
        rec.phase2_reason = p2.reason
        stored = StoredColoring(params.p, params.q, params.n, res.seed, "full", full.matrix.copy(), full.num_real, full.num_fresh)
        bad = verify_pq(full.matrix, params.p, params.q)
        rec.verified = "pass" if p2.ok and not bad else "fail"
        rec.violations = len(bad)
        rec.colors_used = count_colors(full.matrix)
    write_coloring(outdir / "coloring.txt", stored)
    rec.wall_time = time.perf_counter() - t0
    write_record(outdir / "record.txt", rec)
    return rec


def _map_seeds(fn, cfg: RunConfig):
    if cfg.jobs > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(cfg.seeds))) as pool:
            return list(pool.map(fn, [cfg] * len(cfg.seeds), cfg.seeds))
    return [fn(cfg, s) for s in cfg.seeds]


def run_exit_code(records: List[RunRecord]) -> int:
    if any(r.verified == "fail" for r in records):
        return EXIT_VERIFY
    if records and not any(r.reached for r in records):
        return EXIT_STUCK
    return EXIT_OK


def cmd_run(cfg: RunConfig) -> Tuple[int, List[RunRecord]]:
    if cfg.mode not in ("phase1", "full"):
        raise ParameterError(f"run needs mode phase1 or full, got {cfg.mode}")
    _prepare_dir(cfg.instance_dir())
    records = _map_seeds(run_one, cfg)
    (cfg.instance_dir() / "index.txt").write_text(dumps_index(records))
    for r in records:
        print(
            f"seed {r.seed}: {r.outcome} at step {r.step_reached}/{r.i_max}, "
            f"colors {r.colors_used}, verify {r.verified} ({r.violations} violations)"
        )
    stuck = sum(not r.reached for r in records)
    print(f"stuck rate {stuck}/{len(records)}")
    return run_exit_code(records), records


# --- concentration --------------------------------------------------------------------


def type_signature(z: PlatonicType) -> TypeSignature:
    colored = [l.color for l in z.labels.values() if l.kind == COL]
    k = int(any(c.kind == REAL for c in colored))
    return TypeSignature(z.size, len(colored), repeats_of(z), k)


def bind_root_color(z: PlatonicType, c: int) -> PlatonicType:
    """Replace the root's real color by the palette color ``c``."""
    root = real(0)
    return PlatonicType(
        z.vertices, {g: Label(l.kind, real(c)) if l.color == root else l for g, l in z.labels.items()}
    )


def tracked_types(cfg: RunConfig, params: Params) -> List[PlatonicType]:
    if cfg.ext_types == 0:
        return []
    from ..platonic.trackable import enumerate_trackable

    types = sorted((y for y in enumerate_trackable((0, 1), params) if y.size <= cfg.ext_max_s), key=lambda y: y.key())
    return types if cfg.ext_types is None else types[: cfg.ext_types]


@dataclass
class ConcentrationRun:
    seed: int
    outcome: str
    rows: List[list]
    ext_rows: List[list]


def concentration_schedule(edge_count: int, i_max: int) -> Tuple[List[int], set]:
    """Probe steps, and the subset where extensions are counted."""
    pts = set(probe_steps(edge_count, i_max))
    ext = set()
    for t in [j / 10 for j in range(1, 10)] + [0.25, 0.75]:
        i = int(round(t * edge_count))
        if i <= i_max:
            pts.add(i)
            ext.add(i)
    return sorted(pts), ext


def concentration_one(cfg: RunConfig, seed: int) -> ConcentrationRun:
    params = cfg.params()
    traj = _trajectory(params)
    types = tracked_types(cfg, params)
    st = ColoringState(params)
    index = AvailabilityIndex(st)
    rng = make_rng(seed)
    sampler = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, SAMPLE_STREAM])))
    schedule, ext_steps = concentration_schedule(st.edge_count, params.i_max)
    todo = set(schedule)
    rows, ext_rows = [], []
    outcome = REACHED_IMAX
    while True:
        if st.step in todo:
            rows.append(_ava_row(st, index, sampler, cfg.ava_samples, traj, params))
            if st.step in ext_steps:
                ext_rows += _ext_rows(st, index, sampler, types, traj, params)
        out = step(st, index, rng, cfg.eager_stuck)
        if out.kind != COLORED:
            outcome = out.kind
            break
    outdir = _prepare_dir(cfg.instance_dir() / str(seed))
    (outdir / "deviations.csv").write_text(dumps_csv(CONC_HEADER, rows))
    (outdir / "ext.csv").write_text(dumps_csv(EXT_HEADER, ext_rows))
    (outdir / "history.txt").write_text(dumps_history(st.history))
    (outdir / "plot.svg").write_text(_conc_chart(rows, f"p={params.p} q={params.q} n={params.n} seed={seed}"))
    return ConcentrationRun(seed, outcome, rows, ext_rows)


CONC_HEADER = ["i", "t", "uncolored", "sampled", "mean_ava", "min_ava", "max_ava", "ava_traj", "ava_window"]
EXT_HEADER = ["i", "t", "type", "s", "ell", "r", "k", "ext", "ext_traj", "ext_window"]


def _ava_row(st, index, sampler, cap, traj, params) -> list:
    ids = st.uncolored_ids()
    if len(ids) > cap:
        ids = sampler.choice(ids, size=cap, replace=False)
    t = st.t
    ava_traj, window = _traj_columns(traj, params, t)
    if len(ids) == 0:
        return [st.step, t, 0, 0, math.nan, math.nan, math.nan, ava_traj, window]
    avail = st.num_colors - index.counts[ids]
    return [st.step, t, st.n_unc, len(ids), float(avail.mean()), int(avail.min()), int(avail.max()), ava_traj, window]


def _ext_rows(st, index, sampler, types, traj, params) -> List[list]:
    out = []
    ids = st.uncolored_ids()
    if not types or len(ids) == 0:
        return out
    t = st.t
    for j, z in enumerate(types):
        k = int(ids[int(sampler.integers(len(ids)))])
        avail = index.available_array(k)
        if len(avail) == 0:
            continue
        c = int(avail[int(sampler.integers(len(avail)))])
        u, v = (int(x) for x in st.edges[k])
        ext = count_extensions(st, bind_root_color(z, c), PartialEmbedding({0: u, 1: v}), index)
        sig = type_signature(z)
        ext_traj = window = math.nan
        if traj is not None and t <= params.t_max:
            try:
                ext_traj = traj.ext(sig, t)
                fz = traj.windows(t, sig)["f_z"]
                window = float(params.n) ** (sig.s - 2) * float(params.num_colors) ** (-(sig.r + sig.k)) * fz
            except ParameterError:
                pass
        out.append([st.step, t, j, sig.s, sig.ell, sig.r, sig.k, ext, ext_traj, window])
    return out


def _conc_chart(rows, title: str) -> str:
    ts = [r[1] for r in rows]
    mean = [r[4] for r in rows]
    traj = [r[7] for r in rows]
    lo = [r[7] - r[8] for r in rows]
    hi = [r[7] + r[8] for r in rows]
    return line_chart(
        [("mean Ava", ts, mean), ("|C| a(t)", ts, traj), ("lower window", ts, lo), ("upper window", ts, hi)],
        title=title,
        x_label="t",
        y_label="available colors",
    )


def aggregate_concentration(runs: List[ConcentrationRun]) -> List[list]:
    """Per probe step: t, seeds seen, mean of the per-seed means, trajectory, window, relative deviation."""
    by_step: Dict[int, list] = {}
    for run in runs:
        for r in run.rows:
            if math.isfinite(r[4]):
                by_step.setdefault(r[0], []).append(r)
    out = []
    for i in sorted(by_step):
        rs = by_step[i]
        mean = float(np.mean([r[4] for r in rs]))
        t, ava, win = rs[0][1], rs[0][7], rs[0][8]
        dev = abs(mean - ava) / ava if ava and math.isfinite(ava) else math.nan
        out.append([i, t, len(rs), mean, ava, win, dev, win / ava if ava and math.isfinite(ava) else math.nan])
    return out


AGG_HEADER = ["i", "t", "seeds", "mean_ava", "ava_traj", "ava_window", "rel_deviation", "rel_window"]


def deviation_at(agg: List[list], edge_count: int, t: float) -> float:
    i = int(round(t * edge_count))
    for row in agg:
        if row[0] == i:
            return row[6]
    return math.nan


def cmd_concentration(cfg: RunConfig) -> Tuple[int, Dict[float, float]]:
    params = cfg.params()
    _prepare_dir(cfg.instance_dir())
    runs = _map_seeds(concentration_one, cfg)
    agg = aggregate_concentration(runs)
    inst = cfg.instance_dir()
    (inst / "concentration.csv").write_text(dumps_csv(AGG_HEADER, agg))
    (inst / "plot.svg").write_text(
        line_chart(
            [("mean Ava over seeds", [r[1] for r in agg], [r[3] for r in agg]),
             ("|C| a(t)", [r[1] for r in agg], [r[4] for r in agg])],
            title=f"p={params.p} q={params.q} n={params.n}, {len(runs)} seeds",
            x_label="t",
            y_label="available colors",
        )
    )
    devs = {t: deviation_at(agg, params.edge_count, t) for t in REPORT_TIMES}
    stuck = sum(r.outcome != REACHED_IMAX for r in runs)
    lines = [f"# p={params.p} q={params.q} n={params.n} colors={params.num_colors} seeds={len(runs)} stuck={stuck}"]
    lines += [f"deviation t={t} {d!r}" for t, d in devs.items()]
    (inst / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    code = EXIT_STUCK if runs and stuck == len(runs) else EXIT_OK
    return code, devs


# --- tables and checks ----------------------------------------------------------------


def cmd_lemma_suite(cfg: RunConfig) -> int:
    from ..core import MAX_ENUMERATION_P
    from ..platonic.lemmas import run_lemma_suite

    if cfg.p > MAX_ENUMERATION_P:
        raise ParameterError(f"the lemma suite enumerates types and needs p <= {MAX_ENUMERATION_P}")
    report = run_lemma_suite(
        cfg.p,
        cfg.q,
        seed=cfg.seeds[0],
        random_types=cfg.random_types,
        max_s=cfg.max_s,
        preforbidder_budget=cfg.preforbidder_budget,
        union_trials=cfg.union_trials,
        trackable_cap=cfg.trackable_cap,
    )
    text = "\n".join(report.lines()) + "\n"
    _prepare_dir(cfg.out_root)
    (cfg.out_root / f"lemma-{cfg.p}-{cfg.q}.txt").write_text(text)
    print(text, end="")
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_mu_dump(cfg: RunConfig) -> int:
    from ..core import kappa_from_mu
    from ..platonic.enumerate import mu_table_for_palette

    n = cfg.n if cfg.n is not None else max(cfg.p, 3)
    sizes = list(dict.fromkeys(cfg.palette_sizes))
    tables = [mu_table_for_palette((cfg.p, cfg.q), k) for k in sizes]
    eps = cfg.epsilon_value(n)
    from fractions import Fraction

    eps = eps if eps is not None else Fraction(1, 1000 * cfg.p**6)
    kappa = kappa_from_mu(cfg.p, cfg.q, eps, tables[0])
    _prepare_dir(cfg.out_root)
    texts = []
    for k, table in zip(sizes, tables):
        text = table.dumps(kappa)
        texts.append(text)
        (cfg.out_root / f"mu-{cfg.p}-{cfg.q}-palette{k}.txt").write_text(text)
    (cfg.out_root / f"mu-{cfg.p}-{cfg.q}.txt").write_text(texts[0])
    print(texts[0], end="")
    same = all(t == texts[0] for t in texts[1:])
    print(f"# palette sizes {','.join(map(str, sizes))}: {'identical' if same else 'DIFFER'}")
    return EXIT_OK if same else EXIT_VERIFY


TRAJ_HEADER = ["t", "a", "h", "H", "f_Ava", "f_Ext"]


def cmd_trajectory_dump(cfg: RunConfig) -> int:
    params = cfg.params()
    traj = Trajectory(params)
    rows = traj.rows(default_grid(cfg.grid_points))
    _prepare_dir(cfg.instance_dir())
    path = cfg.instance_dir() / "trajectory.csv"
    path.write_text(dumps_csv(TRAJ_HEADER, [list(r) for r in rows]))
    print(f"wrote {path} ({len(rows)} rows, t_max={params.t_max:.6g})")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    stored = read_coloring(cfg.coloring)
    if stored.phase == "full":
        bad = verify_pq(stored.matrix, stored.p, stored.q)
        lines = format_violations(bad)
    else:
        bad = verify_partial(stored.matrix, stored.p, stored.q)
        lines = [" ".join(map(str, S)) + f" {rep}>{R}" for S, rep, R in bad]
    for ln in lines:
        print(ln)
    print(
        f"# p={stored.p} q={stored.q} n={stored.n} phase={stored.phase} "
        f"colors={count_colors(stored.matrix)} violations={len(bad)}"
    )
    return EXIT_OK if not bad else EXIT_VERIFY


__all__ = [
    "EXIT_CONFIG",
    "EXIT_OK",
    "EXIT_STUCK",
    "EXIT_VERIFY",
    "bind_root_color",
    "cmd_concentration",
    "cmd_lemma_suite",
    "cmd_mu_dump",
    "cmd_run",
    "cmd_trajectory_dump",
    "cmd_verify",
    "concentration_one",
    "retry_seed",
    "run_one",
    "type_signature",
]
