"""Stage orchestration: normalize -> canny -> plan -> assemble -> render ->
augment, plus the end-to-end dataset command.

Determinism contract: every random draw comes from a substream derived as
SeedSequence(master_seed, spawn_key=...): (sid,) for per-identity draws,
(sid, sample_idx) for per-sample draws: so worker count and scheduling
never change any output byte. Stage re-runs skip outputs that already
exist unless forced; manifests are always rewritten (they are cheap and
derive deterministically from config + seed).
"""

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import assemble as asm
from . import augment as aug
from . import edges as cn
from . import fileio, geometry, planner, render
from .config import PipelineConfig, config_hash
from .errors import CapacityError, StageError

STAGE_DIRS = {
    "normalize": "normalized",
    "canny": "edges",
    "plan": "plan",
    "assemble": "assembled",
    "render": "rendered",
    "augment": "dataset",
}


def _substream(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def _write_jsonl(path, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, separators=(",", ":"), sort_keys=True) + "\n")


def _read_jsonl(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def _sid_name(plan_index: int) -> str:
    return f"{plan_index:05d}"


# ---------------------------------------------------------------------------
# normalize

def stage_normalize(cfg: PipelineConfig, force: bool = False) -> list[dict]:
    corpus = Path(cfg.corpus_dir)
    out_root = Path(cfg.output_dir) / STAGE_DIRS["normalize"]
    try:
        sidecar = fileio.read_keypoint_sidecar(cfg.keypoints_file)
    except OSError as exc:
        raise StageError("normalize", f"cannot read keypoints: {exc}") from exc
    if not sidecar:
        raise StageError("normalize", f"no keypoint records in {cfg.keypoints_file}")

    targets = np.asarray(cfg.normalize.targets, dtype=np.float64)
    rows = []
    for rel, pts in sorted(sidecar.items()):
        parts = Path(rel).parts
        if len(parts) < 2:
            raise StageError("normalize", f"image path {rel!r} lacks an identity directory")
        src_path = corpus / rel
        if not src_path.exists():
            raise StageError("normalize", f"missing corpus image {src_path}")
        out_path = out_root / parts[0] / (Path(rel).stem + ".png")

        kp = geometry.HandKeyPoints(pts)
        transform = geometry.estimate_affine(kp, targets, cfg.normalize.reference_joints)
        if force or not out_path.exists():
            img = fileio.load_gray(src_path)
            fileio.save_gray(out_path, geometry.warp(img, transform))
        rows.append({
            "image": rel,
            "identity": parts[0],
            "gesture": Path(rel).stem,
            "output": str(out_path.relative_to(cfg.output_dir)),
            "matrix": [list(map(float, r)) for r in transform.matrix],
        })
    _write_jsonl(out_root / "manifest.jsonl", rows)
    return rows


# ---------------------------------------------------------------------------
# canny

def _canny_task(args) -> str:
    in_path, out_path, cfg_fields, force = args
    out_path = Path(out_path)
    if force or not out_path.exists():
        edge = cn.canny(fileio.load_gray(in_path), cn.CannyConfig(**cfg_fields))
        fileio.save_edge(out_path, edge)
    return str(out_path)


def stage_canny(cfg: PipelineConfig, force: bool = False, workers: int = 1) -> list[dict]:
    in_root = Path(cfg.output_dir) / STAGE_DIRS["normalize"]
    out_root = Path(cfg.output_dir) / STAGE_DIRS["canny"]
    if not in_root.is_dir():
        raise StageError("canny", f"normalized images not found under {in_root}; run normalize first")

    images = sorted(p for p in in_root.rglob("*.png"))
    if not images:
        raise StageError("canny", f"no normalized images under {in_root}")
    cfg_fields = asdict(cfg.canny)
    tasks = [
        (str(p), str(out_root / p.relative_to(in_root)), cfg_fields, force)
        for p in images
    ]
    _run_tasks(_canny_task, tasks, workers)

    rows = [
        {"input": str(Path(p).relative_to(cfg.output_dir)),
         "output": str((out_root / Path(p).relative_to(in_root)).relative_to(cfg.output_dir))}
        for p in (Path(t[0]) for t in tasks)
    ]
    _write_jsonl(out_root / "manifest.jsonl", rows)
    return rows


def _run_tasks(fn, tasks, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# ---------------------------------------------------------------------------
# plan

def _identity_dirs(edges_root: Path) -> list[str]:
    return sorted(p.name for p in edges_root.iterdir() if p.is_dir())


def stage_plan(cfg: PipelineConfig, force: bool = False) -> planner.IdentityPlan:
    edges_root = Path(cfg.output_dir) / STAGE_DIRS["canny"]
    out_root = Path(cfg.output_dir) / STAGE_DIRS["plan"]
    if not edges_root.is_dir():
        raise StageError("plan", f"edge maps not found under {edges_root}; run canny first")
    identities = _identity_dirs(edges_root)
    n = len(identities)

    pcfg = planner.PlannerConfig(n_identities=n, max_shared=cfg.planner.max_shared)
    plan_path = out_root / "plan.jsonl"
    if plan_path.exists() and not force:
        p = planner.read_plan_jsonl(plan_path, n, cfg.planner.max_shared)
    else:
        p = planner.plan(pcfg)
        planner.write_plan_jsonl(p, plan_path)
    summary = {
        "n_identities": n,
        "identity_names": identities,
        "max_shared": cfg.planner.max_shared,
        "clique_size": p.clique_size,
        "combination_count": len(p),
    }
    out_root.mkdir(parents=True, exist_ok=True)
    with open(out_root / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return p


# ---------------------------------------------------------------------------
# assemble

_WORKER_LIB: asm.EdgeLibrary | None = None
_WORKER_GRID: geometry.RoiGrid | None = None


def _set_assemble_context(lib: asm.EdgeLibrary, grid: geometry.RoiGrid) -> None:
    global _WORKER_LIB, _WORKER_GRID
    _WORKER_LIB = lib
    _WORKER_GRID = grid


def _init_assemble_worker(edges_root: str, roi: tuple) -> None:
    _set_assemble_context(asm.EdgeLibrary.from_dir(edges_root), geometry.roi_grid(roi))


def _assemble_task(args) -> str:
    out_path, spec_fields, force = args
    out_path = Path(out_path)
    if not force and out_path.exists():
        return str(out_path)
    spec = _spec_from_fields(spec_fields)
    edge = asm.assemble_edge(spec, _WORKER_LIB, _WORKER_GRID)
    fileio.save_edge(out_path, edge)
    return str(out_path)


def _spec_fields(spec: asm.AssemblySpec) -> dict:
    return {
        "identities": list(spec.combination.identities),
        "subset": list(spec.combination.subset),
        "rotation": spec.combination.rotation,
        "block_gestures": list(spec.block_gestures),
        "background": list(spec.background),
        "flip": spec.flip,
    }


def _spec_from_fields(fields: dict) -> asm.AssemblySpec:
    return asm.AssemblySpec(
        combination=planner.Combination(
            identities=tuple(fields["identities"]),
            subset=tuple(fields["subset"]),
            rotation=fields["rotation"],
        ),
        block_gestures=tuple(fields["block_gestures"]),
        background=tuple(fields["background"]),
        flip=fields["flip"],
    )


def build_sample_specs(cfg: PipelineConfig, plan: planner.IdentityPlan,
                       lib: asm.EdgeLibrary) -> list[tuple[int, int, asm.AssemblySpec]]:
    """(plan_index, sample_idx, spec) for every requested sample, in order."""
    capacity = len(plan)
    if cfg.ids_to_generate > capacity:
        raise CapacityError(
            f"requested {cfg.ids_to_generate} identities but the plan holds "
            f"only {capacity} (clique {plan.clique_size} x 9 rotations)"
        )
    out = []
    for sid in range(cfg.ids_to_generate):
        rng = _substream(cfg.master_seed, sid)
        specs = asm.sample_variants(
            plan.combinations[sid], lib, cfg.samples_per_id, rng,
            block_gesture=cfg.assemble.block_gesture,
            background_position=cfg.assemble.background_position,
        )
        out.extend((sid, k, spec) for k, spec in enumerate(specs))
    return out


def stage_assemble(cfg: PipelineConfig, force: bool = False, workers: int = 1) -> list[dict]:
    edges_root = Path(cfg.output_dir) / STAGE_DIRS["canny"]
    out_root = Path(cfg.output_dir) / STAGE_DIRS["assemble"]
    if not edges_root.is_dir():
        raise StageError("assemble", f"edge maps not found under {edges_root}; run canny first")
    plan = stage_plan(cfg)
    lib = asm.EdgeLibrary.from_dir(edges_root)
    triples = build_sample_specs(cfg, plan, lib)

    tasks = []
    rows = []
    for sid, k, spec in triples:
        out_path = out_root / _sid_name(sid) / f"{k:03d}_edge.png"
        tasks.append((str(out_path), _spec_fields(spec), force))
        rows.append({
            "synthetic_id": _sid_name(sid),
            "sample_idx": k,
            "output": str(out_path.relative_to(cfg.output_dir)),
            **_spec_fields(spec),
        })

    if workers <= 1 or len(tasks) <= 1:
        _set_assemble_context(lib, geometry.roi_grid(cfg.roi))
        for t in tasks:
            _assemble_task(t)
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_assemble_worker,
            initargs=(str(edges_root), cfg.roi),
        ) as pool:
            list(pool.map(_assemble_task, tasks, chunksize=4))
    _write_jsonl(out_root / "manifest.jsonl", rows)
    return rows


# ---------------------------------------------------------------------------
# render

def _render_task(args) -> str:
    in_path, out_path, cfg_fields, force = args
    out_path = Path(out_path)
    if force or not out_path.exists():
        edge = fileio.load_edge(in_path)
        palm = render.render_pseudo(edge, render.PseudoRendererConfig(**cfg_fields))
        fileio.save_gray(out_path, palm)
    return str(out_path)


def stage_render(cfg: PipelineConfig, force: bool = False, workers: int = 1) -> list[dict]:
    in_root = Path(cfg.output_dir) / STAGE_DIRS["assemble"]
    out_root = Path(cfg.output_dir) / STAGE_DIRS["render"]
    if not in_root.is_dir():
        raise StageError("render", f"assembled edges not found under {in_root}; run assemble first")
    edges = sorted(in_root.rglob("*_edge.png"))
    if not edges:
        raise StageError("render", f"no assembled edge maps under {in_root}")

    outs = [out_root / p.parent.name / (p.name[: -len("_edge.png")] + ".png") for p in edges]
    if cfg.renderer.backend == "pseudo":
        cfg_fields = asdict(cfg.renderer.pseudo)
        tasks = [(str(p), str(o), cfg_fields, force) for p, o in zip(edges, outs)]
        _run_tasks(_render_task, tasks, workers)
    else:
        pending = [(p, o) for p, o in zip(edges, outs) if force or not o.exists()]
        if pending:
            requests = [
                render.RenderRequest(edge=fileio.load_edge(p), request_id=f"{o.parent.name}-{o.stem}")
                for p, o in pending
            ]
            ext = cfg.renderer.external
            results = render.render_external(
                requests,
                render.ExternalRendererConfig(
                    input_dir=Path(cfg.output_dir) / ext.input_dir,
                    output_dir=Path(cfg.output_dir) / ext.output_dir,
                    poll_interval_ms=ext.poll_interval_ms,
                    timeout_s=ext.timeout_s,
                ),
            )
            for (_, o), palm in zip(pending, results):
                fileio.save_gray(o, palm)

    rows = [
        {"input": str(p.relative_to(cfg.output_dir)), "output": str(o.relative_to(cfg.output_dir))}
        for p, o in zip(edges, outs)
    ]
    _write_jsonl(out_root / "manifest.jsonl", rows)
    return rows


# ---------------------------------------------------------------------------
# augment

def _augment_task(args) -> dict:
    in_path, out_path, aug_fields, master_seed, sid, sample_idx, force = args
    out_path = Path(out_path)
    acfg = _augment_config(aug_fields)
    rng = _substream(master_seed, sid, sample_idx)
    img = fileio.load_gray(in_path)
    out, draws = aug.basic_augs(img, rng, acfg)
    if force or not out_path.exists():
        fileio.save_gray(out_path, out)
    return draws


def _augment_config(fields: dict) -> aug.AugmentConfig:
    cut = fields.get("cutout")
    return aug.AugmentConfig(
        brightness=tuple(fields["brightness"]) if fields.get("brightness") else None,
        contrast=tuple(fields["contrast"]) if fields.get("contrast") else None,
        rotation=tuple(fields["rotation"]) if fields.get("rotation") else None,
        motion_blur=tuple(fields["motion_blur"]) if fields.get("motion_blur") else None,
        cutout=aug.CutoutConfig(**cut) if cut else None,
    )


def stage_augment(cfg: PipelineConfig, force: bool = False, workers: int = 1) -> list[dict]:
    in_root = Path(cfg.output_dir) / STAGE_DIRS["render"]
    out_root = Path(cfg.output_dir) / STAGE_DIRS["augment"]
    if not in_root.is_dir():
        raise StageError("augment", f"rendered palms not found under {in_root}; run render first")
    images = sorted(in_root.rglob("*.png"))
    if not images:
        raise StageError("augment", f"no rendered images under {in_root}")

    aug_fields = asdict(cfg.augment)
    tasks = []
    for p in images:
        sid = int(p.parent.name)
        sample_idx = int(p.stem)
        out_path = out_root / p.parent.name / p.name
        tasks.append((str(p), str(out_path), aug_fields, cfg.master_seed, sid, sample_idx, force))
    draws_list = _run_tasks(_augment_task, tasks, workers)

    rows = [
        {"input": str(p.relative_to(cfg.output_dir)),
         "output": str((out_root / p.parent.name / p.name).relative_to(cfg.output_dir)),
         "draws": draws}
        for p, draws in zip(images, draws_list)
    ]
    _write_jsonl(out_root / "manifest.jsonl", rows)
    return rows


# ---------------------------------------------------------------------------
# dataset: end to end

def cmd_dataset(cfg: PipelineConfig, force: bool = False, workers: int | None = None) -> dict:
    """Run every stage, then emit the SampleRecord manifest and summary."""
    workers = workers if workers is not None else cfg.workers
    timing = {}
    t0 = time.perf_counter()

    def clock(name, fn, *a, **kw):
        start = time.perf_counter()
        result = fn(*a, **kw)
        timing[name] = round(time.perf_counter() - start, 3)
        return result

    clock("normalize", stage_normalize, cfg, force)
    clock("canny", stage_canny, cfg, force, workers)
    plan = clock("plan", stage_plan, cfg, force)
    assemble_rows = clock("assemble", stage_assemble, cfg, force, workers)
    clock("render", stage_render, cfg, force, workers)
    augment_rows = clock("augment", stage_augment, cfg, force, workers)

    verification = planner.verify_plan(plan)
    if not verification.ok:
        raise StageError("dataset", f"plan verification failed: {verification.message}")

    edges_root = Path(cfg.output_dir) / STAGE_DIRS["canny"]
    identities = _identity_dirs(edges_root)

    draws_by_key = {}
    for row in augment_rows:
        sid_name, fname = Path(row["output"]).parts[-2], Path(row["output"]).name
        draws_by_key[(sid_name, int(Path(fname).stem))] = (row["draws"], row["output"])

    records = []
    for row in assemble_rows:
        key = (row["synthetic_id"], row["sample_idx"])
        draws, out_rel = draws_by_key[key]
        records.append({
            "synthetic_id": row["synthetic_id"],
            "sample_idx": row["sample_idx"],
            "subset": row["subset"],
            "rotation": row["rotation"],
            "block_sources": [[ident, g] for ident, g in
                              zip(row["identities"], row["block_gestures"])],
            "background": row["background"],
            "flip": row["flip"],
            "augment": draws,
            "seed": {"master": cfg.master_seed,
                     "spawn_key": [int(row["synthetic_id"]), row["sample_idx"]]},
            "output": out_rel,
        })
    _write_jsonl(Path(cfg.output_dir) / "manifest.jsonl", records)

    summary = {
        "generated_ids": cfg.ids_to_generate,
        "samples_per_id": cfg.samples_per_id,
        "total_images": len(records),
        "n_source_identities": len(identities),
        "identity_names": identities,
        "clique_size": plan.clique_size,
        "plan_capacity": len(plan),
        "plan_verification": {"ok": verification.ok, "pairs_checked": verification.pairs_checked,
                              "message": verification.message},
        "config_hash": config_hash(cfg),
        "timing_s": {**timing, "total": round(time.perf_counter() - t0, 3)},
    }
    with open(Path(cfg.output_dir) / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary
