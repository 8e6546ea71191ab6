"""Command-line front end: ``spats-lab simulate|reconstruct|analyze|regions|pipeline``.

Exit codes: 0 success, 1 usage or input error, 2 reconstruction did not converge.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .criteria import CRITERIA, SIGMA_THRESHOLD
from .errors import SpatsError
from .homodyne import QuadratureDataset, sample_quadratures
from .pipeline import analyze, verdict_table
from .regions import REGION_CRITERIA, AveragedNoise, FisherNoise, MonteCarloNoise, region_map
from .states import StateDescriptor
from .tomography import DiagonalEstimate, maxlik_diagonal

log = logging.getLogger("spats_lab")

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2
TAIL_LIMIT = 1e-6


class UsageError(Exception):
    pass


@dataclass
class TomographyConfig:
    dim: int = 25
    tol: float = 1e-9
    # EM at the default state needs ~6000-20000 steps to reach tol
    max_iter: int = 50_000
    bin_width: float | None = 0.005


@dataclass
class RegionConfig:
    criterion: str = "wigner0"
    nbar_max: float = 4.0
    nbar_steps: int = 21
    eta_steps: int = 21
    noise: str = "montecarlo"  # montecarlo | fisher | averaged
    resamples: int = 50
    max_iter: int = 5000


@dataclass
class RunConfig:
    state: str = "spats(nbar=1.15, eta=0.62, dim=40)"
    samples: int = 100_000
    seed: int = 7
    k_grid: dict = field(default_factory=lambda: {"max": 12.0, "step": 0.1})
    tomography: TomographyConfig = field(default_factory=TomographyConfig)
    criteria: list = field(default_factory=lambda: list(CRITERIA))
    output_dir: str = "."
    sigma_threshold: float = SIGMA_THRESHOLD
    bootstrap_resamples: int = 100
    regions: RegionConfig = field(default_factory=RegionConfig)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        d = dict(d)
        try:
            tomo = TomographyConfig(**d.pop("tomography", {}))
            reg = RegionConfig(**d.pop("regions", {}))
            cfg = cls(tomography=tomo, regions=reg, **d)
        except TypeError as exc:
            raise UsageError(f"bad config: {exc}") from None
        return cfg

    def descriptor(self) -> StateDescriptor:
        return StateDescriptor.parse(self.state)

    def k_values(self) -> np.ndarray:
        kmax, step = float(self.k_grid["max"]), float(self.k_grid["step"])
        return np.round(np.arange(0.0, kmax + step / 2, step), 10)

    def validate(self) -> None:
        """Check every sub-config before any work is done."""
        self.descriptor()
        if self.samples < 1:
            raise UsageError("--samples must be >= 1")
        if self.tomography.dim < 2 or self.tomography.max_iter < 1 or self.tomography.tol <= 0:
            raise UsageError("tomography needs dim >= 2, max_iter >= 1, tol > 0")
        if self.k_grid["step"] <= 0 or self.k_grid["max"] <= 0:
            raise UsageError("k grid needs positive max and step")
        bad = [c for c in self.criteria if c not in CRITERIA]
        if bad:
            raise UsageError(f"unknown criteria {bad}; choose from {', '.join(CRITERIA)}")
        if self.sigma_threshold <= 0:
            raise UsageError("--sigma-threshold must be positive")
        if self.regions.noise not in ("montecarlo", "fisher", "averaged"):
            raise UsageError(f"unknown noise model {self.regions.noise!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--state", help='state descriptor, e.g. "spats(nbar=1.15, eta=0.62)"')
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--dim", type=int, help="tomography truncation")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--bin-width", type=float, help="histogram width for reconstruction (0 = use raw samples)")
    common.add_argument("--criteria", help="comma-separated subset of " + ",".join(CRITERIA))
    common.add_argument("--k-max", type=float)
    common.add_argument("--k-step", type=float)
    common.add_argument("--out", help="output directory")
    common.add_argument("--sigma-threshold", type=float)
    common.add_argument("--bootstrap", type=int, help="bootstrap resamples for the EP error")
    common.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    common.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="spats-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate homodyne quadratures")
    p = sub.add_parser("reconstruct", parents=[common], help="MaxLik photon-number reconstruction")
    p.add_argument("dataset", nargs="?", help="quadrature CSV (default: <out>/quadratures.csv)")
    p = sub.add_parser("analyze", parents=[common], help="evaluate nonclassicality criteria")
    p.add_argument("--estimate", help="estimate JSON from `reconstruct`")
    p.add_argument("--dataset", help="quadrature CSV from `simulate`")
    p = sub.add_parser("regions", parents=[common], help="classification map over (nbar, eta)")
    p.add_argument("--criterion", help="one of " + ", ".join(REGION_CRITERIA))
    p.add_argument("--fast", action="store_true", help="analytic Fisher-information noise model")
    p.add_argument("--noise", choices=("montecarlo", "fisher", "averaged"))
    p.add_argument("--nbar-max", type=float)
    p.add_argument("--nbar-steps", type=int)
    p.add_argument("--eta-steps", type=int)
    p.add_argument("--resamples", type=int)
    sub.add_parser("pipeline", parents=[common], help="simulate, reconstruct and analyze")
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            cfg = RunConfig.from_json(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    flat = {
        "state": "state", "samples": "samples", "seed": "seed", "out": "output_dir",
        "sigma_threshold": "sigma_threshold", "bootstrap": "bootstrap_resamples",
    }
    for arg, attr in flat.items():
        if getattr(args, arg, None) is not None:
            setattr(cfg, attr, getattr(args, arg))
    for arg in ("dim", "tol", "max_iter", "bin_width"):
        if getattr(args, arg, None) is not None:
            setattr(cfg.tomography, arg, getattr(args, arg))
    if cfg.tomography.bin_width is not None and cfg.tomography.bin_width <= 0:
        cfg.tomography.bin_width = None
    if args.criteria:
        cfg.criteria = [c.strip().lower() for c in args.criteria.split(",") if c.strip()]
    if args.k_max is not None:
        cfg.k_grid["max"] = args.k_max
    if args.k_step is not None:
        cfg.k_grid["step"] = args.k_step
    if args.command == "regions":
        for arg in ("criterion", "nbar_max", "nbar_steps", "eta_steps", "resamples", "noise"):
            if getattr(args, arg, None) is not None:
                setattr(cfg.regions, arg, getattr(args, arg))
        if args.fast:
            cfg.regions.noise = "fisher"
    return cfg


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_simulate(cfg: RunConfig) -> tuple[int, QuadratureDataset, Path]:
    desc = cfg.descriptor()
    rho = desc.build()
    if rho.tail_mass_bound >= TAIL_LIMIT:
        raise UsageError(f"{desc}: truncation discards {rho.tail_mass_bound:.2g} probability; raise dim")
    ds = sample_quadratures(rho, cfg.samples, cfg.seed, str(desc))
    path = _out(cfg) / "quadratures.csv"
    try:
        ds.save(path)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None
    x = ds.samples
    print(f"state    {desc}")
    print(f"count    {ds.count}")
    print(f"mean     {x.mean():.6f}")
    print(f"variance {x.var(ddof=1):.6f}")
    print(f"wrote    {path}")
    return EXIT_OK, ds, path


def cmd_reconstruct(cfg: RunConfig, dataset_path=None, write_gnuplot=False) -> tuple[int, DiagonalEstimate]:
    path = Path(dataset_path) if dataset_path else Path(cfg.output_dir) / "quadratures.csv"
    ds = QuadratureDataset.load(path)
    t = cfg.tomography
    est = maxlik_diagonal(ds, dim=t.dim, tol=t.tol, max_iter=t.max_iter, bin_width=t.bin_width)
    out = _out(cfg) / "estimate.json"
    est.save(out)
    print(f"{'n':>3} {'p_n':>10} {'sigma':>10}")
    for n, (p, s) in enumerate(zip(est.probabilities, est.std_errors)):
        print(f"{n:>3} {p:>10.5f} {s:>10.5f}")
    print(f"iterations {est.iterations}  converged {est.converged}  loglik {est.loglik_final:.6f}")
    print(f"wrote {out}")
    if write_gnuplot:
        (out.parent / "estimate.gp").write_text(
            "set style data boxes\nset boxwidth 0.6\nset xlabel 'n'\nset ylabel 'p_n'\n"
            "plot '< python3 -c \"import json;d=json.load(open(\\'estimate.json\\'));"
            "[print(i,p,s) for i,(p,s) in enumerate(zip(d[\\'probabilities\\'],d[\\'std_errors\\']))]\"' "
            "using 1:2:3 with boxerrorbars title 'reconstruction'\n"
        )
    return (EXIT_OK if est.converged else EXIT_NOT_CONVERGED), est


def cmd_analyze(cfg: RunConfig, estimate_path=None, dataset_path=None, estimate=None, dataset=None) -> tuple[int, list]:
    if dataset is None and dataset_path:
        dataset = QuadratureDataset.load(dataset_path)
    if estimate is None and estimate_path:
        estimate = DiagonalEstimate.load(estimate_path)
    reports = analyze(cfg.criteria, dataset, estimate, cfg.k_values(), cfg.sigma_threshold,
                      cfg.bootstrap_resamples, cfg.seed, bin_width=cfg.tomography.bin_width or 0.005)
    out = _out(cfg) / "reports.json"
    out.write_text(json.dumps([r.to_json() for r in reports], indent=2) + "\n")
    print(verdict_table(reports))
    print(f"wrote {out}")
    return EXIT_OK, reports


def cmd_regions(cfg: RunConfig, write_gnuplot=False) -> tuple[int, object]:
    r = cfg.regions
    if r.criterion not in REGION_CRITERIA:
        raise UsageError(
            f"regions: criterion must be one of {', '.join(REGION_CRITERIA)} (got {r.criterion!r}); "
            "Richter-Vogel tests act on raw quadratures, not on a reconstructed state"
        )
    dim = cfg.tomography.dim
    if r.noise == "fisher":
        noise = FisherNoise(cfg.samples, dim)
    else:
        mc = MonteCarloNoise(cfg.samples, r.resamples, dim, cfg.seed, cfg.tomography.bin_width or 0.005, r.max_iter)
        noise = AveragedNoise(mc) if r.noise == "averaged" else mc

    def progress(i, n):
        print(f"row {i + 1}/{n}", file=sys.stderr, flush=True)

    m = region_map(r.criterion, noise, r.nbar_max, r.nbar_steps, r.eta_steps, cfg.sigma_threshold, progress=progress)
    out = _out(cfg) / f"regions_{r.criterion}.csv"
    m.to_csv(out)
    counts = {lab: int((m.labels == lab).sum()) for lab in ("classical", "grey", "black")}
    print(f"{r.criterion}: " + ", ".join(f"{k} {v}" for k, v in counts.items()))
    print(f"wrote {out}")
    if write_gnuplot:
        out.with_suffix(".gp").write_text(
            "set datafile separator ','\nset xlabel 'nbar'\nset ylabel 'eta'\n"
            "lab(s) = (s eq 'black') ? 2 : (s eq 'grey') ? 1 : 0\n"
            f"plot '{out.name}' skip 1 using 1:2:(lab(strcol(3))) with points pt 5 ps 2 lc palette notitle\n"
        )
    return EXIT_OK, m


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        cfg.validate()
        if args.dump_config:
            print(json.dumps(cfg.to_json(), indent=2))
            return EXIT_OK
        if args.command == "simulate":
            return cmd_simulate(cfg)[0]
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg, args.dataset, args.gnuplot)[0]
        if args.command == "analyze":
            if not (args.estimate or args.dataset):
                raise UsageError("analyze needs --estimate and/or --dataset")
            return cmd_analyze(cfg, args.estimate, args.dataset)[0]
        if args.command == "regions":
            return cmd_regions(cfg, args.gnuplot)[0]
        if args.command == "pipeline":
            _, ds, _ = cmd_simulate(cfg)
            code, est = cmd_reconstruct(cfg, None, args.gnuplot)
            cmd_analyze(cfg, estimate=est, dataset=ds)
            return code
    except (UsageError, SpatsError) as exc:
        print(f"spats-lab: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
