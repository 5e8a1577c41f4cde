"""Command-line entry point.

Exit status: 0 on success, 1 on usage or configuration errors, 2 on numeric
failures.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import adversary, planar
from .adversary import HypothesisPair
from .channel import Environment1D
from .dist import NoiseDistribution
from .errors import ConfigurationError, NumericError, RssHideError
from .harness import experiment
from .harness.config import config_to_argv, load_config
from .harness.csvio import fmt, fmt_exact, read_column, write_rows
from .harness.seeding import derive_seed
from .protocol import ProtocolConfig, run_trace


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _bits(text: str) -> List[int]:
    bits = [c for c in text.replace(",", "").strip()]
    if not bits or any(c not in "01" for c in bits):
        raise argparse.ArgumentTypeError(f"expected a string of 0/1 bits, got {text!r}")
    return [int(c) for c in bits]


def _add_environment(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("environment")
    g.add_argument("--max-strength", type=float, default=30.0, help="M, the sender's maximum strength")
    g.add_argument("--decay", type=float, default=0.5, help="linear decay rate c per meter")
    g.add_argument("--distance", type=float, default=10.0, help="sender-adversary distance")
    g.add_argument("--delta", type=float, default=1.0, help="mean strength drop caused by a person")
    g.add_argument("--interference-sigma", type=float, default=0.0,
                   help="spread of the person effect; 0 means a constant drop")
    e = p.add_argument_group("emission")
    e.add_argument("--family", choices=["laplace", "normal", "truncnormal"], default="normal")
    e.add_argument("--mu", type=float, default=20.0)
    e.add_argument("--sigma", type=float, default=2.0)
    e.add_argument("--lo", type=float, default=None, help="truncation floor (default 0)")
    e.add_argument("--hi", type=float, default=None, help="truncation ceiling (default M)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", help="key=value file; command-line flags override it")
    common.add_argument("--out", help="write output here instead of stdout")

    parser = _Parser(prog="rsshide", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", parents=[common], help="simulate a reading trace")
    _add_environment(sim)
    sim.add_argument("--protocol", choices=["shift", "random-shift", "noise"], default="noise")
    sim.add_argument("--steps", type=int, default=1000)
    sim.add_argument("--b", type=_bits, help="interference bit pattern, cycled to --steps (e.g. 0011)")
    sim.add_argument("--b-rate", type=float, default=0.5, help="P(b=1) when --b is absent")

    det = sub.add_parser("detect", parents=[common], help="run detectors over a reading CSV")
    _add_environment(det)
    det.add_argument("--input", required=True)
    det.add_argument("--p", type=float, default=0.05)
    det.add_argument("--window", type=int, default=10)

    cx = sub.add_parser("complexity", parents=[common], help="readings needed for 1-p confidence")
    cx.add_argument("--family", choices=["laplace", "normal", "normal-normal"], default="normal")
    cx.add_argument("--p", type=_floats, default=[0.05])
    cx.add_argument("--eta", type=_floats, help="sigma/delta (laplace, normal) or sigma_1/mu_I")
    cx.add_argument("--eta1", type=float, help="normal: sigma_alt / sigma_true")
    cx.add_argument("--eta2", type=_floats, help="normal: mean gap / sigma_alt")
    cx.add_argument("--eta-prime", type=float, help="normal-normal: sigma_1 / sigma")
    cx.add_argument("--sigma", type=float, help="normal-normal: emission std")
    cx.add_argument("--sigma-i", type=float, help="normal-normal: person-effect std")
    cx.add_argument("--mu-i", type=float, help="normal-normal: person-effect mean")

    cv = sub.add_parser("curve", parents=[common], help="confidence-vs-readings curves")
    cv.add_argument("--family", choices=sorted(experiment.FAMILIES), default="normal")
    cv.add_argument("--etas", type=_floats, default=[3.0, 6.0, 9.0])
    cv.add_argument("--trials", type=int, default=10)
    cv.add_argument("--n", default="100:1000:100")
    cv.add_argument("--p", type=float, default=0.05)
    cv.add_argument("--workers", type=int, default=1)

    s2 = sub.add_parser("solve2d", parents=[common], help="two-adversary beam solution")
    s2.add_argument("--angles", type=_floats, required=True, help="two bearings in radians")
    s2.add_argument("--alpha0", type=float, required=True)
    s2.add_argument("--max-strength", type=float, required=True)
    s2.add_argument("--k", type=float, required=True, help="strength drop per radian")
    s2.add_argument("--delta", type=float, required=True)
    s2.add_argument("--interfered", type=int, default=0)
    return parser


# ---------------------------------------------------------------------------


def _emission(args) -> NoiseDistribution:
    if args.family == "laplace":
        return NoiseDistribution.laplace(args.mu, args.sigma)
    if args.family == "normal":
        return NoiseDistribution.normal(args.mu, args.sigma)
    lo = 0.0 if args.lo is None else args.lo
    hi = args.max_strength if args.hi is None else args.hi
    return NoiseDistribution.truncated_normal(args.mu, args.sigma, lo, hi)


def _interference(args) -> NoiseDistribution:
    if args.interference_sigma > 0:
        return NoiseDistribution.truncated_normal(args.delta, args.interference_sigma, 0.0, args.max_strength)
    return NoiseDistribution.point_mass(args.delta)


def _environment(args) -> Environment1D:
    return Environment1D(0.0, args.distance, args.decay, args.max_strength, _interference(args))


def hypothesis_pair(args) -> HypothesisPair:
    """Reading laws at the adversary for the noise-injection sender described by ``args``.

    A spread-out person effect is modelled as Normal(delta, sigma_I) convolved
    with a normal emission; other families need a constant effect.
    """
    env = _environment(args)
    h0 = _emission(args).shifted(-env.path_loss)
    if args.interference_sigma > 0:
        if args.family != "normal":
            raise ConfigurationError("a random person effect is only modelled for normal emissions")
        h1 = NoiseDistribution.normal(h0.mu - args.delta, math.hypot(args.sigma, args.interference_sigma))
    else:
        h1 = h0.shifted(-args.delta)
    return HypothesisPair(h0, h1)


def detection_report(pair: HypothesisPair, values, p: float, window: int) -> str:
    """key=value report of the sequential and moving-average detectors."""
    rep = adversary.sequential_detect(pair, values, p)
    threshold = 0.5 * (pair.h0.mean() + pair.h1.mean())
    ma = adversary.moving_average_detect(values, window, threshold)
    first_b1 = next((i for i, d in enumerate(ma) if d is adversary.Decision.B1), -1)
    lines = [
        f"case={rep.case.value}",
        f"decision={rep.decision.value}",
        f"confidence_b1={fmt(rep.confidence_b1)}",
        f"cum_llr={fmt(rep.llr.cum_llr)}",
        f"readings={rep.llr.n}",
        f"ma_window={window}",
        f"ma_threshold={fmt(threshold)}",
        f"ma_decision={ma[-1].value if ma else adversary.Decision.UNDECIDED.value}",
        f"ma_first_b1={first_b1}",
    ]
    return "\n".join(lines) + "\n"


def _protocol(args, env: Environment1D) -> ProtocolConfig:
    if args.protocol == "shift":
        if args.interference_sigma > 0:
            raise ConfigurationError("the shift protocol assumes a constant person effect")
        return ProtocolConfig.shift(args.delta)
    if args.protocol == "random-shift":
        return ProtocolConfig.random_shift(env.interference)
    return ProtocolConfig.noise_injection(_emission(args))


def cmd_simulate(args) -> str:
    env = _environment(args)
    cfg = _protocol(args, env)
    if args.steps < 0 or not 0 <= args.b_rate <= 1:
        raise ConfigurationError("need steps >= 0 and 0 <= b-rate <= 1")
    if args.b is not None:
        bits = np.resize(np.asarray(args.b, dtype=int), args.steps)
    else:
        rng = np.random.default_rng(derive_seed(args.seed, 1))
        bits = (rng.random(args.steps) < args.b_rate).astype(int)
    trace = run_trace(cfg, env, bits, derive_seed(args.seed, 0))
    rows = [
        [str(t), str(int(trace.truth_b[t])), fmt_exact(trace.emitted[t]), fmt_exact(trace.values[t]),
         str(int(trace.clamped[t]))]
        for t in range(len(trace))
    ]
    return write_rows(["t", "b", "emitted", "value", "clamped"], rows)


def cmd_detect(args) -> str:
    values = read_column(args.input, "value")
    return detection_report(hypothesis_pair(args), values, args.p, args.window)


def cmd_complexity(args) -> str:
    rows = []
    if args.family == "laplace":
        header = ["family", "p", "eta", "n_required", "min_readings"]
        for p in args.p:
            for eta in _need(args.eta, "--eta"):
                n = adversary.n_required_laplace(p, eta)
                rows.append(["laplace", fmt(p), fmt(eta), fmt(n), str(adversary.min_readings(n))])
    elif args.family == "normal":
        header = ["family", "p", "eta1", "eta2", "n_required", "min_readings"]
        if args.eta2 is not None:
            pairs = [(args.eta1 if args.eta1 is not None else 1.0, e2) for e2 in args.eta2]
        else:
            pairs = [(1.0, 1.0 / eta) for eta in _need(args.eta, "--eta or --eta2")]
        for p in args.p:
            for eta1, eta2 in pairs:
                n = adversary.n_required_normal(p, eta1, eta2)
                rows.append(["normal", fmt(p), fmt(eta1), fmt(eta2), fmt(n), str(adversary.min_readings(n))])
    else:
        header = ["family", "p", "eta", "eta_prime", "n_required", "min_readings"]
        if args.sigma is not None:
            if args.sigma_i is None or args.mu_i is None:
                raise ConfigurationError("--sigma needs --sigma-i and --mu-i")
            pairs = [adversary.normal_normal_etas(args.sigma, args.sigma_i, args.mu_i)]
        else:
            if args.eta_prime is None:
                raise ConfigurationError("normal-normal needs --sigma/--sigma-i/--mu-i or --eta with --eta-prime")
            pairs = [(eta, args.eta_prime) for eta in _need(args.eta, "--eta")]
        for p in args.p:
            for eta, eta_prime in pairs:
                n = adversary.n_required_normal_normal(p, eta, eta_prime)
                rows.append(["normal-normal", fmt(p), fmt(eta), fmt(eta_prime), fmt(n),
                             str(adversary.min_readings(n))])
    return write_rows(header, rows)


def _need(value, flag):
    if not value:
        raise ConfigurationError(f"{flag} is required")
    return value


def cmd_curve(args) -> str:
    spec = experiment.ExperimentSpec(args.family, args.etas, experiment.parse_range(args.n),
                                     args.trials, args.p, args.seed)
    if args.workers < 1:
        raise ConfigurationError("workers must be at least 1")
    return experiment.curve_csv(experiment.run_confidence_curve(spec, workers=args.workers))


def cmd_solve2d(args) -> str:
    scene = planar.Scene2D(args.angles, args.alpha0, args.max_strength,
                           decay_slope=args.k, interference_delta=args.delta)
    sol = planar.solve_two_adversary(scene, args.interfered)
    if not sol.feasible:
        return f"feasible=false reason={sol.reason}\n"
    return f"feasible=true theta={fmt(sol.theta)} alpha={fmt(sol.alpha)}\n"


COMMANDS = {
    "simulate": cmd_simulate,
    "detect": cmd_detect,
    "complexity": cmd_complexity,
    "curve": cmd_curve,
    "solve2d": cmd_solve2d,
}


def _with_config(argv: List[str]) -> List[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not argv or argv[0] not in COMMANDS:
        return argv
    return [argv[0], *config_to_argv(load_config(known.config)), *argv[1:]]


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_with_config(argv))
        output = COMMANDS[args.command](args)
        if args.out:
            Path(args.out).write_text(output)
        else:
            sys.stdout.write(output)
    except SystemExit as exc:
        return int(exc.code or 0)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except (RssHideError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
