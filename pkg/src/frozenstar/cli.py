"""Command line front end.

    frozenstar <command> --config run.json [--out DIR] [--seed N] [--verbose]

Exit codes: 0 success, 2 bad input, 3 violated solvability assumption,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io as fio
from .errors import AssumptionViolation, FrozenStarError, InputError
from .fd_oracle import build_fd_matrix, compare_spectra, fd_eigen, richardson_order
from .graph import delta_graph, delta_graph_full_determinant, delta_graph_recursive
from .inverse import InverseConfig, invert
from .kernels import kernel_pair
from .spectrum import EigenSubsequences, extract_subsequences, forward_spectrum, scan_real_roots

log = logging.getLogger("frozenstar")

FD_TOL = 2e-3


def _need_graph(cfg: fio.RunConfig):
    if cfg.graph is None:
        raise InputError(f"command '{cfg.command}' needs a 'graph'")
    return cfg.graph


def _inverse_config(cfg: fio.RunConfig, K: int) -> InverseConfig:
    return InverseConfig(K=K, K_min=cfg.K_min, D=cfg.D, M=cfg.M,
                         d00_threshold=cfg.d00_threshold, tau_sin=cfg.tau_sin,
                         rescaled=cfg.rescaled, w_basis=cfg.w_basis)


def _spectrum_table(spec):
    return fio.SPECTRUM_COLUMNS, list(spec.rows())


def _eigenvalue_table(mu: EigenSubsequences):
    rows = [(k, 0, m) for k, m in enumerate(mu.mu0, start=1)]
    rows += [(k, 1, m) for k, m in enumerate(mu.mu1, start=1)]
    return fio.EIGENVALUE_COLUMNS, sorted(rows, key=lambda r: (r[0], r[1]))


def _kernel_table(pair):
    return fio.KERNEL_COLUMNS, list(zip(pair.grid, pair.N, pair.W))


def _forward(cfg):
    graph = _need_graph(cfg)
    spec = forward_spectrum(graph, cfg.k_max, cfg.step, cfg.rho_max)
    summary = {"p": graph.p, "k_max": spec.k_max, "A_l": spec.A_l,
               "anomalies": list(spec.anomalies)}
    return {"spectrum.csv": _spectrum_table(spec), "forward.json": summary}, 0


def _charfn(cfg):
    graph = _need_graph(cfg)
    lam = np.asarray(cfg.lambdas, dtype=float)
    prod = np.real(delta_graph(graph, lam))
    rec = np.real(delta_graph_recursive(graph, lam))
    try:
        det = np.real(delta_graph_full_determinant(graph, lam))
    except InputError as exc:
        log.warning("determinant column skipped: %s", exc)
        det = np.full(lam.shape, np.nan)
    rows = list(zip(lam, prod, rec, det))
    return {"charfn.csv": (fio.CHARFN_COLUMNS, rows)}, 0


def _kernels(cfg):
    edge = _need_graph(cfg).edges[-1]
    if not edge.is_frozen:
        raise InputError("kernels need a frozen last edge")
    pair = kernel_pair(edge.q, edge.frozen_args, cfg.M)
    doc = {"M": cfg.M, "integral_N": pair.integral_N(), "breakpoints": list(pair.breakpoints)}
    return {"kernels.csv": _kernel_table(pair), "kernels.json": doc}, 0


def _invert_outputs(result):
    out = {
        "potential.json": result.q_reconstructed.to_json(),
        "diagnostics.json": dict(result.diagnostics, c=result.c.tolist()),
        "kernels.csv": _kernel_table(result.kernel_pair),
    }
    # skipped Fourier modes mean assumption (iii) does not hold
    return out, (AssumptionViolation.exit_code if result.diagnostics["skipped_modes"] else 0)


def _invert(cfg):
    if cfg.eigenvalues is None:
        raise InputError("invert needs 'eigenvalues' (CSV with columns k, j, mu)")
    mu0, mu1 = fio.read_eigenvalues_csv(cfg.resolve(cfg.eigenvalues))
    mu = EigenSubsequences(mu0, mu1, {"source": str(cfg.eigenvalues)})
    K = min(cfg.K, mu.K)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = invert(cfg.known(), cfg.frozen_set(), mu, _inverse_config(cfg, K))
    return _invert_outputs(result)


def _roundtrip(cfg):
    graph = _need_graph(cfg)
    spec = forward_spectrum(graph, cfg.K, cfg.step)
    mu = extract_subsequences(spec)
    truth = graph.edges[-1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = invert(graph.known_edges, tuple(truth.frozen_args.tolist()), mu,
                        _inverse_config(cfg, cfg.K))
    out, code = _invert_outputs(result)
    t = result.q_reconstructed.grid
    diff = result.q_reconstructed(t) - truth.q(t)
    l2 = float(np.sqrt(np.trapezoid(diff**2, t)))
    norm = float(np.sqrt(np.trapezoid(truth.q(t) ** 2, t)))
    out["diagnostics.json"].update(l2_error=l2,
                                   relative_l2_error=l2 / norm if norm > 0 else None)
    out["spectrum.csv"] = _spectrum_table(spec)
    out["eigenvalues.csv"] = _eigenvalue_table(mu)
    return out, code


def _oracle(cfg):
    graph = _need_graph(cfg)
    count = cfg.fd_count
    rho_max = cfg.rho_max or float(np.ceil(count / graph.p) + 2)
    roots = scan_real_roots(graph, rho_max, cfg.step).roots
    lam = roots[:count] ** 2
    if lam.size < count:
        raise InputError(f"only {lam.size} real roots below rho_max={rho_max}; raise rho_max")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fine, findings = fd_eigen(build_fd_matrix(graph, cfg.fd_N), count, cfg.fd_method)
        coarse, _ = fd_eigen(build_fd_matrix(graph, cfg.fd_N // 2), count, cfg.fd_method)
    report = compare_spectra(lam, fine, FD_TOL)
    doc = report.to_json()
    doc.update(N=cfg.fd_N, richardson_order=richardson_order(coarse - lam, fine - lam),
               complex_findings=[{"re": z.real, "im": z.imag} for z in findings])
    return {"oracle.json": doc}, 0


_DISPATCH = {
    "forward": _forward,
    "charfn": _charfn,
    "kernels": _kernels,
    "invert": _invert,
    "roundtrip": _roundtrip,
    "oracle": _oracle,
}


def run(config: fio.RunConfig, out_dir=".") -> int:
    """Execute ``config.command``, write its files and return the exit status."""
    try:
        outputs, code = _DISPATCH[config.command](config)
    except AssumptionViolation as exc:
        log.error("%s", exc)
        fio.write_outputs({"diagnostics.json": {"error": str(exc), "class": "assumption",
                                                 "details": exc.details}}, out_dir)
        return exc.exit_code
    except FrozenStarError as exc:
        log.error("%s", exc)
        return exc.exit_code
    fio.write_outputs(outputs, out_dir)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frozenstar",
                                 description="Spectra of star graphs with frozen arguments.")
    ap.add_argument("command", choices=fio.COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="accepted for reproducible "
                    "harnesses; the pipeline is deterministic")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return InputError.exit_code
    try:
        cfg = fio.parse_config(text, base_dir=str(path.parent))
    except InputError as exc:
        log.error("%s", exc)
        return exc.exit_code
    if cfg.command is not None and cfg.command != args.command:
        log.error("config says command '%s' but '%s' was requested", cfg.command, args.command)
        return InputError.exit_code
    cfg = fio.RunConfig(**{**cfg.__dict__, "command": args.command})
    return run(cfg, args.out)
