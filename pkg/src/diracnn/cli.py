# cli.py
#
# Run orchestration and result export.  Subcommands:
#
#   solve      one (n, kappa) state; for the orthonormal method the lower
#              states of the block are trained first and chained through
#   spectrum   every occupied level across a kappa list, Fermi level found
#              by filling 2|kappa| neutrons per level
#   benchmark  reference eigensolver (+ analytic comparison for Coulomb)
#   ablation   the failure-mode experiments: two-head small component,
#              no-1/r trial factor, and direct minimization collapse
#
# Outputs land in the config's output dir: energies.json (with the resolved
# config embedded), per-state wavefunction/trace CSVs, comparison CSVs.

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analytic import count_nodes, hydrogen_energy, hydrogen_wavefunction, orbital_l
from .config import ConfigError, RunConfig, load_config
from .mesh import RadialMesh, inner_product
from .network import save_params
from .operator import RadialSpinor, assemble
from .oracle import EigenPair, bound_states_below, shift_invert_eigs
from .potentials import eval_potentials
from .solver import (OperatorStack, SolveConfig, TrainResult, fix_sign,
                     train_state)

_SPDF = "spdfghijk"


def state_label(n: int, kappa: int) -> str:
    l = orbital_l(kappa)
    two_j = 2 * abs(kappa) - 1
    return f"{n}{_SPDF[l]}{two_j}/2"


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_wavefunction_csv(path, r, F, G, F_ref=None, G_ref=None) -> None:
    cols = ["r", "F", "G"]
    data = [r, F, G]
    if F_ref is not None:
        cols += ["F_ref", "G_ref"]
        data += [F_ref, G_ref]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in zip(*data):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def sign_alignment(dnn: RadialSpinor, ref: RadialSpinor, mesh: RadialMesh) -> float:
    """Global phase +-1 minimizing the L2 distance to the reference."""
    return 1.0 if inner_product(dnn, ref, mesh) >= 0 else -1.0


def export_comparison(dnn: RadialSpinor, ref: RadialSpinor,
                      mesh: RadialMesh, ref_mesh: RadialMesh | None = None):
    """Per-point relative deviations |dnn - ref| / max|ref| for F and G.

    The reference is never resampled: a mesh mismatch is an error.
    Returns (rel_err_F, rel_err_G) arrays.
    """
    if ref_mesh is not None and ref_mesh is not mesh:
        same = (ref_mesh.kind == mesh.kind and ref_mesh.M == mesh.M
                and np.array_equal(ref_mesh.r, mesh.r))
        if not same:
            raise ValueError("comparison meshes differ; resampling is not supported")
    if dnn.F.shape != ref.F.shape:
        raise ValueError("comparison meshes differ; resampling is not supported")
    s = sign_alignment(dnn, ref, mesh)
    err_F = np.abs(s * dnn.F - ref.F) / np.max(np.abs(ref.F))
    err_G = np.abs(s * dnn.G - ref.G) / np.max(np.abs(ref.G))
    return err_F, err_G


def write_comparison_csv(path, mesh, dnn, ref) -> None:
    err_F, err_G = export_comparison(dnn, ref, mesh)
    with open(path, "w") as fh:
        fh.write("r,rel_err_F,rel_err_G\n")
        for r, ef, eg in zip(mesh.r, err_F, err_G):
            fh.write(f"{_fmt(r)},{_fmt(ef)},{_fmt(eg)}\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_energies_json(path, cfg: RunConfig, rows: list[dict]) -> None:
    doc = {"config": cfg.as_dict(), "states": rows}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, default=_json_default)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Reference spectra and inversion-point selection
# ---------------------------------------------------------------------------

def reference_energies(cfg: RunConfig, stack: OperatorStack, n_max: int) -> list[float]:
    """Lowest n_max energies of the kappa block, for brackets and errors."""
    if cfg.kind == "coulomb":
        start = abs(stack.kappa) if stack.kappa < 0 else stack.kappa + 1
        return [hydrogen_energy(n, stack.kappa, cfg.Z, cfg.c)
                for n in range(start, start + n_max)]
    floor = float(np.min(stack.potentials.U)) - 1.0
    states = bound_states_below(stack.operator, cutoff=0.0, floor=floor,
                                max_states=n_max + 2)
    return [s.eps for s in states[:n_max]]


def choose_epsilon_prime(refs: list[float], n: int) -> float:
    """Below the target level, above the previous one of the same block."""
    if n == 1:
        return refs[0] - 0.02 * abs(refs[0])
    return refs[n - 1] - 0.25 * (refs[n - 1] - refs[n - 2])


def check_bracket(eps_prime: float, refs: list[float], n: int) -> None:
    if eps_prime >= refs[n - 1]:
        raise ConfigError(
            f"epsilon_prime = {eps_prime:.6g} does not sit below the target "
            f"level {refs[n-1]:.6g}")
    if n > 1 and eps_prime <= refs[n - 2]:
        raise ConfigError(
            f"epsilon_prime = {eps_prime:.6g} does not sit above the previous "
            f"level {refs[n-2]:.6g}")


def oracle_spinor(pair: EigenPair) -> RadialSpinor:
    return fix_sign(RadialSpinor.from_stacked(pair.vector))


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _train_cfg(cfg: RunConfig, method: str, eps_prime: float,
               seed_offset: int = 0) -> SolveConfig:
    return SolveConfig(
        method=method, epsilon_prime=eps_prime, max_epochs=cfg.max_epochs,
        window=cfg.window, tol=cfg.tol, seed=cfg.seed + seed_offset,
        learning_rate=cfg.learning_rate, architecture=cfg.architecture,
        hidden=cfg.hidden, r_scaling=cfg.r_scaling)


def _reference_spinor(cfg: RunConfig, stack: OperatorStack, n: int,
                      eps_prime: float) -> RadialSpinor | None:
    if cfg.kind == "coulomb":
        return fix_sign(hydrogen_wavefunction(n, stack.kappa, cfg.Z, cfg.c, stack.mesh))
    pair = shift_invert_eigs(stack.operator, eps_prime, k=1,
                             skip_mirror_images=True)[0]
    return oracle_spinor(pair)


def _result_row(cfg, stack, n, method, eps_prime, result: TrainResult,
                ref_eps: float | None) -> dict:
    secs = float(np.mean(result.trace.seconds)) if result.epochs else 0.0
    row = {
        "label": state_label(n, stack.kappa),
        "n": n, "kappa": stack.kappa, "method": method,
        "epsilon": result.eps, "epsilon_prime": eps_prime,
        "reference": ref_eps,
        "relative_error": (abs(result.eps - ref_eps) / abs(ref_eps)
                           if ref_eps is not None else None),
        "epochs": result.epochs, "seconds_per_epoch": secs,
        "nodes": result.nodes, "converged": result.converged,
        "collapsed": result.collapsed,
    }
    return row


def run_solve(cfg: RunConfig, out: Path) -> list[dict]:
    mesh = cfg.build_mesh()
    spec = cfg.potential_spec()
    pots = eval_potentials(spec, mesh)
    units = spec.units()
    op = assemble(pots, mesh, cfg.kappa, units)
    stack = OperatorStack(mesh=mesh, potentials=pots, units=units,
                          kappa=cfg.kappa, operator=op)

    refs = reference_energies(cfg, stack, cfg.n)
    rows = []

    if cfg.method in ("inverse", "direct"):
        eps_prime = (cfg.epsilon_prime if cfg.epsilon_prime is not None
                     else choose_epsilon_prime(refs, cfg.n))
        if cfg.method == "inverse":
            check_bracket(eps_prime, refs, cfg.n)
        result = train_state(_train_cfg(cfg, cfg.method, eps_prime), stack)
        rows.append(_result_row(cfg, stack, cfg.n, cfg.method, eps_prime,
                                result, refs[cfg.n - 1]))
        _write_state_outputs(cfg, stack, out, cfg.n, eps_prime, result)
    elif cfg.method == "orthonormal":
        # chain: ground state by the inverse method, then project upward
        eps1 = (cfg.epsilon_prime if cfg.epsilon_prime is not None
                else choose_epsilon_prime(refs, 1))
        check_bracket(eps1, refs, 1)
        lower: list[np.ndarray] = []
        for i in range(1, cfg.n + 1):
            method = "inverse" if i == 1 else "orthonormal"
            result = train_state(_train_cfg(cfg, method, eps1, seed_offset=i - 1),
                                 stack, lower_states=lower)
            rows.append(_result_row(cfg, stack, i, method, eps1, result, refs[i - 1]))
            _write_state_outputs(cfg, stack, out, i, eps1, result)
            lower.append(result.spinor.stacked())
    else:
        raise ConfigError(f"solve cannot run method {cfg.method!r}")

    write_energies_json(out / "energies.json", cfg, rows)
    return rows


def _write_state_outputs(cfg, stack, out: Path, n: int, eps_prime: float,
                         result: TrainResult) -> None:
    label = state_label(n, stack.kappa).replace("/", "_")
    result.trace.write_csv(out / f"trace_{label}.csv")
    if result.params is not None:
        save_params(result.params, out / f"network_{label}.ckpt")
    ref = None
    if not result.collapsed:
        try:
            ref = _reference_spinor(cfg, stack, n, eps_prime)
        except Exception:
            ref = None
    if ref is not None:
        s = sign_alignment(result.spinor, ref, stack.mesh)
        aligned = RadialSpinor(F=s * result.spinor.F, G=s * result.spinor.G)
        write_wavefunction_csv(out / f"wavefunction_{label}.csv", stack.mesh.r,
                               aligned.F, aligned.G, ref.F, ref.G)
        write_comparison_csv(out / f"comparison_{label}.csv", stack.mesh,
                             result.spinor, ref)
    else:
        write_wavefunction_csv(out / f"wavefunction_{label}.csv", stack.mesh.r,
                               result.spinor.F, result.spinor.G)


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def occupied_levels(cfg: RunConfig, mesh: RadialMesh):
    """Oracle levels across the kappa list, filled to n_fill particles.

    Returns (levels, fermi_energy) with levels sorted by energy; each level
    is a dict with kappa, n, oracle pair, and degeneracy 2|kappa|.
    """
    if not cfg.kappa_list:
        raise ConfigError("kappa_list must not be empty")
    spec = cfg.potential_spec()
    units = spec.units()
    pots = eval_potentials(spec, mesh)
    all_levels = []
    for kappa in cfg.kappa_list:
        op = assemble(pots, mesh, kappa, units)
        floor = float(np.min(pots.U)) - 1.0
        states = bound_states_below(op, cutoff=0.0, floor=floor)
        for i, pair in enumerate(states):
            all_levels.append({
                "kappa": kappa, "n": i + 1, "pair": pair,
                "degeneracy": 2 * abs(kappa),
            })
        del op
    all_levels.sort(key=lambda lv: lv["pair"].eps)
    filled = 0
    occupied = []
    for lv in all_levels:
        if filled >= cfg.n_fill:
            break
        occupied.append(lv)
        filled += lv["degeneracy"]
    if not occupied:
        raise ConfigError("no occupied levels: check n_fill and kappa_list")
    fermi = occupied[-1]["pair"].eps
    return occupied, fermi


def run_spectrum(cfg: RunConfig, out: Path) -> list[dict]:
    mesh = cfg.build_mesh()
    spec = cfg.potential_spec()
    units = spec.units()
    pots = eval_potentials(spec, mesh)
    occupied, fermi = occupied_levels(cfg, mesh)

    by_kappa: dict[int, list[float]] = {}
    for lv in occupied:
        by_kappa.setdefault(lv["kappa"], []).append(lv["pair"].eps)

    def solve_level(lv):
        kappa, n = lv["kappa"], lv["n"]
        refs = by_kappa[kappa]
        eps_prime = choose_epsilon_prime(refs, n)
        op = assemble(pots, mesh, kappa, units)
        stack = OperatorStack(mesh=mesh, potentials=pots, units=units,
                              kappa=kappa, operator=op)
        result = train_state(_train_cfg(cfg, "inverse", eps_prime,
                                        seed_offset=10 * n + abs(kappa)), stack)
        row = _result_row(cfg, stack, n, "inverse", eps_prime, result,
                          lv["pair"].eps)
        label = row["label"].replace("/", "_")
        result.trace.write_csv(out / f"trace_{label}.csv")
        ref = oracle_spinor(lv["pair"])
        s = sign_alignment(result.spinor, ref, mesh)
        write_wavefunction_csv(out / f"wavefunction_{label}.csv", mesh.r,
                               s * result.spinor.F, s * result.spinor.G,
                               ref.F, ref.G)
        stack.drop_factorizations()
        return row

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(solve_level, occupied))
    else:
        rows = [solve_level(lv) for lv in occupied]

    for row in rows:
        row["fermi_energy"] = fermi
    write_energies_json(out / "energies.json", cfg, rows)
    return rows


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------

def run_benchmark(cfg: RunConfig, out: Path) -> list[dict]:
    """Reference energies per kappa, with analytic deltas for Coulomb."""
    mesh = cfg.build_mesh()
    spec = cfg.potential_spec()
    units = spec.units()
    pots = eval_potentials(spec, mesh)
    rows = []
    for kappa in cfg.kappa_list or [cfg.kappa]:
        op = assemble(pots, mesh, kappa, units)
        floor = (float(np.min(pots.U)) - 1.0 if cfg.kind == "woods_saxon"
                 else 1.25 * hydrogen_energy(abs(kappa) if kappa < 0 else kappa + 1,
                                             kappa, cfg.Z, cfg.c))
        states = bound_states_below(op, cutoff=0.0, floor=floor,
                                    max_states=cfg.n)
        for i, pair in enumerate(states[: cfg.n]):
            n = i + 1 if kappa < 0 else i + 1 + kappa
            row = {"label": state_label(n, kappa), "kappa": kappa, "n": n,
                   "epsilon_oracle": pair.eps, "residual": pair.residual}
            if cfg.kind == "coulomb":
                exact = hydrogen_energy(n, kappa, cfg.Z, cfg.c)
                row["epsilon_analytic"] = exact
                row["relative_deviation"] = abs(pair.eps - exact) / abs(exact)
            rows.append(row)
        del op
    write_energies_json(out / "benchmark.json", cfg, rows)
    return rows


# ---------------------------------------------------------------------------
# ablation
# ---------------------------------------------------------------------------

def run_ablation(cfg: RunConfig, out: Path) -> dict:
    """The three failure-mode experiments on the configured Coulomb system."""
    if cfg.kind != "coulomb":
        raise ConfigError("ablation experiments run on the Coulomb system")
    mesh = cfg.build_mesh()
    spec = cfg.potential_spec()
    pots = eval_potentials(spec, mesh)
    units = spec.units()
    op = assemble(pots, mesh, cfg.kappa, units)
    stack = OperatorStack(mesh=mesh, potentials=pots, units=units,
                          kappa=cfg.kappa, operator=op)
    refs = reference_energies(cfg, stack, 1)
    eps_prime = (cfg.epsilon_prime if cfg.epsilon_prime is not None
                 else choose_epsilon_prime(refs, 1))
    exact = fix_sign(hydrogen_wavefunction(1, cfg.kappa, cfg.Z, cfg.c, mesh))
    report: dict = {"epsilon_prime": eps_prime}

    def g_errors(result):
        err_F, err_G = export_comparison(result.spinor, exact, mesh)
        return float(np.max(err_F)), float(np.max(err_G))

    # (a) two-head trial state: the small component decouples from the loss
    res_fc = train_state(_train_cfg(cfg, "inverse", eps_prime), stack)
    res_split = train_state(
        SolveConfig(method="inverse", epsilon_prime=eps_prime,
                    max_epochs=cfg.max_epochs, window=cfg.window, tol=cfg.tol,
                    seed=cfg.seed, learning_rate=cfg.learning_rate,
                    architecture="split_two_head", hidden=cfg.hidden), stack)
    fF, fG = g_errors(res_fc)
    sF, sG = g_errors(res_split)
    report["small_component"] = {
        "fully_connected": {"eps": res_fc.eps, "max_rel_err_F": fF, "max_rel_err_G": fG},
        "split_two_head": {"eps": res_split.eps, "max_rel_err_F": sF, "max_rel_err_G": sG},
        "g_error_ratio": sG / fG,
    }
    res_fc.trace.write_csv(out / "trace_ablation_fc.csv")
    res_split.trace.write_csv(out / "trace_ablation_split.csv")

    # (b) raw F output: G picks up a spurious divergence at the origin
    res_raw = train_state(
        SolveConfig(method="inverse", epsilon_prime=eps_prime,
                    max_epochs=cfg.max_epochs, window=cfg.window, tol=cfg.tol,
                    seed=cfg.seed, learning_rate=cfg.learning_rate,
                    architecture="fully_connected", hidden=cfg.hidden,
                    r_scaling=False), stack)
    report["raw_f_output"] = {
        "eps": res_raw.eps,
        "abs_G_first_point": float(abs(res_raw.spinor.G[0])),
        "abs_G_first_point_analytic": float(abs(exact.G[0])),
        "origin_ratio": float(abs(res_raw.spinor.G[0]) / abs(exact.G[0])),
    }

    # (c) direct minimization: two-head collapses, one-head may not
    res_dsplit = train_state(
        SolveConfig(method="direct", epsilon_prime=eps_prime,
                    max_epochs=cfg.max_epochs, window=cfg.window, tol=cfg.tol,
                    seed=cfg.seed, learning_rate=cfg.learning_rate,
                    architecture="split_two_head", hidden=cfg.hidden), stack)
    res_dfc = train_state(
        SolveConfig(method="direct", epsilon_prime=eps_prime,
                    max_epochs=cfg.max_epochs, window=cfg.window, tol=cfg.tol,
                    seed=cfg.seed, learning_rate=cfg.learning_rate,
                    architecture="fully_connected", hidden=cfg.hidden), stack)
    report["direct_minimization"] = {
        "split_two_head": {"collapsed": res_dsplit.collapsed,
                           "min_eps": float(res_dsplit.trace.epsilon.min()),
                           "epochs": res_dsplit.epochs},
        "fully_connected": {"collapsed": res_dfc.collapsed,
                            "final_eps": res_dfc.eps,
                            "min_eps": float(res_dfc.trace.epsilon.min()),
                            "epochs": res_dfc.epochs},
        "sea_edge": -2.0 * units.mc2,
    }
    res_dsplit.trace.write_csv(out / "trace_ablation_direct_split.csv")
    res_dfc.trace.write_csv(out / "trace_ablation_direct_fc.csv")

    with open(out / "ablation.json", "w") as fh:
        json.dump({"config": cfg.as_dict(), "report": report}, fh, indent=2,
                  default=_json_default)
        fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "solve": run_solve,
    "spectrum": run_spectrum,
    "benchmark": run_benchmark,
    "ablation": run_ablation,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="diracnn",
        description="Neural-network solver for radial Dirac bound states")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "train one bound state"),
        ("spectrum", "train every occupied level across a kappa list"),
        ("benchmark", "reference eigensolver energies (+ analytic for Coulomb)"),
        ("ablation", "failure-mode experiments"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="INI config file")
        p.add_argument("--seed", type=int, help="override [training] seed")
        p.add_argument("--out", help="override [output] dir")
        p.add_argument("--max-epochs", type=int, dest="max_epochs",
                       help="override [training] max_epochs")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out:
            cfg.out_dir = args.out
        if args.max_epochs is not None:
            cfg.max_epochs = args.max_epochs
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
