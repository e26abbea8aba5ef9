from __future__ import annotations

import os
import sys
import time
from dataclasses import asdict
from typing import Any, Callable, Dict, List, Optional

import click
import yaml

from rrgraph import __version__
from rrgraph.branching import (
    BranchingConfig,
    OffspringLaw,
    grow_restricted_tree,
    restricted_tree_parameters,
    simulate_branching,
    simulate_restricted_trees,
    survival_fixed_point,
    wp_report,
)
from rrgraph.cayley import (
    GraphSpec,
    VertexSet,
    ball,
    bfs_distance,
    check_boundary_bound,
    diameter,
    is_connected,
    is_dense,
    vertex_boundary,
)
from rrgraph.errors import (
    InfeasibleParameterError,
    InvalidParameterError,
    ManifestError,
    ResourceLimitError,
)
from rrgraph.experiments import (
    YEAST_BLOCK_LENGTHS,
    ExperimentRunner,
    Method,
    SweepConfig,
    critical_rate_table,
)
from rrgraph.logging import setup_logging
from rrgraph.outputs import (
    TRIAL_COLUMNS,
    format_vertex_set,
    read_vertex_set,
    render_table,
    save_subgraph,
    to_frame,
    write_table,
)
from rrgraph.random_graph import (
    SampleConfig,
    components,
    explore_component_lazy,
    sample_subgraph_explicit,
)
from rrgraph.seeding import derive_seed, fresh_seed, numpy_rng
from rrgraph.settings import Settings
from rrgraph.signed_perm import GeneratorKind, GeneratorSet, group_order, identity, parse
from rrgraph.telemetry import get_metrics
from rrgraph.trace import RunManifest, load_manifest, write_manifest
from rrgraph.workers import map_trials

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

PLOT_COLUMNS = ["n", "c", "mean_largest_fraction", "predicted_wp"]
GENS_CHOICE = click.Choice([k.value for k in GeneratorKind])
FORMAT_CHOICE = click.Choice(["csv", "json"])


def _ints(text: str) -> List[int]:
    """``"5,6,7"`` or ``"8-12"`` style lists."""
    values: List[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                values.extend(range(int(lo), int(hi) + 1))
            elif part:
                values.append(int(part))
    except ValueError as e:
        raise click.BadParameter(f"not an integer list: {text!r}") from e
    return values


def _floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"not a number list: {text!r}") from e


def _one_of(c: Optional[str], lam: Optional[str]) -> None:
    if (c is None) == (lam is None):
        raise click.UsageError("give exactly one of --c or --lambda")


def _argv(command: str, options: Dict[str, Any]) -> List[str]:
    """Rebuild a command line from resolved option values."""
    argv = [command]
    for name, value in options.items():
        if value is None or value is False:
            continue
        flag = "--" + name.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif isinstance(value, (list, tuple)):
            argv.extend([flag, ",".join(str(v) for v in value)])
        else:
            argv.extend([flag, str(value)])
    return argv


def _emit(manifest: RunManifest, text: str, out: Optional[str]) -> None:
    if out:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w", newline="") as f:
            f.write(text)
        manifest.outputs.append(out)
        click.echo(f"✓ Wrote {out}", err=True)
    else:
        click.echo(text, nl=False)


def _run(ctx: click.Context, command: str, options: Dict[str, Any],
         body: Callable[[RunManifest], None], seed: Optional[int] = None) -> None:
    """Run ``body`` under a manifest, mapping library errors to exit codes."""
    settings: Settings = ctx.obj["settings"]
    metrics = get_metrics(settings)
    manifest = RunManifest(
        command=command,
        argv=_argv(command, options),
        params={**options, "settings": asdict(settings)},
        master_seed=seed,
    )
    logger = setup_logging(settings, run_id=manifest.run_id)
    logger.info("%s started (run %s): %s", command, manifest.run_id, " ".join(manifest.argv))

    code = 0
    try:
        body(manifest)
    except (InvalidParameterError, click.BadParameter) as e:
        code = EXIT_USAGE
        click.echo(f"✗ Invalid parameters: {e}", err=True)
    except (InfeasibleParameterError, ResourceLimitError) as e:
        code = EXIT_INFEASIBLE
        click.echo(f"✗ Infeasible: {e}", err=True)
    except (OSError, ManifestError) as e:
        code = EXIT_IO
        click.echo(f"✗ I/O error: {e}", err=True)

    manifest.finished_at = time.time()
    try:
        path = write_manifest(
            manifest, os.path.join(settings.paths.manifests_dir, f"{manifest.run_id}.json")
        )
        logger.info("%s finished with status %d, manifest %s", command, code, path)
    except OSError as e:
        click.echo(f"✗ Could not write manifest: {e}", err=True)
        code = code or EXIT_IO

    metrics.record_command(command, "ok" if code == 0 else str(code))
    try:
        metrics.write_textfile()
    except OSError as e:
        logger.warning("Could not write metrics: %s", e)
    if code:
        ctx.exit(code)


@click.group()
@click.option('--config', '-C', type=click.Path(), help='Path to a YAML settings file')
@click.option('--threads', '-j', type=int, help='Worker threads (-1 = all cores)')
@click.option('--set', 'overrides', multiple=True, metavar='SECTION.KEY=VALUE',
              help='Override a single setting')
@click.version_option(__version__)
@click.pass_context
def main(ctx, config, threads, overrides):
    """Random reversal graph experiments"""
    if config and not os.path.exists(config):
        click.echo(f"✗ Config file not found: {config}", err=True)
        ctx.exit(EXIT_IO)
    try:
        settings = Settings.load(config)
    except (OSError, yaml.YAMLError, TypeError) as e:
        click.echo(f"✗ Could not read config: {e}", err=True)
        ctx.exit(EXIT_IO)
    try:
        settings.apply_overrides(dict(o.split("=", 1) for o in overrides))
    except (KeyError, ValueError) as e:
        raise click.UsageError(f"bad --set override: {e}")
    if threads is not None:
        settings.runtime.threads = threads
    try:
        settings.ensure_directories()
    except OSError as e:
        click.echo(f"✗ Could not create output directories: {e}", err=True)
        ctx.exit(EXIT_IO)

    ctx.ensure_object(dict)
    ctx.obj['settings'] = settings
    ctx.obj['logger'] = setup_logging(settings)


# -- sweeps --------------------------------------------------------------------


def _sweep(ctx, command, n, c, lam, trials, seed, cutoff, method, gens, fmt, out,
           per_trial, plot, skip_no_flips=None, window=False):
    if window:
        if c is not None or lam is not None:
            raise click.UsageError("--window picks c itself; drop --c and --lambda")
    else:
        _one_of(c, lam)
    settings: Settings = ctx.obj['settings']
    seed = fresh_seed() if seed is None else seed
    trials = trials or settings.sampling.default_trials
    config = SweepConfig(
        n_values=_ints(n),
        c_values=_floats(c) if c else [],
        lambda_values=_floats(lam) if lam else [],
        trials_per_cell=trials,
        master_seed=seed,
        method=Method(method),
        cutoff=cutoff,
        gens_kind=GeneratorKind(gens),
        include_no_flips=not skip_no_flips,
    )
    options = dict(n=n, c=c, **{"lambda": lam}, trials=trials, seed=seed, cutoff=cutoff,
                   method=method, gens=gens, format=fmt, out=out, per_trial=per_trial, plot=plot,
                   window=window)
    if skip_no_flips is not None:
        options["skip_no_flips"] = skip_no_flips

    def body(manifest: RunManifest) -> None:
        runner = ExperimentRunner(settings, trace_run_id=manifest.run_id)
        if window:
            result = runner.window_rows(config.n_values, trials, seed, config.method, cutoff,
                                        config.gens_kind)
        elif command == "transposition-sweep":
            result = runner.run_transposition_analogue(config)
        else:
            result = runner.run_threshold_sweep(config)
        summary = to_frame(result.rows)
        _emit(manifest, render_table(summary, fmt), out)
        if per_trial:
            frame = to_frame(result.trials, columns=TRIAL_COLUMNS + ["gens"])
            manifest.outputs.append(write_table(frame, per_trial, fmt))
        if plot:
            frame = summary[summary["status"] == "ok"][PLOT_COLUMNS] if len(summary) else summary
            manifest.outputs.append(write_table(frame, plot, "csv"))

    _run(ctx, command, options, body, seed)


def _sweep_options(default_gens: str):
    def decorate(fn):
        options = [
            click.option('--n', 'n', required=True, help='n values, e.g. 5,6,7 or 8-12'),
            click.option('--c', 'c', help='Scaled rates c, lambda = c / degree'),
            click.option('--lambda', 'lam', help='Absolute edge probabilities'),
            click.option('--trials', '-t', type=int, help='Trials per cell'),
            click.option('--seed', '-s', type=int, help='Master seed (random if omitted)'),
            click.option('--cutoff', type=int, help='Lazy cutoff (default n^4)'),
            click.option('--method', type=click.Choice([m.value for m in Method]),
                         default='explicit', show_default=True),
            click.option('--gens', type=GENS_CHOICE, default=default_gens, show_default=True),
            click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv'),
            click.option('--out', '-o', help='Summary output file (stdout if omitted)'),
            click.option('--per-trial', help='Per-trial table output file'),
            click.option('--plot', help='Plot-ready CSV output file'),
        ]
        for option in reversed(options):
            fn = option(fn)
        return fn
    return decorate


@main.command()
@_sweep_options('reversals')
@click.option('--window', is_flag=True, help='Use c = 1 + n^(-1/8) on each n instead of --c')
@click.pass_context
def sweep(ctx, n, c, lam, trials, seed, cutoff, method, gens, fmt, out, per_trial, plot, window):
    """Largest-component fraction over a grid of n and c"""
    _sweep(ctx, 'sweep', n, c, lam, trials, seed, cutoff, method, gens, fmt, out, per_trial, plot,
           window=window)


@main.command('transposition-sweep')
@_sweep_options('transpositions')
@click.option('--skip-no-flips', is_flag=True, help='Do not add the variant without tau(i,i)')
@click.pass_context
def transposition_sweep(ctx, n, c, lam, trials, seed, cutoff, method, gens, fmt, out, per_trial,
                        plot, skip_no_flips):
    """The same sweep on sign-change transposition graphs"""
    _sweep(ctx, 'transposition-sweep', n, c, lam, trials, seed, cutoff, method, gens, fmt, out,
           per_trial, plot, skip_no_flips)


# -- single samples ------------------------------------------------------------


@main.command('components')
@click.option('--n', 'n', type=int, required=True)
@click.option('--c', 'c', type=float)
@click.option('--lambda', 'lam', type=float)
@click.option('--seed', '-s', type=int)
@click.option('--gens', type=GENS_CHOICE, default='reversals', show_default=True)
@click.option('--backend', type=click.Choice(['scipy', 'union_find']), default='scipy')
@click.option('--save-edges', help='Write the sampled edge stream to this file')
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def components_cmd(ctx, n, c, lam, seed, gens, backend, save_edges, fmt, out):
    """Sample one subgraph explicitly and report its components"""
    _one_of(c, lam)
    settings: Settings = ctx.obj['settings']
    seed = fresh_seed() if seed is None else seed
    options = dict(n=n, c=c, **{"lambda": lam}, seed=seed, gens=gens, backend=backend,
                   save_edges=save_edges, format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        config = SampleConfig(n=n, gens=GeneratorSet(GeneratorKind(gens), n), seed=seed,
                              lam=lam, c=c)
        graph = sample_subgraph_explicit(config, limit=settings.limits.explicit_n)
        stats = components(graph, backend=backend)
        row = {
            "n": n, "c": config.c_value, "lambda": config.lambda_, "seed": seed, "gens": gens,
            "vertex_count": stats.vertex_count, "edge_count": graph.edge_count,
            "component_count": stats.component_count, "largest": stats.largest,
            "second": stats.second, "largest_fraction": stats.largest_fraction,
            "second_over_first": stats.second_over_first,
        }
        _emit(manifest, render_table(to_frame([row]), fmt), out)
        if save_edges:
            manifest.outputs.append(save_subgraph(graph, save_edges))

    _run(ctx, 'components', options, body, seed)


def _explore_row(n, lam, start_text, cutoff, gens, seed, max_edges, limit):
    start = parse(start_text) if start_text else identity(n)
    result = explore_component_lazy(n, lam, start, cutoff, gens, seed, max_edges, limit)
    return result.component_size, result.hit_cutoff, result.edges_examined


@main.command()
@click.option('--n', 'n', type=int, required=True)
@click.option('--c', 'c', type=float)
@click.option('--lambda', 'lam', type=float)
@click.option('--trials', '-t', type=int, default=1, show_default=True)
@click.option('--seed', '-s', type=int)
@click.option('--cutoff', type=int, help='Stop at this size (default n^4)')
@click.option('--start', help='Start vertex, e.g. "(+1,-3,+2)" (default identity)')
@click.option('--gens', type=GENS_CHOICE, default='reversals', show_default=True)
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def explore(ctx, n, c, lam, trials, seed, cutoff, start, gens, fmt, out):
    """Lazily explore the component of one vertex, one row per trial"""
    _one_of(c, lam)
    settings: Settings = ctx.obj['settings']
    seed = fresh_seed() if seed is None else seed
    cutoff = cutoff or settings.cutoff_for(n)
    options = dict(n=n, c=c, **{"lambda": lam}, trials=trials, seed=seed, cutoff=cutoff,
                   start=start, gens=gens, format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        gen_set = GeneratorSet(GeneratorKind(gens), n)
        rate = lam if lam is not None else c / gen_set.degree
        limits = settings.limits
        seeds = [derive_seed(seed, t) for t in range(trials)]
        outcomes = map_trials(
            _explore_row,
            [(n, rate, start, cutoff, gen_set, s, limits.max_edges_examined, limits.lazy_n)
             for s in seeds],
            settings.runtime.threads,
            settings.runtime.backend,
        )
        hits = sum(1 for _, hit, _ in outcomes if hit)
        get_metrics(settings).record_explorations(hits, trials - hits)
        rows = [
            {"trial": t, "seed": s, "component_size": size, "hit_cutoff": hit,
             "edges_examined": examined}
            for t, (s, (size, hit, examined)) in enumerate(zip(seeds, outcomes))
        ]
        _emit(manifest, render_table(to_frame(rows), fmt), out)
        click.echo(f"giant-fraction estimate {hits / trials:.4f} ({hits}/{trials} reached {cutoff})",
                   err=True)

    _run(ctx, 'explore', options, body, seed)


# -- survival and branching ------------------------------------------------------


@main.command()
@click.option('--epsilon', '-e', help='Comma list of epsilon values')
@click.option('--c', 'c', help='Comma list of c values (epsilon = c - 1)')
@click.option('--n', 'n', type=int, help='Also report the window check for this n')
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def survival(ctx, epsilon, c, n, fmt, out):
    """Solve x + exp(-(1+eps) x) = 1"""
    if (epsilon is None) == (c is None):
        raise click.UsageError("give exactly one of --epsilon or --c")
    settings: Settings = ctx.obj['settings']
    options = dict(epsilon=epsilon, c=c, n=n, format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        values = _floats(epsilon) if epsilon else [v - 1.0 for v in _floats(c)]
        rows = []
        for eps in values:
            row = survival_fixed_point(eps, tol=settings.sampling.tolerance).model_dump()
            if n is not None:
                report = wp_report(eps, n)
                row.update(small_epsilon_branch=report.small_epsilon_branch,
                           in_range=report.in_range)
            rows.append(row)
        _emit(manifest, render_table(to_frame(rows), fmt), out)

    _run(ctx, 'survival', options, body)


@main.command()
@click.option('--law', type=click.Choice([o.value for o in OffspringLaw]), default='binomial',
              show_default=True)
@click.option('--m', 'm', default='50', help='Comma list of widths')
@click.option('--p', 'p', type=float, help='Offspring probability (default --mean / m)')
@click.option('--mean', type=float, help='Mean offspring; p = mean / m, or the Poisson rate')
@click.option('--trials', '-t', type=int, default=10_000, show_default=True)
@click.option('--seed', '-s', type=int)
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def branching(ctx, law, m, p, mean, trials, seed, fmt, out):
    """Monte Carlo survival of Galton-Watson processes"""
    if (p is None) == (mean is None):
        raise click.UsageError("give exactly one of --p or --mean")
    settings: Settings = ctx.obj['settings']
    seed = fresh_seed() if seed is None else seed
    options = dict(law=law, m=m, p=p, mean=mean, trials=trials, seed=seed, format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        caps = dict(max_generations=settings.branching.max_generations,
                    population_cap=settings.branching.population_cap)
        rows = []
        for i, width in enumerate(_ints(m)):
            if law == OffspringLaw.POISSON.value:
                config = BranchingConfig.poisson(mean if mean is not None else p * width, **caps)
            else:
                prob = p if p is not None else mean / width
                config = BranchingConfig.build(offspring=OffspringLaw(law), m=width, p=prob, **caps)
            estimate = simulate_branching(config, trials, derive_seed(seed, i),
                                          settings.branching.block_size, settings.runtime.threads)
            rows.append({"law": law, "m": width, "p": config.p, "lambda": config.lam,
                         **estimate.model_dump()})
        _emit(manifest, render_table(to_frame(rows), fmt), out)

    _run(ctx, 'branching', options, body, seed)


@main.command()
@click.option('--n', 'n', type=int, required=True)
@click.option('--c', 'c', type=float, help='lambda = c / C(n+1, 2)')
@click.option('--lambda', 'lam', type=float)
@click.option('--runs', '-r', type=int, default=100, show_default=True)
@click.option('--seed', '-s', type=int)
@click.option('--dump', help='Write the vertices of the first run to this file')
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def tree(ctx, n, c, lam, runs, seed, dump, fmt, out):
    """Restricted tree growth from the identity"""
    _one_of(c, lam)
    settings: Settings = ctx.obj['settings']
    seed = fresh_seed() if seed is None else seed
    options = dict(n=n, c=c, **{"lambda": lam}, runs=runs, seed=seed, dump=dump, format=fmt,
                   out=out)

    def body(manifest: RunManifest) -> None:
        rate = lam if lam is not None else c / GeneratorSet.reversals(n).degree
        params = restricted_tree_parameters(n)
        summary = simulate_restricted_trees(n, rate, runs, seed, settings.runtime.threads)
        row = {**summary.model_dump(), "m_offspring": params.m_offspring,
               "target_size": params.target_size, "admissible_count": params.admissible_count}
        _emit(manifest, render_table(to_frame([row]), fmt), out)
        if dump:
            run = grow_restricted_tree(n, rate, derive_seed(seed, 0))
            with open(dump, "w") as f:
                f.writelines(f"{v}\n" for v in run.perms())
            manifest.outputs.append(dump)

    _run(ctx, 'tree', options, body, seed)


# -- deterministic structure -----------------------------------------------------


@main.command()
@click.option('--n', 'n', type=int, required=True)
@click.option('--gens', type=GENS_CHOICE, default='reversals', show_default=True)
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def graph(ctx, n, gens, fmt, out):
    """Degree, order, connectivity and diameter of the full Cayley graph"""
    settings: Settings = ctx.obj['settings']
    options = dict(n=n, gens=gens, format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        spec = GraphSpec(n, GeneratorSet(GeneratorKind(gens), n))
        limit = settings.limits.exhaustive_n
        connected = is_connected(spec, limit)
        row = {"n": n, "gens": gens, "vertex_count": spec.vertex_count, "degree": spec.degree,
               "connected": connected, "diameter": diameter(spec, limit) if connected else None}
        _emit(manifest, render_table(to_frame([row]), fmt), out)

    _run(ctx, 'graph', options, body)


def _read_set(path: str, n: int) -> VertexSet:
    with open(path) as f:
        return read_vertex_set(f.read(), n)


@main.command()
@click.option('--n', 'n', type=int, required=True)
@click.option('--from', 'source', help='Source permutation (default identity)')
@click.option('--to', 'target', help='Target permutation')
@click.option('--max-depth', type=int, help='Give up beyond this distance (default n+1)')
@click.option('--set', 'vertex_file', type=click.Path(), help='Vertex-set file')
@click.option('--radius', type=int, default=1, show_default=True)
@click.option('--boundary', is_flag=True, help='Emit the vertex boundary instead of the ball')
@click.option('--gens', type=GENS_CHOICE, default='reversals', show_default=True)
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def distance(ctx, n, source, target, max_depth, vertex_file, radius, boundary, gens, fmt, out):
    """Graph distance between two vertices, or the ball/boundary of a vertex set"""
    if (target is None) == (vertex_file is None):
        raise click.UsageError("give exactly one of --to or --set")
    settings: Settings = ctx.obj['settings']
    options = dict(n=n, **{"from": source}, to=target, max_depth=max_depth, set=vertex_file,
                   radius=radius, boundary=boundary, gens=gens, format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        gen_set = GeneratorSet(GeneratorKind(gens), n)
        limit = settings.limits.distance_n
        if target is not None:
            v = parse(source) if source else identity(n)
            w = parse(target)
            depth = n + 1 if max_depth is None else max_depth
            d = bfs_distance(v, w, gen_set, depth, limit)
            row = {"n": n, "from": str(v), "to": str(w), "gens": gens, "distance": d}
            _emit(manifest, render_table(to_frame([row]), fmt), out)
            return
        members = _read_set(vertex_file, n)
        result = (vertex_boundary(members, gen_set, limit) if boundary
                  else ball(members, radius, gen_set, limit))
        _emit(manifest, format_vertex_set(result), out)

    _run(ctx, 'distance', options, body)


@main.command()
@click.option('--n', 'n', type=int, required=True)
@click.option('--set', 'vertex_file', type=click.Path(), help='Vertex-set file')
@click.option('--random-subsets', type=int, help='Check the boundary bound on this many random sets')
@click.option('--seed', '-s', type=int)
@click.option('--gens', type=GENS_CHOICE, default='reversals', show_default=True)
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def density(ctx, n, vertex_file, random_subsets, seed, gens, fmt, out):
    """Density of a vertex set and the vertex-boundary bound"""
    if (vertex_file is None) == (random_subsets is None):
        raise click.UsageError("give exactly one of --set or --random-subsets")
    settings: Settings = ctx.obj['settings']
    if random_subsets is not None:
        seed = fresh_seed() if seed is None else seed
    options = dict(n=n, set=vertex_file, random_subsets=random_subsets, seed=seed, gens=gens,
                   format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        gen_set = GeneratorSet(GeneratorKind(gens), n)
        limit = settings.limits.exhaustive_n
        diam = diameter(GraphSpec(n, gen_set), limit)
        if vertex_file:
            sets = [_read_set(vertex_file, n)]
        else:
            rng = numpy_rng(seed)
            order = group_order(n)
            sizes = rng.integers(1, order + 1, size=random_subsets)
            sets = [VertexSet(frozenset(rng.choice(order, size=int(k), replace=False).tolist()), n)
                    for k in sizes]
        rows = []
        for i, members in enumerate(sets):
            report = check_boundary_bound(members, gen_set, diam, limit)
            rows.append({"index": i, "dense": is_dense(members, gen_set, limit),
                         **report.model_dump()})
        violations = sum(1 for r in rows if not r["holds"])
        _emit(manifest, render_table(to_frame(rows), fmt), out)
        click.echo(f"{violations} boundary-bound violations in {len(rows)} sets", err=True)

    _run(ctx, 'density', options, body, seed)


@main.command('critical-rates')
@click.option('--lengths', help='Comma list of mean block lengths (default: yeast table)')
@click.option('--format', 'fmt', type=FORMAT_CHOICE, default='csv')
@click.option('--out', '-o')
@click.pass_context
def critical_rates(ctx, lengths, fmt, out):
    """Critical reversal probability 1/C(L+1, 2) per synteny block length"""
    options = dict(lengths=lengths, format=fmt, out=out)

    def body(manifest: RunManifest) -> None:
        values = _floats(lengths) if lengths else list(YEAST_BLOCK_LENGTHS)
        _emit(manifest, render_table(to_frame(critical_rate_table(values)), fmt), out)

    _run(ctx, 'critical-rates', options, body)


@main.command()
@click.argument('manifest_path', type=click.Path())
@click.option('--out', '-o', help='Write the main output here instead of the recorded path')
@click.pass_context
def replay(ctx, manifest_path, out):
    """Re-run a recorded command from its manifest"""
    try:
        manifest = load_manifest(manifest_path)
    except (OSError, ManifestError, ValueError) as e:
        click.echo(f"✗ Cannot replay {manifest_path}: {e}", err=True)
        ctx.exit(EXIT_IO)

    command = main.get_command(ctx, manifest.command)
    if command is None or manifest.command == 'replay':
        click.echo(f"✗ Manifest names unknown command {manifest.command!r}", err=True)
        ctx.exit(EXIT_IO)

    args = list(manifest.argv[1:])
    if out:
        if '--out' in args:
            args[args.index('--out') + 1] = out
        else:
            args.extend(['--out', out])
    recorded = manifest.params.get("settings")
    if recorded:
        try:
            replayed = Settings.from_dict(recorded)
        except TypeError as e:
            click.echo(f"✗ Manifest settings do not match this version: {e}", err=True)
            ctx.exit(EXIT_IO)
        # artifacts land where this invocation points; threads never change results
        current: Settings = ctx.obj['settings']
        replayed.paths = current.paths
        replayed.runtime = current.runtime
        ctx.obj['settings'] = replayed
    ctx.obj['logger'].info("Replaying %s from %s", manifest.run_id, manifest_path)
    with command.make_context(manifest.command, args, parent=ctx) as sub_ctx:
        command.invoke(sub_ctx)


if __name__ == '__main__':
    sys.exit(main())
