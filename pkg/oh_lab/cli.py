"""
Command-line front end for the solvers, the loci and the mesher.

Every command reads its parameters from flags or from a flat key=value file
passed with --config; flags win. Upper-case keys in the file (or --tol
KEY=VALUE) override the tolerance settings. Outputs carry a provenance header.
"""
import functools
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import click
import numpy as np
from dotenv import dotenv_values
from joblib import Parallel, delayed
from tqdm import tqdm

from core.exceptions import DomainError, OHLabError
from core.periods import periods, solve_rho
from core.quadrature import QuadratureSpec
from core.solver import (
    LocusPoint,
    LocusSolver,
    balance_solve,
    failed_point,
    h_family_branch,
    magic_tau,
    nondegeneracy_partials,
    rhombic_angle,
    theta_star,
)
from core.weierstrass_data import SurfaceParams, antipodal_check, simplify
from oh_lab import __version__, settings
from oh_lab.verify import Verifier
from surface.export import Exporter, format_number, provenance_lines
from surface.mesher import OctagonMesher

logger = logging.getLogger(__name__)

EXIT_SOLVER = 1
EXIT_CONFIG = 2

LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'


@dataclass
class JobConfig:
    """Settings of one run: tolerance overrides, worker count and where the values came from."""
    overrides: Dict[str, str] = field(default_factory=dict)
    jobs: int = 1
    source: Optional[str] = None
    command: str = ''
    parameters: Dict[str, object] = field(default_factory=dict)

    def _merged(self, defaults: Dict) -> Dict:
        """Defaults updated with the overrides whose keys they define."""
        config = defaults.copy()
        for key, value in self.overrides.items():
            if key in config:
                caster = int if isinstance(config[key], int) else float
                try:
                    number = caster(float(value))
                except ValueError:
                    raise click.UsageError(f"{key}={value!r} is not a number")
                if not number > 0:
                    raise click.UsageError(f"{key} must be positive, got {value}")
                config[key] = number
        return config

    def solver_config(self) -> Dict:
        """Solver settings with overrides applied."""
        return self._merged(settings.SOLVER_CONFIG)

    def mesh_config(self) -> Dict:
        """Mesh settings with overrides applied."""
        return self._merged(settings.MESH_CONFIG)

    def quadrature(self) -> QuadratureSpec:
        """Quadrature controls with overrides applied."""
        return QuadratureSpec.from_config(self._merged(settings.QUADRATURE_CONFIG))

    def check_keys(self) -> None:
        """Reject override keys that no settings group defines."""
        known = set(settings.SOLVER_CONFIG) | set(settings.MESH_CONFIG) | set(settings.QUADRATURE_CONFIG)
        unknown = sorted(set(self.overrides) - known)
        if unknown:
            raise click.UsageError(f"unknown tolerance keys: {', '.join(unknown)}")

    def provenance(self) -> Dict[str, object]:
        """Flat record of the command, parameters and effective settings."""
        data = {'version': __version__, 'command': self.command}
        if self.source:
            data['config_file'] = self.source
        data.update({f'param.{k}': v for k, v in self.parameters.items() if v is not None})
        for prefix, config in (('solver', self.solver_config()), ('mesh', self.mesh_config()),
                               ('quadrature', self._merged(settings.QUADRATURE_CONFIG))):
            data.update({f'{prefix}.{k}': v for k, v in config.items()})
        return data


def reports_errors(func: Callable) -> Callable:
    """Map library errors onto exit codes: 2 for invalid input, 1 for solver failures."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DomainError as e:
            click.echo(f"error: invalid input: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except OHLabError as e:
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_SOLVER)
    return wrapper


def _start(ctx: click.Context) -> JobConfig:
    """Job for the invoked subcommand, with its parameters minus output paths."""
    job = ctx.find_object(JobConfig)
    job.command = ctx.info_name
    job.parameters = dict(ctx.params)
    for key in ('output', 'report'):
        job.parameters.pop(key, None)
    return job


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _emit(text: str, output: Optional[Path]) -> None:
    """Write text to output, or to stdout when no path is given."""
    if output is None:
        click.echo(text, nl=False)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    logger.info("wrote %s", output)


def write_json(job: JobConfig, payload: Dict, output: Optional[Path]) -> None:
    """Emit {provenance, result} as JSON."""
    document = {'provenance': job.provenance(), 'result': payload}
    _emit(json.dumps(_jsonable(document), indent=2, sort_keys=True) + '\n', output)


def write_table(job: JobConfig, columns: Sequence[str], rows: Sequence[Sequence], output: Optional[Path]) -> None:
    """Emit rows as CSV behind '# key: value' provenance lines."""
    lines = provenance_lines(job.provenance())
    lines.append(','.join(columns))
    lines.extend(','.join(format_number(v) for v in row) for row in rows)
    _emit('\n'.join(lines) + '\n', output)


def _solve_point(method: Callable[[float], LocusPoint], x: float) -> LocusPoint:
    try:
        return method(x)
    except OHLabError as e:
        logger.warning("point %g failed: %s", x, e)
        return failed_point(x, str(e))


def run_locus(job: JobConfig, method: Callable[[float], LocusPoint], xs: np.ndarray) -> List[LocusPoint]:
    """Solve every sample, in input order whatever the completion order."""
    samples = tqdm([float(x) for x in xs], desc=job.command, disable=None, file=sys.stderr)
    return Parallel(n_jobs=job.jobs)(delayed(_solve_point)(method, x) for x in samples)


def _locus_rows(points: List[LocusPoint]) -> List[List]:
    return [[p.primary_param, p.solved_param, p.residual, p.converged, p.sign_changes] for p in points]


def _finish_locus(points: List[LocusPoint]) -> None:
    failed = sum(not p.converged for p in points)
    if failed:
        click.echo(f"error: {failed} of {len(points)} points did not converge", err=True)
        sys.exit(EXIT_SOLVER)


output_option = click.option('--output', '-o', type=click.Path(dir_okay=False, path_type=Path), default=None,
                             help='Output file (stdout if omitted)')


@click.group()
@click.version_option(__version__)
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Flat key=value job file; flags override it')
@click.option('--jobs', type=int, default=None, help='Worker processes for loci (default TPMS_OH_JOBS)')
@click.option('--tol', 'tolerances', multiple=True, metavar='KEY=VALUE', help='Tolerance override')
@click.option('--log-level', default=None, help='Logging level (default LOG_LEVEL)')
@click.pass_context
def cli(ctx, config_file, jobs, tolerances, log_level):
    """Numerical lab for the oH family of triply periodic minimal surfaces."""
    logging.basicConfig(level=(log_level or settings.LOG_LEVEL).upper(), format=LOG_FORMAT, stream=sys.stderr)
    values = {k: v for k, v in dotenv_values(config_file).items() if v is not None} if config_file else {}
    options = {k.lower().replace('-', '_'): v for k, v in values.items() if not k.isupper()}
    overrides = {k: v for k, v in values.items() if k.isupper()}
    for item in tolerances:
        key, sep, value = item.partition('=')
        if not sep:
            raise click.BadParameter(f"expected KEY=VALUE, got {item!r}", param_hint='--tol')
        overrides[key.strip().upper()] = value.strip()
    if jobs is None:
        jobs = int(options.pop('jobs', settings.JOBS))
    if jobs < 1:
        raise click.BadParameter(f"must be at least 1, got {jobs}", param_hint='--jobs')
    job = JobConfig(overrides=overrides, jobs=jobs, source=config_file)
    job.check_keys()
    ctx.obj = job
    ctx.default_map = {name: options for name in cli.commands}


@cli.command('solve-t')
@click.option('--a', 'a', type=float, required=True)
@click.option('--b', 'b', type=float, required=True)
@output_option
@click.pass_context
@reports_errors
def solve_t(ctx, a, b, output):
    """Solve Q(a, b; t) = 0 for t and report rho and the antipodality test."""
    job = _start(ctx)
    solver = LocusSolver(job.solver_config(), job.quadrature())
    point = solver.solve_t(a, b)
    s = simplify(SurfaceParams(a, b, point.solved_param))
    pset = periods(s, job.quadrature())
    rho = solve_rho(s, pset)
    antipodal, residuals = antipodal_check(s, rho)
    payload = point.as_dict()
    payload.update({'t': point.solved_param, 'rho': rho, 'alpha': s.alpha, 'beta': s.beta, 'tau': s.tau,
                    'periods': pset.as_dict(), 'antipodal': antipodal, 'antipodal_residuals': list(residuals)})
    write_json(job, payload, output)
    if not point.converged:
        sys.exit(EXIT_SOLVER)


@cli.command('locus-intersection')
@click.option('--alpha-min', type=float, required=True)
@click.option('--alpha-max', type=float, required=True)
@click.option('--n', 'n', type=click.IntRange(min=1), required=True)
@output_option
@click.pass_context
@reports_errors
def locus_intersection(ctx, alpha_min, alpha_max, n, output):
    """Curve tau(alpha) where the oP family meets the oH family."""
    job = _start(ctx)
    solver = LocusSolver(job.solver_config(), job.quadrature())
    points = run_locus(job, solver.intersection_locus, np.linspace(alpha_min, alpha_max, n))
    write_table(job, ['alpha', 'tau', 'residual', 'converged', 'sign_changes'], _locus_rows(points), output)
    _finish_locus(points)


@cli.command('locus-traizet')
@click.option('--beta-min', type=float, required=True)
@click.option('--beta-max', type=float, required=True)
@click.option('--n', 'n', type=click.IntRange(min=1), required=True)
@output_option
@click.pass_context
@reports_errors
def locus_traizet(ctx, beta_min, beta_max, n, output):
    """Curve tau(beta) of balanced Traizet limits at alpha = -beta."""
    job = _start(ctx)
    solver = LocusSolver(job.solver_config(), job.quadrature())
    points = run_locus(job, solver.traizet_locus, np.linspace(beta_min, beta_max, n))
    write_table(job, ['beta', 'tau', 'residual', 'converged', 'sign_changes'], _locus_rows(points), output)
    _finish_locus(points)


@cli.command('balance')
@click.option('--theta', type=float, required=True)
@output_option
@click.pass_context
@reports_errors
def balance(ctx, theta, output):
    """Non-trivial diagonal balance configuration on the rhombic torus of angle theta."""
    job = _start(ctx)
    cfg = balance_solve(theta)
    payload = cfg.as_dict()
    payload['partials'] = list(nondegeneracy_partials(cfg))
    write_json(job, payload, output)


@cli.command('theta-star')
@output_option
@click.pass_context
@reports_errors
def theta_star_command(ctx, output):
    """Angle where the trivial balance locus degenerates, computed two ways."""
    job = _start(ctx)
    root = theta_star()
    tau = magic_tau()
    via_tau = rhombic_angle(tau)
    write_json(job, {'theta_star': root, 'theta_star_degrees': math.degrees(root), 'magic_tau': tau,
                     'via_magic_tau': via_tau, 'difference': abs(root - via_tau)}, output)


@cli.command('h-family')
@click.option('--t-min', type=float, default=None, help='Default: start of the admissible branch')
@click.option('--t-max', type=float, default=None, help='Default: ten times --t-min')
@click.option('--n', 'n', type=click.IntRange(min=1), default=20)
@output_option
@click.pass_context
@reports_errors
def h_family(ctx, t_min, t_max, n, output):
    """Explicit H-family parameters with Q, rho and both H conditions."""
    job = _start(ctx)
    if t_min is None:
        t_min = h_family_branch()[0][0] * (1 + 1e-6)
    t_max = t_max or 10 * t_min
    solver = LocusSolver(job.solver_config(), job.quadrature())
    points = [solver.h_family(float(t)) for t in tqdm(np.geomspace(t_min, t_max, n), desc='h-family',
                                                       disable=None, file=sys.stderr)]
    rows = [[p.t, p.a, p.b, p.Q, p.rho, p.h_residuals[0], p.h_residuals[1], p.zeta_star] for p in points]
    write_table(job, ['t', 'a', 'b', 'Q', 'rho', 'h_residual_plus', 'h_residual_minus', 'zeta_star'],
                rows, output)


@cli.command('isosum')
@click.option('--epsilon', type=float, required=True)
@click.option('--n', 'n', type=click.IntRange(min=2), required=True)
@click.option('--beta-max', type=float, default=None, help='Default: largest bracketing beta up to the cap')
@output_option
@click.pass_context
@reports_errors
def isosum(ctx, epsilon, n, beta_max, output):
    """Curve tau(beta) of oH surfaces with alpha + beta = epsilon."""
    job = _start(ctx)
    if not epsilon > 0:
        raise DomainError(f"need epsilon > 0, got {epsilon}")
    solver = LocusSolver(job.solver_config(), job.quadrature())
    beta_max = beta_max or solver.isosum_beta_max(epsilon)
    job.parameters['beta_max'] = beta_max
    points = run_locus(job, functools.partial(solver.isosum_point, epsilon), np.linspace(epsilon / 2, beta_max, n))
    rows = [[p.primary_param, epsilon - p.primary_param, p.solved_param, p.residual, p.converged, p.sign_changes]
            for p in points]
    write_table(job, ['beta', 'alpha', 'tau', 'residual', 'converged', 'sign_changes'], rows, output)
    _finish_locus(points)


@cli.command('mesh')
@click.option('--a', 'a', type=float, required=True)
@click.option('--b', 'b', type=float, required=True)
@click.option('--t', 't', type=float, default=None, help='Solved from Q = 0 when omitted')
@click.option('--rho', type=float, default=None, help='Balanced from I2 and J2 when omitted')
@click.option('--resolution', type=click.IntRange(min=16), default=None)
@click.option('--format', 'fmt', type=click.Choice(['obj', 'csv']), default='obj')
@click.option('--cell/--octagon', default=False, help='Write the eight-copy cell instead of the octagon')
@click.option('--output', '-o', type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
@reports_errors
def mesh(ctx, a, b, t, rho, resolution, fmt, cell, output):
    """Mesh the fundamental octagon (or its symmetry cell) as OBJ or CSV points."""
    job = _start(ctx)
    if t is None:
        t = LocusSolver(job.solver_config(), job.quadrature()).solve_t(a, b).solved_param
    if rho is None:
        rho = solve_rho(simplify(SurfaceParams(a, b, t)))
    p = SurfaceParams(a, b, t, rho)
    job.parameters.update({'t': t, 'rho': rho})
    mesher = OctagonMesher(job.mesh_config(), job.quadrature(), n_jobs=job.jobs)
    octagon = mesher.build_octagon(p, resolution)
    provenance = job.provenance()
    provenance.update({f'box.{k}': getattr(octagon, k) for k in ('A', 'B', 'A_prime')})
    provenance.update({f'check.{k}': v for k, v in sorted(mesher.check_invariants(octagon).items())})
    target = mesher.extend_cell(octagon) if cell else octagon
    if fmt == 'obj':
        Exporter.write_obj(target, output, provenance)
    else:
        Exporter.write_csv(target, output, provenance)


@cli.command('verify')
@click.option('--quick', is_flag=True, help='Reduced sample counts for the expensive checks')
@click.option('--report', '-o', 'report', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='JSON report file (stdout if omitted)')
@click.pass_context
def verify(ctx, quick, report):
    """Run the acceptance suite: pass/fail table on stderr, JSON report on stdout or --report."""
    job = _start(ctx)
    verifier = Verifier(job.solver_config(), job.mesh_config(), job.quadrature(), quick=quick)
    checks = verifier.run()
    width = max(len(c.name) for c in checks)
    for c in checks:
        status = 'PASS' if c.passed else 'FAIL'
        click.echo(f"{c.name:<{width}}  {status}  residual={c.residual:.3e}  threshold={c.threshold:g}  {c.detail}",
                   err=True)
    failed = [c.name for c in checks if not c.passed]
    click.echo(f"{len(checks) - len(failed)}/{len(checks)} checks passed", err=True)
    document = {'provenance': job.provenance(), 'checks': [c.as_dict() for c in checks],
                'passed': not failed}
    _emit(json.dumps(_jsonable(document), indent=2, sort_keys=True) + '\n', report)
    if failed:
        sys.exit(EXIT_SOLVER)


def main():
    """Console entry point."""
    cli(prog_name='oh-lab')


if __name__ == '__main__':
    main()
