"""
Tests for the command-line front end.
"""
import json
import math

import pytest
from click.testing import CliRunner

from oh_lab import __version__, settings
from oh_lab.cli import cli
from oh_lab.verify import Check


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def balance_file(tmp_path):
    """Job file for the hexagonal balance configuration."""
    path = tmp_path / 'balance.env'
    path.write_text(f"# hexagonal torus\ntheta={math.pi / 3!r}\nABS_TOL=1e-11\n", encoding='utf-8')
    return path


def read_table(path):
    """Provenance and rows of a CSV written by the CLI."""
    provenance, rows = {}, []
    lines = path.read_text(encoding='utf-8').splitlines()
    for line in lines:
        if line.startswith('# '):
            key, _, value = line[2:].partition(': ')
            provenance[key] = value
    body = [line for line in lines if not line.startswith('#')]
    columns = body[0].split(',')
    for line in body[1:]:
        rows.append(dict(zip(columns, line.split(','))))
    return provenance, rows


class TestJsonCommands:
    """Test cases for commands writing JSON."""

    def test_theta_star(self, runner, tmp_path):
        """theta-star reports both routes and the provenance."""
        output = tmp_path / 'theta.json'
        result = runner.invoke(cli, ['theta-star', '-o', str(output)])
        assert result.exit_code == 0
        document = json.loads(output.read_text(encoding='utf-8'))
        assert document['result']['theta_star'] == pytest.approx(1.23409, abs=1e-4)
        assert document['result']['difference'] < 1e-8
        assert document['provenance']['command'] == 'theta-star'
        assert document['provenance']['version'] == __version__

    def test_balance(self, runner, tmp_path):
        """The hexagonal torus balances at x = 1/3."""
        output = tmp_path / 'balance.json'
        result = runner.invoke(cli, ['balance', '--theta', repr(math.pi / 3), '-o', str(output)])
        assert result.exit_code == 0
        payload = json.loads(output.read_text(encoding='utf-8'))['result']
        assert payload['x'] == pytest.approx(1 / 3, abs=1e-9)
        assert payload['nondegenerate'] is True
        assert len(payload['partials']) == 2

    def test_config_file(self, runner, tmp_path, balance_file):
        """Parameters and tolerance overrides are read from the job file."""
        output = tmp_path / 'balance.json'
        result = runner.invoke(cli, ['--config', str(balance_file), 'balance', '-o', str(output)])
        assert result.exit_code == 0
        document = json.loads(output.read_text(encoding='utf-8'))
        assert document['result']['x'] == pytest.approx(1 / 3, abs=1e-9)
        assert document['provenance']['quadrature.ABS_TOL'] == 1e-11
        assert document['provenance']['config_file'] == str(balance_file)

    def test_flags_override_config(self, runner, tmp_path, balance_file):
        """A flag wins over the job file."""
        output = tmp_path / 'balance.json'
        result = runner.invoke(cli, ['--config', str(balance_file), 'balance', '--theta', '1.0',
                                     '-o', str(output)])
        assert result.exit_code == 0
        payload = json.loads(output.read_text(encoding='utf-8'))['result']
        assert payload['theta'] == 1.0


class TestToleranceOverrides:
    """Test cases for --tol overrides."""

    def test_keys_are_distinct(self):
        """Every tolerance key belongs to exactly one configuration."""
        groups = (settings.QUADRATURE_CONFIG, settings.SOLVER_CONFIG, settings.MESH_CONFIG)
        keys = [key for group in groups for key in group]
        assert len(keys) == len(set(keys))

    def test_bracket_ceiling_leaves_quadrature(self, runner, tmp_path):
        """Raising the t ceiling does not touch the tanh-sinh window."""
        output = tmp_path / 'oh.json'
        result = runner.invoke(cli, ['--tol', 'BRACKET_T_MAX=1e5', 'solve-t', '--a', '1.3', '--b', '2.0',
                                     '-o', str(output)])
        assert result.exit_code == 0
        provenance = json.loads(output.read_text(encoding='utf-8'))['provenance']
        assert provenance['solver.BRACKET_T_MAX'] == 1e5
        assert provenance['quadrature.ABSCISSA_MAX'] == settings.QUADRATURE_CONFIG['ABSCISSA_MAX']

    def test_abscissa_window_leaves_solver(self, runner, tmp_path):
        """Narrowing the tanh-sinh window does not touch the t ceiling."""
        output = tmp_path / 'theta.json'
        result = runner.invoke(cli, ['--tol', 'ABSCISSA_MAX=3.5', 'theta-star', '-o', str(output)])
        assert result.exit_code == 0
        provenance = json.loads(output.read_text(encoding='utf-8'))['provenance']
        assert provenance['quadrature.ABSCISSA_MAX'] == 3.5
        assert provenance['solver.BRACKET_T_MAX'] == settings.SOLVER_CONFIG['BRACKET_T_MAX']

    def test_ambiguous_key_rejected(self, runner):
        """T_MAX named two settings and is no longer a key."""
        result = runner.invoke(cli, ['--tol', 'T_MAX=5', 'theta-star'])
        assert result.exit_code == 2


class TestExitCodes:
    """Test cases for error reporting."""

    def test_unknown_tolerance_key(self, runner):
        result = runner.invoke(cli, ['--tol', 'NOT_A_KEY=1', 'theta-star'])
        assert result.exit_code == 2

    def test_malformed_tolerance(self, runner):
        result = runner.invoke(cli, ['--tol', 'ABS_TOL', 'theta-star'])
        assert result.exit_code == 2

    def test_non_numeric_tolerance(self, runner, tmp_path):
        result = runner.invoke(cli, ['--tol', 'ABS_TOL=abc', 'theta-star', '-o', str(tmp_path / 'x.json')])
        assert result.exit_code == 2

    def test_degenerate_solve(self, runner):
        """a = b is rejected as invalid input."""
        result = runner.invoke(cli, ['solve-t', '--a', '1.5', '--b', '1.5'])
        assert result.exit_code == 2

    def test_angle_out_of_range(self, runner):
        result = runner.invoke(cli, ['balance', '--theta', '1.4'])
        assert result.exit_code == 2

    def test_resolution_floor(self, runner, tmp_path):
        result = runner.invoke(cli, ['mesh', '--a', '1.5', '--b', '1.5', '--t', '3', '--resolution', '8',
                                     '-o', str(tmp_path / 'm.obj')])
        assert result.exit_code == 2

    def test_version(self, runner):
        result = runner.invoke(cli, ['--version'])
        assert result.exit_code == 0
        assert __version__ in result.output


class TestTables:
    """Test cases for commands writing CSV."""

    def test_traizet_locus(self, runner, tmp_path):
        """One row per beta with the solved tau."""
        output = tmp_path / 'traizet.csv'
        result = runner.invoke(cli, ['locus-traizet', '--beta-min', '2', '--beta-max', '2', '--n', '1',
                                     '-o', str(output)])
        assert result.exit_code == 0
        provenance, rows = read_table(output)
        assert provenance['command'] == 'locus-traizet'
        assert len(rows) == 1
        assert float(rows[0]['tau']) == pytest.approx(2 * (2 + math.sqrt(3)), abs=1e-8)
        assert rows[0]['converged'] == 'true'

    @pytest.mark.slow
    def test_mesh_csv(self, runner, tmp_path):
        """An oP octagon written as points with the box and check entries."""
        output = tmp_path / 'op.csv'
        result = runner.invoke(cli, ['mesh', '--a', '1.5', '--b', '1.5', '--t', '3', '--resolution', '16',
                                     '--format', 'csv', '-o', str(output)])
        assert result.exit_code == 0
        provenance, rows = read_table(output)
        assert float(provenance['param.rho']) == pytest.approx(1.0, rel=1e-10)
        assert 'box.A' in provenance
        assert float(provenance['check.inversion']) < 1e-6
        assert {row['arc_label'] for row in rows} >= {'interior', 'V1', 'V8V1'}


class StubVerifier:
    """Verifier replacement returning fixed checks."""
    checks = [Check('theta_star_two_ways', True, 1e-12, 1e-8, 'ok')]

    def __init__(self, *args, **kwargs):
        pass

    def run(self):
        return list(self.checks)


class TestVerifyCommand:
    """Test cases for the verify report."""

    @pytest.fixture
    def stub(self, monkeypatch):
        monkeypatch.setattr('oh_lab.cli.Verifier', StubVerifier)
        return StubVerifier

    def test_report_on_stdout(self, runner, stub):
        """Without --report the JSON report goes to stdout and the table to stderr."""
        result = runner.invoke(cli, ['verify', '--quick'])
        assert result.exit_code == 0
        document = json.loads(result.stdout)
        assert document['passed'] is True
        assert document['checks'][0]['name'] == 'theta_star_two_ways'
        assert document['provenance']['command'] == 'verify'
        assert 'PASS' in result.stderr

    def test_report_file(self, runner, stub, tmp_path):
        """--report writes the same document to a file and keeps it out of the provenance."""
        report = tmp_path / 'verify.json'
        result = runner.invoke(cli, ['verify', '--report', str(report)])
        assert result.exit_code == 0
        document = json.loads(report.read_text(encoding='utf-8'))
        assert document['passed'] is True
        assert 'param.report' not in document['provenance']

    def test_failed_check_exit_code(self, runner, monkeypatch, tmp_path):
        """A failed check still writes the report and exits with 1."""
        monkeypatch.setattr(StubVerifier, 'checks', [Check('mesh_oH', False, 1.0, 1e-6, 'worst planes')])
        monkeypatch.setattr('oh_lab.cli.Verifier', StubVerifier)
        report = tmp_path / 'verify.json'
        result = runner.invoke(cli, ['verify', '--report', str(report)])
        assert result.exit_code == 1
        assert json.loads(report.read_text(encoding='utf-8'))['passed'] is False
