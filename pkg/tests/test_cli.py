import pytest
from click.testing import CliRunner

from ble_proximity_sim import __version__
from ble_proximity_sim.cli import cli
from ble_proximity_sim.platform.behavior import default_behavior_table

from conftest import EXAMPLE_SCENARIO

THREE_DEVICES = """
[scenario]
duration = "2m"
seed = 3

[[device]]
name = "a"
platform = "android"

[[device]]
name = "b"
platform = "ios"
state = "background"

[[device]]
name = "c"
platform = "android"

[[proximity]]
pairs = [["a", "b"], ["b", "c"]]
"""


SHORT_CONTACT = """
[scenario]
duration = "10s"

[[device]]
name = "scanner"
platform = "ios"
state = "background"

[[device]]
name = "locked"
platform = "ios"
state = "locked"

[[proximity]]
end = "3s"
pairs = "all"
"""

@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args, **kwargs):
    return runner.invoke(cli, [str(arg) for arg in args], **kwargs)


def test_version(runner):
    result = invoke(runner, '--version')
    assert result.exit_code == 0
    assert __version__ in result.output
    assert default_behavior_table().calibration_hash() in result.output


class TestSimulate:
    def test_writes_log(self, runner, tmp_path):
        out = tmp_path / 'log.csv'
        result = invoke(runner, 'simulate', EXAMPLE_SCENARIO, out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith('# seed=7 ')
        assert lines[1] == 't_us,scanner_id,observed_mac,service_confirmed,resolved_id'
        assert len(lines) > 2

    def test_same_seed_same_bytes(self, runner, tmp_path):
        first, second = tmp_path / 'one.csv', tmp_path / 'two.csv'
        invoke(runner, 'simulate', EXAMPLE_SCENARIO, first, '--seed', 99)
        invoke(runner, 'simulate', EXAMPLE_SCENARIO, second, '--seed', 99)
        assert first.read_bytes() == second.read_bytes()

    def test_environment_seed(self, runner, tmp_path, write_config):
        config = write_config(THREE_DEVICES.replace('seed = 3\n', ''))
        by_flag, by_env = tmp_path / 'flag.csv', tmp_path / 'env.csv'
        invoke(runner, 'simulate', config, by_flag, '--seed', 42)
        invoke(runner, 'simulate', config, by_env, env={'BLE_SIM_SEED': '42'})
        assert by_flag.read_bytes() == by_env.read_bytes()

    def test_verify(self, runner, tmp_path):
        result = invoke(runner, 'simulate', EXAMPLE_SCENARIO, tmp_path / 'log.csv', '--verify')
        assert result.exit_code == 0
        assert 'Replay check passed' in result.output

    def test_unknown_device_is_validation_error(self, runner, tmp_path, write_config):
        config = write_config(THREE_DEVICES.replace('["b", "c"]', '["b", "zed"]'))
        assert invoke(runner, 'simulate', config, tmp_path / 'log.csv').exit_code == 3

    def test_syntax_error_is_parse_error(self, runner, tmp_path, write_config):
        config = write_config('[scenario]\nduration = \n')
        result = invoke(runner, 'simulate', config, tmp_path / 'log.csv')
        assert result.exit_code == 2
        assert 'line 2' in result.output

    def test_missing_config_is_io_error(self, runner, tmp_path):
        assert invoke(runner, 'simulate', tmp_path / 'nope.toml', tmp_path / 'log.csv').exit_code == 4


class TestMatrix:
    def test_check_reference(self, runner, tmp_path):
        out = tmp_path / 'matrix.csv'
        result = invoke(runner, 'matrix', out, '--check-paper')
        assert result.exit_code == 0, result.output
        assert '35 Pass / 1 Fail' in result.output
        assert len(out.read_text().splitlines()) == 37

    def test_counterfactual_fails_check(self, runner, tmp_path, write_config):
        config = write_config('[behavior.ios.locked]\ndecodes_overflow = true\n')
        result = invoke(runner, 'matrix', tmp_path / 'matrix.csv', '--config', config, '--check-paper')
        assert result.exit_code == 5
        assert '36 Pass / 0 Fail' in result.output

    def test_without_check_always_succeeds(self, runner, tmp_path, write_config):
        config = write_config('[behavior.ios.locked]\ndecodes_overflow = true\n')
        assert invoke(runner, 'matrix', tmp_path / 'matrix.csv', '--config', config).exit_code == 0

    def test_handsets(self, runner, tmp_path):
        result = invoke(runner, 'matrix', tmp_path / 'matrix.csv', '--handsets', '--check-paper',
                        '--duration', '30s')
        assert result.exit_code == 0, result.output
        assert '54 cells, 0 inconsistent' in result.output

    def test_unwritable_output(self, runner, tmp_path):
        assert invoke(runner, 'matrix', tmp_path / 'missing' / 'matrix.csv').exit_code == 4

    def test_bad_duration(self, runner, tmp_path):
        assert invoke(runner, 'matrix', tmp_path / 'matrix.csv', '--duration', 'soon').exit_code == 2

    def test_zero_duration_is_rejected(self, runner, tmp_path):
        out = tmp_path / 'matrix.csv'
        assert invoke(runner, 'matrix', out, '--duration', '0').exit_code == 3
        assert not out.exists()


class TestGraph:
    def test_two_edges(self, runner, tmp_path, write_config):
        log, out = tmp_path / 'log.csv', tmp_path / 'graph.csv'
        assert invoke(runner, 'simulate', write_config(THREE_DEVICES), log).exit_code == 0
        result = invoke(runner, 'graph', log, out)
        assert result.exit_code == 0, result.output
        assert 'Wrote 2 edges over 3 devices' in result.output
        assert len(out.read_text().splitlines()) == 3

    def test_empty_log(self, runner, tmp_path):
        log, out = tmp_path / 'log.csv', tmp_path / 'graph.csv'
        log.write_text('t_us,scanner_id,observed_mac,service_confirmed,resolved_id\n')
        result = invoke(runner, 'graph', log, out)
        assert result.exit_code == 0
        assert out.read_text() == 'id_a,id_b,weight_seconds\n'

    def test_unresolved_only(self, runner, tmp_path, write_config):
        config = write_config(
            '[scenario]\nduration = "1m"\nlog_unconfirmed = true\n'
            '[[device]]\nname = "a"\nplatform = "ios"\nstate = "locked"\n'
            '[[device]]\nname = "b"\nplatform = "ios"\nstate = "locked"\n'
            '[[proximity]]\npairs = "all"\n'
        )
        log, out = tmp_path / 'log.csv', tmp_path / 'graph.csv'
        assert invoke(runner, 'simulate', config, log).exit_code == 0
        assert len(log.read_text().splitlines()) > 2
        assert invoke(runner, 'graph', log, out).exit_code == 0
        assert out.read_text() == 'id_a,id_b,weight_seconds\n'

    def test_malformed_log(self, runner, tmp_path):
        log = tmp_path / 'log.csv'
        log.write_text('this is not a detection log\n')
        assert invoke(runner, 'graph', log, tmp_path / 'graph.csv').exit_code == 2

    def test_config_clips_short_contacts(self, runner, tmp_path, write_config):
        from ble_proximity_sim.formats import read_graph

        config = write_config(SHORT_CONTACT)
        log, clipped, unclipped = tmp_path / 'log.csv', tmp_path / 'clipped.csv', tmp_path / 'unclipped.csv'
        assert invoke(runner, 'simulate', config, log).exit_code == 0
        assert invoke(runner, 'graph', log, clipped, '--config', config).exit_code == 0
        assert invoke(runner, 'graph', log, unclipped).exit_code == 0

        weights = list(read_graph(clipped).edges.values())
        assert len(weights) == 1
        assert weights[0] <= 3 * 1_000_000
        assert sum(read_graph(unclipped).edges.values()) <= 10 * 1_000_000

    def test_output_parses_back(self, runner, tmp_path, write_config):
        from ble_proximity_sim.formats import read_graph

        log, out = tmp_path / 'log.csv', tmp_path / 'graph.csv'
        invoke(runner, 'simulate', write_config(THREE_DEVICES), log)
        invoke(runner, 'graph', log, out, '--gap-tolerance', '20s', '--min-duration', '1s')
        assert len(read_graph(out).edges) == 2


class TestAnalyze:
    def test_defaults(self, runner):
        result = invoke(runner, 'analyze', '--trials', 2000)
        assert result.exit_code == 0, result.output
        for expected in ('0.921875', '0.849854', '92%', '85%'):
            assert expected in result.output

    def test_no_waking_window(self, runner):
        assert invoke(runner, 'analyze', '--sleep-hours', 24, '--trials', 10).exit_code == 2

    def test_zero_trials(self, runner):
        assert invoke(runner, 'analyze', '--trials', 0).exit_code == 2

    def test_not_a_number(self, runner):
        assert invoke(runner, 'analyze', '--usage-hours', 'lots').exit_code == 2
