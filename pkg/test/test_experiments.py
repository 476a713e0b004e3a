import json
import os

import pytest

from sslab.exceptions import ConfigError, ContractViolationError, InsufficientDataError
from sslab.experiments import (EXPERIMENT_NAMES, BaseExperiment, ExperimentConfig,
                               create_experiment, default_config, list_experiments, main,
                               run_experiment)
from sslab.experiments.cli import build_parser, resolve_config
from sslab.experiments.equilibrium_experiments import NegishiExperiment
from sslab.utils.io import parse_header, read_csv


class CountingExperiment(BaseExperiment):
    name = 'negishi'
    title = 'counting'

    def _run(self):
        sizes = [len(idx) for idx in self.chunks()]
        self.claim('blocks cover every path', sum(sizes) == self.config.n_paths, len(sizes))
        self.claim('never holds', False)
        self.write_artifact('sizes.csv', ('size',), [(n,) for n in sizes])


def claims_of(directory):
    header, rows = read_csv(os.path.join(directory, 'claims.csv'))
    return header, {row['claim']: row['passed'] == 'true' for row in rows}


def test_config_roundtrip(tmp_path):
    config = default_config('patching').with_overrides(seed=7, lattice={'n_random': 3})
    filename = str(tmp_path / 'config.json')
    config.save(filename)
    loaded = ExperimentConfig.load(filename)
    assert loaded.to_dict() == config.to_dict()
    assert loaded.lattice['n_random'] == 3 and loaded.lattice['max_depth'] == 3


def test_config_validation_lists_every_problem():
    config = ExperimentConfig(T=-1.0, beta=0.5, n_steps=8, lattice={'grid': 'dense'})
    with pytest.raises(ConfigError) as info:
        config.validate()
    problems = ' '.join(info.value.problems)
    for field in ('T:', 'beta:', 'n_steps:', 'lattice.grid:'):
        assert field in problems


def test_config_rejects_unknown_fields(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({'paths': 10})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json('[1, 2]')
    with pytest.raises(ConfigError):
        ExperimentConfig.load(str(tmp_path / 'missing.json'))


def test_catalog():
    names = [name for name, _ in list_experiments()]
    assert tuple(names) == EXPERIMENT_NAMES
    assert default_config('negishi').n_paths == 10000
    with pytest.raises(ConfigError):
        default_config('prop52')
    config = default_config('negishi').with_overrides(options={'scale': 3.0})
    experiment = create_experiment(config)
    assert isinstance(experiment, NegishiExperiment)
    assert experiment.options['scale'] == 3.0
    assert experiment.options['roundtrip_tolerance'] == 1e-10


def test_chunks_are_balanced(tmp_path):
    config = ExperimentConfig(experiment='negishi', n_paths=2500, chunk=1024, out=str(tmp_path))
    blocks = list(CountingExperiment(config).chunks(start=2500))
    assert [len(b) for b in blocks] == [1250, 1250]
    assert blocks[0][0] == 2500 and blocks[-1][-1] == 4999


def test_experiment_run_writes_claims(tmp_path):
    config = ExperimentConfig(experiment='negishi', n_paths=300, chunk=100, seed=3,
                              out=str(tmp_path))
    result = CountingExperiment(config).run()
    assert not result.passed and result.exit_code == 1
    assert result.failed() == ['never holds']
    header, claims = claims_of(str(tmp_path))
    assert header.startswith('#')
    assert parse_header(header)['seed'] == '3'
    assert claims == {'blocks cover every path': True, 'never holds': False}
    assert os.path.join(str(tmp_path), 'sizes.csv') in result.artifacts


def test_list_command(capsys):
    assert main(['list']) == 0
    out = capsys.readouterr().out
    for name in EXPERIMENT_NAMES:
        assert name in out


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(['negishi', '--bogus'])
    assert info.value.code == 2


@pytest.mark.parametrize('argv', [
    ['negishi', '--paths', '1'],
    ['negishi', '--steps', '8'],
    ['negishi', '--beta', '1.0'],
    ['negishi', '--gamma', '1.5'],
])
def test_invalid_values_exit_with_2(tmp_path, argv):
    assert main(argv + ['--out', str(tmp_path)]) == 2


def test_bad_config_file_exits_with_2(tmp_path):
    filename = tmp_path / 'bad.json'
    filename.write_text(json.dumps({'n_paths': 100, 'colour': 'red'}))
    assert main(['negishi', '--config', str(filename), '--out', str(tmp_path)]) == 2
    filename.write_text('{not json')
    assert main(['negishi', '--config', str(filename), '--out', str(tmp_path)]) == 2


def test_too_few_paths_for_drift_tests_exits_with_2(tmp_path):
    assert main(['example1', '--paths', '100', '--steps', '64', '--out', str(tmp_path)]) == 2


@pytest.mark.parametrize('error, code', [
    (ContractViolationError('strategy breaks its admissibility floor'), 1),
    (InsufficientDataError('empty bundle'), 1),
    (ConfigError(['options.fractions: empty']), 2),
])
def test_runtime_errors_map_to_exit_codes(tmp_path, monkeypatch, error, code):
    def broken_run(config):
        raise error

    monkeypatch.setattr('sslab.experiments.cli.run_experiment', broken_run)
    assert main(['negishi', '--out', str(tmp_path), '-q']) == code


def test_flags_override_config_file(tmp_path):
    filename = tmp_path / 'config.json'
    filename.write_text(json.dumps({'seed': 5, 'n_paths': 300, 'gamma': 0.25,
                                    'lattice': {'n_random': 4}}))
    args = build_parser().parse_args(['negishi', '--config', str(filename), '--seed', '9',
                                      '--grid', 'none'])
    config = resolve_config(args)
    assert config.seed == 9
    assert config.n_paths == 300 and config.gamma == 0.25
    assert config.lattice == {'grid': 'none', 'n_random': 4, 'max_depth': 3,
                              'branchings': [2, 3]}


def test_negishi_run(tmp_path):
    out = str(tmp_path / 'negishi')
    code = main(['negishi', '--paths', '400', '--steps', '64', '--seed', '11', '--out', out,
                 '-q'])
    assert code in (0, 1)
    header, claims = claims_of(out)
    assert header.startswith('#')
    assert claims['weights reproduce the individual optima']
    assert claims['allocation is invariant to rescaling the weights']
    assert claims['U(X;lambda) <= U(S;lambda) + Z (X - S) on every path']
    assert claims['E[U(X;lambda)] <= E[U(S;lambda)] at pi=1']
    first, _ = read_csv(os.path.join(out, 'negishi.csv'))
    assert first.startswith('#') and 'seed=11' in first
    assert os.path.exists(os.path.join(out, 'config.json'))


def test_small_lattice_family_fails_the_instance_claim(tmp_path):
    out = str(tmp_path / 'lattice')
    filename = tmp_path / 'small.json'
    filename.write_text(json.dumps({'options': {'utility_instances': 3,
                                                'c_maximal_trials': 2}}))
    code = main(['lattice-duality', '--config', str(filename), '--grid', 'none',
                 '--n-random', '10', '--out', out, '-q'])
    assert code == 1
    _, claims = claims_of(out)
    assert not claims['at least 500 lattices classified']
    assert claims['equivalences hold on every lattice']
    assert claims['log agent pi* = 0.5 on u=2, d=0.5']
    assert claims['log agent pi* = 4 on u=1.5, d=0.9']
    assert claims['primal-dual conjugacy gap < 1e-08']
    _, rows = read_csv(os.path.join(out, 'lattice_report.csv'))
    assert len(rows) == 10


@pytest.mark.slow
def test_lattice_duality_acceptance(tmp_path):
    config = default_config('lattice-duality').with_overrides(out=str(tmp_path))
    result = run_experiment(config)
    assert result.passed, result.failed()


@pytest.mark.slow
def test_example_two_acceptance(tmp_path):
    config = default_config('example2').with_overrides(n_paths=4000, n_steps=128,
                                                       out=str(tmp_path))
    result = run_experiment(config)
    assert result.passed, result.failed()
    _, rows = read_csv(os.path.join(str(tmp_path), 'log_optimality.csv'))
    assert [float(r['pi']) for r in rows] == [-0.5, 0.0, 0.25, 0.5, 0.75, 1.0]
    assert all(float(r['ci_hi']) <= 1e-3 for r in rows)
    assert abs(float(rows[-1]['estimate'])) < 1e-12


@pytest.mark.slow
def test_repr_agent_lattice_and_marginal(tmp_path):
    config = default_config('repr-agent').with_overrides(n_paths=2000, n_steps=128,
                                                         out=str(tmp_path))
    run_experiment(config)
    _, claims = claims_of(str(tmp_path))
    assert claims["U'(S_T) = Z_T"]
    assert claims['every agent uses the unique deflator on the binomial lattice']
