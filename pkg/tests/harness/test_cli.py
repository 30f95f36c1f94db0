import pytest

from spectral_torus.harness import cli


def _overrides(argv: list[str]) -> dict:
    return cli.overrides_from_args(cli.build_parser().parse_args(argv))


def test_flags_become_nested_overrides():
    # Arrange + Act
    overrides = _overrides(["--seed", "4", "scan", "--nu", "1,1.5", "--m", "3", "--kmax", "8"])

    # Assert
    assert overrides == {
        "scenario": "scan",
        "seed": 4,
        "operator": {"nu": [1.0, 1.5], "m": 3.0},
        "scan": {"kmax": 8},
    }


def test_center_manifold_flags_reach_the_manifold_section():
    # Arrange + Act
    overrides = _overrides(
        ["center-manifold", "--epsilon", "0.1", "--theta-modes", "2", "--z0", "0.1,0,0,0,0,0"]
    )

    # Assert
    assert overrides["center_manifold"] == {
        "epsilon": 0.1,
        "manifold": {"theta_modes": 2},
        "z0": [0.1, 0.0, 0.0, 0.0, 0.0, 0.0],
    }


def test_a_subcommand_is_required():
    # Arrange + Act + Assert
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["--seed", "1"])


def test_main_runs_a_scan(tmp_path):
    # Arrange
    argv = ["--out-dir", str(tmp_path), "scan", "--nu", "1,1.4142135623730951", "--m", "3", "--kmax", "6"]

    # Act
    code = cli.main(argv)

    # Assert
    assert code == 0
    assert (tmp_path / "scan.txt").exists()


def test_flags_override_the_config_file(tmp_path, mocker):
    # Arrange
    path = tmp_path / "experiment.toml"
    path.write_text('scenario = "scan"\nseed = 1\n\n[operator]\nnu = [1.0]\nm = 0.5\n')
    run = mocker.patch.object(cli.runner, "run", return_value=0)

    # Act
    code = cli.main(["--config", str(path), "--seed", "9", "scan", "--m", "0.25"])

    # Assert
    assert code == 0
    experiment = run.call_args.args[0]
    assert experiment.seed == 9
    assert experiment.operator.m == 0.25
    assert experiment.operator.nu == [1.0]


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["--config", "absent.toml", "scan"], 5),
        (["scan", "--kmax", "0"], 2),
    ],
)
def test_config_errors_map_to_exit_codes(argv, expected, tmp_path, monkeypatch):
    # Arrange
    monkeypatch.chdir(tmp_path)

    # Act
    code = cli.main(argv)

    # Assert
    assert code == expected


def test_negative_bifurcation_values_are_read_with_equals():
    # Arrange + Act
    overrides = _overrides(["bifurcate", "--eps-range=-1e-3:-1e-4:3", "--phase=-0.5,1"])

    # Assert
    assert overrides["bifurcation"] == {"eps_range": "-1e-3:-1e-4:3", "phase": [-0.5, 1.0]}


def test_eps_range_help_shows_the_equals_form():
    # Arrange
    parser = cli.build_parser()
    bifurcate = parser._subparsers._group_actions[0].choices["bifurcate"]

    # Act
    helps = {action.dest: action.help for action in bifurcate._actions}

    # Assert
    assert "--eps-range=-1e-2:-1e-4:9" in helps["eps_range"]
