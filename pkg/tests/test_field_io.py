import numpy as np
import pytest

from spectral_torus import errors
from spectral_torus import models
from spectral_torus.spectral import field_io


def test_field_file_reproduces_coefficients_exactly(tmp_path):
    # Arrange
    rng = np.random.default_rng(3)
    coeffs = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    u = models.SpectralField(dim=2, cutoff=2, coeffs=coeffs, is_real=False)
    space = models.SpaceParams(rho=0.25, r=3.0)
    path = tmp_path / "nested" / "u.txt"

    # Act
    field_io.write_field(u, path, space)
    read, read_space = field_io.read_field(path)

    # Assert
    assert np.array_equal(read.coeffs, u.coeffs)
    assert read_space == space
    assert not read.is_real
    assert path.read_text().splitlines()[0].startswith("# field dim=2 cutoff=2 freq_dim=0")


def test_evolution_fields_keep_their_theta_axes(tmp_path):
    # Arrange
    u = models.EvolutionField.from_modes(1, 1, {(1, 0): 0.5, (-1, 0): 0.5}, freq_dim=1)
    path = tmp_path / "hull.txt"

    # Act
    field_io.write_field(u, path)
    read, _ = field_io.read_field(path)

    # Assert
    assert isinstance(read, models.EvolutionField)
    assert read.coefficient((1, 0)) == 0.5


@pytest.mark.parametrize(
    "content",
    [
        "",
        "# jet freq_dim=1\n",
        "# field dim=1 cutoff=1 freq_dim=0 rho=0 r=0 is_real=true\n0 1.0\n",
        "# field dim=1 cutoff=1 rho=0 is_real=true\n",
    ],
)
def test_malformed_field_files_are_rejected(tmp_path, content):
    # Arrange
    path = tmp_path / "broken.txt"
    path.write_text(content)

    # Act + Assert
    with pytest.raises(errors.FieldFormatError):
        field_io.read_field(path)


def test_jet_file_keeps_modes_and_coefficients(tmp_path):
    # Arrange
    hyperbolic = [((-2,), -1), ((-2,), 1), ((2,), -1), ((2,), 1)]
    jet = models.ManifoldJet.zeros(1, 1, hyperbolic, 2)
    constant = np.array(jet.constant)
    quadratic = np.array(jet.quadratic)
    constant[0, 1] = 0.25 - 0.5j
    quadratic[2, 3, 0, 1] = quadratic[2, 3, 1, 0] = 1.5
    jet = jet.with_coefficients(constant, jet.linear, quadratic)
    path = tmp_path / "jet.txt"

    # Act
    field_io.write_jet(jet, path)
    read = field_io.read_jet(path)

    # Assert
    assert read.hyperbolic == hyperbolic
    assert read.distance(jet) == 0.0
    assert read.n_center == 2
