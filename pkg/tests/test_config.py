from fractions import Fraction

import pytest

from chronolab.config import load_config, parse_config
from chronolab.errors import ConfigError
from chronolab.spectra import Kind


def test_minimal_harmonic():
    cfg = parse_config('[spectrum]\nkind = "harmonic"\nomega0 = 1\n')
    assert cfg.spectrum.kind is Kind.HARMONIC and cfg.spectrum.is_exact
    assert cfg.analyses == [] and cfg.seed == 0
    assert len(cfg.config_hash) == 16


def test_fraction_strings_and_modes():
    cfg = parse_config('seed = 4\n[spectrum]\nkind="power_law"\nc="1/2"\np=2\nM=2\n'
                       'hbar="3/4"\nexactness="float64"\n')
    spec = cfg.spectrum
    assert not spec.is_exact and spec.M == 2 and spec.hbar == 0.75
    assert spec.eigenvalue(2) == 2.0 and cfg.seed == 4


def test_explicit_values_and_file(tmp_path):
    (tmp_path / "lv.txt").write_text("1\n4\n9\n", encoding="utf-8")
    (tmp_path / "c.toml").write_text('[spectrum]\nkind="explicit"\nfile="lv.txt"\n',
                                     encoding="utf-8")
    cfg = load_config(tmp_path / "c.toml")
    assert cfg.spectrum.length == 3 and cfg.spectrum.eigenvalue(3) == 9
    cfg = parse_config('[spectrum]\nkind="explicit"\nvalues=["1/2", 1, 3]\n')
    assert cfg.spectrum.eigenvalue(1) == Fraction(1, 2)


@pytest.mark.parametrize("text, where", [
    ('[spectrum]\nomega0 = 1\n', "spectrum.kind required"),
    ('seed = 1\n', "spectrum block required"),
    ('[spectrum]\nkind = "wave"\n', "spectrum.kind"),
    ('[spectrum]\nkind = "power_law"\nc = 1\n', "spectrum.p required"),
    ('[spectrum]\nkind = "harmonic"\nomega0 = "one"\n', "spectrum.omega0"),
    ('[spectrum]\nkind = "harmonic"\nomega0 = 1\nM = 1.5\n', "spectrum.M"),
    ('[spectrum]\nkind = "explicit"\n', "spectrum.values required"),
    ('[spectrum]\nkind = "explicit"\nvalues = [1, 1]\n', "spectrum "),
    ('[spectrum]\nkind="harmonic"\nomega0=1\n[[analysis]]\nL=3\n', "analysis[0].kind required"),
    ('[spectrum]\nkind="harmonic"\nomega0=1\n[[analysis]]\nkind="dance"\n', "analysis[0].kind"),
    ('[spectrum]\nkind="harmonic"\nomega0=1\n[[analysis]]\nkind="ccr"\nL=0\n',
     "analysis[0].L must be a positive integer"),
    ('[spectrum]\nkind="harmonic"\nomega0=1\n[[analysis]]\nkind="spectrum"\nN=[10,-1]\n',
     "analysis[0].N"),
    ('[spectrum]\nkind="harmonic"\nomega0=1\n[[analysis]]\nkind="ccr"\nL=2\nn_random=-1\n',
     "analysis[0].n_random must be a non-negative integer"),
    ('[spectrum\n', "TOML parse error"),
])
def test_errors_name_location(text, where):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert where in str(err.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")


def test_hash_tracks_content():
    a = parse_config('[spectrum]\nkind="harmonic"\nomega0=1\n')
    b = parse_config('[spectrum]\nkind="harmonic"\nomega0=2\n')
    assert a.config_hash != b.config_hash
    assert a.config_hash == parse_config('[spectrum]\nkind="harmonic"\nomega0=1\n').config_hash


def test_zero_random_elements_allowed():
    cfg = parse_config('[spectrum]\nkind="harmonic"\nomega0=1\n'
                       '[[analysis]]\nkind="ccr"\nL=2\nn_random=0\n')
    assert cfg.analyses[0]["n_random"] == 0
