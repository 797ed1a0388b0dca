import pytest

from vmspod.config import ConfigError, RunConfig, load_config, parse_config
from vmspod.rom import Variant


def test_defaults():
    c = RunConfig()
    assert (c.n_div, c.dT, c.M, c.nu, c.r, c.R, c.alpha, c.T_final) == \
        (64, 1e-2, 100, 1e-3, 99, 95, 1e-3, 1.0)
    assert c.variant is Variant.VMS
    assert c.dt_set[-1] == 1 / 3200


def test_parse_file(tmp_path):
    text = """
    # coarse run
    n_div = 16   # mesh
    variant = mixing-length
    dt_set = 0.1, 0.05 0.025
    R_set = 1 2
    r = 4
    R = 2
    """
    path = tmp_path / "run.cfg"
    path.write_text(text)
    c = load_config(path)
    assert c.n_div == 16 and c.variant is Variant.MIXING_LENGTH
    assert c.dt_set == (0.1, 0.05, 0.025) and c.R_set == (1, 2)
    assert c.closure.effective_R == 0
    assert load_config(path, r=5).r == 5


@pytest.mark.parametrize("text", [
    "n_div = 1", "dT = 0", "M = -1", "nu = 0", "r = 0", "R = 100", "alpha = -1",
    "variant = les", "dt = 0.3", "dt_set = 0.1 0.3", "R_set = 3 200", "workers = 0",
    "bogus = 1", "n_div 4", "n_div = four", "dT = 0.1\nM = 20",
])
def test_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_replace_revalidates():
    with pytest.raises(ConfigError):
        RunConfig().replace(R=200)
