"""Small builders shared by the config, pipeline and CLI tests."""

from pathlib import Path

PRICES_2018 = """[prices]
source = fixed
regulating = 54.06
fcr.DE = 11.18
fcr.NL = 19.53
fcr.PL = 5.34
rent.KO = 1.27
rent.BC = 1.78
rent.NN = 5.01
rent.SP = 2.00
"""


def write_ek(path: Path, values) -> Path:
    lines = ["timestamp,ek_gws"] + [f"{i},{v}" for i, v in enumerate(values)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def scenario(tmp_path: Path, body: str, name: str = "scenario.ini") -> Path:
    p = tmp_path / name
    p.write_text(body, encoding="utf-8")
    return p


def ek_scenario(tmp_path: Path, values, extra: str = "", prices: str = PRICES_2018) -> Path:
    write_ek(tmp_path / "ek.csv", values)
    return scenario(tmp_path, f"[scenario]\nname = t\n\n[inputs]\nkinetic_energy = ek.csv\n\n{prices}\n{extra}")
