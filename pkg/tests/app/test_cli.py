import io
import json

import pandas as pd
import pytest
from dependency_injector import providers

from app.commands import SAMPLE_COLUMNS, run_command
from app.main import build_parser, create_app, load_run_config, run
from core.errors import AdmissibilityError, VerificationFailure
from core.verification.models import CheckRecord, VerificationReport
from core.verification.services import EntryVerifier


class StubEntryVerifier(EntryVerifier):
    def __init__(self, tolerances, *, measured=0.0, error=None):
        super().__init__(tolerances=tolerances)
        self._measured = measured
        self._error = error
        self.verified: list[str] = []

    async def verify(self, job):
        self.verified.append(job.name)
        if self._error is not None:
            return self._error
        record = CheckRecord.measure(
            "potential_offset", job.name, self.tolerances["potential_offset"], self._measured
        )
        return VerificationReport.from_checks([record])


def stub_verifiers(**kwargs):
    return providers.Factory(lambda tolerances: StubEntryVerifier(tolerances, **kwargs))


def samples(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), comment="#")


def test_catalog_list(app_container, capsys):
    assert run(["catalog", "list"], app_container) == 0

    payload = json.loads(capsys.readouterr().out)
    names = [row["name"] for row in payload["entries"]]
    assert len(names) == 11
    assert names[0] == "shifted-ho"
    assert payload["entries"][1]["canonical"]["k0"] == 1.0


def test_catalog_list_as_table(app_container, capsys):
    assert run(["catalog", "list", "--format", "table"], app_container) == 0

    assert "generalized-poschl-teller" in capsys.readouterr().out


def test_derive_writes_samples_with_header(app_container, capsys):
    assert run(["derive", "--entry", "morse", "--n", "257"], app_container) == 0

    text = capsys.readouterr().out
    header = [line for line in text.splitlines() if line.startswith("#")]
    assert header[0].startswith("# entry=morse kappa=1 eps0=-2")
    assert header[1].startswith("# V offset: V = V_closed + ")
    assert float(header[1].rsplit("+", 1)[1]) == pytest.approx(3.0)
    assert any(line.startswith("# note:") for line in header)
    frame = samples(text)
    assert list(frame.columns) == list(SAMPLE_COLUMNS)
    assert len(frame) == 257


def test_derive_to_file(app_container, tmp_path):
    target = tmp_path / "ho.csv"

    assert run(["derive", "--entry", "shifted-ho", "--n", "129", "--output", str(target)], app_container) == 0

    frame = samples(target.read_text())
    assert frame["V"].iloc[64] == pytest.approx(0.0, abs=1e-12)


def test_derive_needs_an_entry(app_container):
    assert run(["derive"], app_container) == 2


def test_unknown_entry(app_container):
    assert run(["spectrum", "--entry", "square-well"], app_container) == 2


def test_unknown_mass_profile(app_container):
    assert run(["derive", "--entry", "morse", "--mass", "heavy"], app_container) == 2


def test_inadmissible_profile(app_container):
    assert run(["derive", "--entry", "coulomb", "--mass", "cauchy-squared-inverse"], app_container) == 3


def test_constraint_violation(app_container):
    assert run(["derive", "--entry", "morse", "--k1", "0.5"], app_container) == 6


def test_coherent_rejects_degenerate_kappa(app_container):
    assert run(["coherent", "--entry", "shifted-ho", "--kappa", "1"], app_container) == 6


def test_coherent_writes_sidecars(app_container, tmp_path):
    target = tmp_path / "hcs.csv"

    code = run(
        ["coherent", "--entry", "shifted-ho", "--n", "1025", "--xi-im", "0.4", "--output", str(target)],
        app_container,
    )

    assert code == 0
    assert any(line == "# xi=0.4j" for line in target.read_text().splitlines())
    phcs = samples((tmp_path / "hcs.phcs.csv").read_text())
    assert list(phcs.columns) == ["x", "mu", "re_psi", "im_psi", "abs_psi"]
    uncertainty = json.loads((tmp_path / "hcs.uncertainty.json").read_text())
    assert uncertainty["ratio"] == pytest.approx(1.0, rel=1e-4)


def test_spectrum_of_oscillator(app_container, capsys):
    assert run(["spectrum", "--entry", "shifted-ho", "--k", "3", "--n", "2049"], app_container) == 0

    payload = json.loads(capsys.readouterr().out)
    assert payload["eps0"] == 1.0
    assert payload["eigenvalues"] == pytest.approx([1.0, 3.0, 5.0], abs=5e-3)


def test_swanson(app_container, capsys):
    argv = ["swanson", "--alpha", "0.3", "--beta", "0.1", "--n", "2001", "--k", "2"]

    assert run(argv, app_container) == 0

    payload = json.loads(capsys.readouterr().out)
    assert payload["omega"] == pytest.approx(1.4)
    assert payload["bounded_below"] is True
    assert payload["eigenvalues"][0] == pytest.approx(0.678233, abs=1e-3)
    assert payload["zeta_min"] > 0.0
    assert payload["hermitized_defect"] < payload["symmetry_defect"]


def test_swanson_rejects_malformed_superpotential(app_container):
    assert run(["swanson", "--w-spec", "{class: 1"], app_container) == 2


def test_verify_all_pass(app_container, capsys):
    with app_container.override_providers(entry_verifier_factory=stub_verifiers()):
        code = run(["verify"], app_container)

    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["summary"]["total"] == 11
    assert payload["config"]["entry"] == "all"


def test_verify_failure_exit_code(app_container, capsys):
    with app_container.override_providers(entry_verifier_factory=stub_verifiers(measured=1.0)):
        code = run(["verify", "--entry", "morse", "--format", "csv"], app_container)

    assert code == 4
    assert "# 0/1 checks passed" in capsys.readouterr().out


def test_verify_raises_after_writing_the_report(app_container, capsys):
    config = load_run_config(build_parser().parse_args(["verify", "--entry", "morse"]))

    with app_container.override_providers(entry_verifier_factory=stub_verifiers(measured=1.0)):
        with pytest.raises(VerificationFailure) as excinfo:
            run_command(config, app_container)

    assert excinfo.value.failed == 1
    assert excinfo.value.exit_code == 4
    assert json.loads(capsys.readouterr().out)["summary"]["failed"] == 1


def test_verify_single_entry_error_is_raised(app_container):
    error = AdmissibilityError("window not covered")
    with app_container.override_providers(entry_verifier_factory=stub_verifiers(error=error)):
        assert run(["verify", "--entry", "coulomb"], app_container) == 3


def test_verify_all_records_entry_errors(app_container, capsys):
    error = AdmissibilityError("window not covered")
    with app_container.override_providers(entry_verifier_factory=stub_verifiers(error=error)):
        code = run(["verify"], app_container)

    payload = json.loads(capsys.readouterr().out)
    assert code == 4
    assert {record["check"] for record in payload["checks"]} == {"instantiate"}


def test_run_config_file_with_flags_on_top(tmp_path):
    config_file = tmp_path / "run.json"
    config_file.write_text(json.dumps({"entry": "morse", "k": 2, "grid": {"n": 513}}))

    args = build_parser().parse_args(["--config", str(config_file), "spectrum", "--k", "3"])
    config = load_run_config(args)

    assert config.command == "spectrum"
    assert config.entry == "morse"
    assert config.eigen_count == 3
    assert config.grid.n == 513


def test_malformed_run_config_file(app_container, tmp_path):
    config_file = tmp_path / "run.json"
    config_file.write_text('{"entry": ')

    assert run(["--config", str(config_file), "spectrum"], app_container) == 2


def test_create_app_reads_environment(monkeypatch):
    monkeypatch.setenv("PDMCS_THREADS", "7")
    monkeypatch.setenv("PDMCS_LOG_LEVEL", "debug")

    container = create_app()

    assert container.config.runtime.threads() == 7
    assert container.config.logging.level() == "debug"
    assert container.config.grid.n() == 4097
