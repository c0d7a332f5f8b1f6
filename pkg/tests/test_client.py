"""Tests for the main petriproof client."""

import sys

import pytest

sys.path.insert(0, 'src')
from petriproof.catalog import MODEL_NAMES
from petriproof.client import PetriProof
from petriproof.defaults import RUN_DEFAULTS
from petriproof.exceptions import UnknownModelError
from petriproof.models.cpn import CpnModel, CpnRunResult
from petriproof.models.net import Net
from petriproof.models.sim import SimReport
from petriproof.solver import SOLVER_ENV
from tests.conftest import make_fake_solver


class TestPetriProof:
    """Test cases for the main client."""

    @pytest.fixture
    async def client(self, tmp_path):
        """Create a test client working under tmp_path."""
        async with PetriProof(data_dir=str(tmp_path)) as client:
            yield client

    def test_client_initialization(self, tmp_path, monkeypatch):
        """Test client defaults and options."""
        monkeypatch.delenv(SOLVER_ENV, raising=False)
        client = PetriProof(data_dir=str(tmp_path))
        assert client.data_dir == tmp_path
        assert client.solver_path is None
        assert client.smt_timeout == 30.0
        assert client.seed == 0
        assert client.profile == "toy"
        assert client.format == 'pydantic'
        assert client.defaults == RUN_DEFAULTS

        with_options = PetriProof(data_dir=str(tmp_path), seed=9, format='json', defaults={'firings': 7})
        assert with_options.seed == 9
        assert with_options.format == 'json'
        assert with_options.defaults['firings'] == 7
        assert with_options.defaults['replications'] == RUN_DEFAULTS['replications']

    def test_client_with_env_solver(self, tmp_path, monkeypatch):
        """Test client reads the solver path from the environment."""
        monkeypatch.setenv(SOLVER_ENV, "/opt/z3/bin/z3")
        assert PetriProof(data_dir=str(tmp_path)).solver_path == "/opt/z3/bin/z3"
        assert PetriProof(data_dir=str(tmp_path), solver_path="cvc5").solver_path == "cvc5"

    def test_invalid_default_key(self, tmp_path):
        """Unknown default keys are rejected."""
        with pytest.raises(ValueError, match="Invalid default key: firing"):
            PetriProof(data_dir=str(tmp_path), defaults={'firing': 5})

    def test_data_dir_created(self, tmp_path):
        """The data directory is created on demand."""
        PetriProof(data_dir=str(tmp_path / "nested" / "dir"))
        assert (tmp_path / "nested" / "dir").is_dir()

    def test_package_exports(self, tmp_path):
        """The top-level package re-exports the client next to the catalog helpers."""
        import petriproof

        assert petriproof.PetriProof is PetriProof
        assert len(petriproof.catalog()) == 18
        assert str(petriproof.parse_model_id("ecdsa-keygen")) == "ecdsa-keygen/hlpn"
        client = petriproof.PetriProof(data_dir=str(tmp_path))
        assert len(client.list_models(include_composites=True)) == 20

    @pytest.mark.asyncio
    async def test_load_caches(self, client):
        """Compiled models are reused per id and scenario and dropped on close."""
        net = client.load("ecdsa-keygen")
        assert isinstance(net, Net)
        assert client.load("ecdsa-keygen") is net
        assert client.load("lps-verify-proof", scenario="clone") is not client.load("lps-verify-proof")
        await client.close()
        assert client.load("ecdsa-keygen") is not net

    @pytest.mark.asyncio
    async def test_list_models(self, client):
        """Listing in both formats."""
        assert len(client.list_models()) == 18
        assert len(client.list_models(include_composites=True)) == 20
        client.format = 'json'
        assert client.list_models()[0] == {"name": "ecdsa-keygen", "layer": "hlpn", "timing": None}

    @pytest.mark.asyncio
    @pytest.mark.parametrize("name", MODEL_NAMES)
    async def test_check_incidence(self, client, name):
        """Every built-in HLPN matches its golden tables."""
        assert client.check_incidence(name) == []

    @pytest.mark.asyncio
    async def test_simulate(self, client):
        """Unset arguments come from the defaults."""
        report = client.simulate("lps-calc-location", firings=10)
        assert isinstance(report, SimReport)
        assert report.config.firings == 10
        assert report.config.replications == RUN_DEFAULTS['replications']
        assert len(report.trace_lengths) == RUN_DEFAULTS['replications']

    @pytest.mark.asyncio
    async def test_simulate_json(self, tmp_path):
        """The json format returns plain dicts."""
        client = PetriProof(data_dir=str(tmp_path), format='json')
        report = client.simulate("ecdsa-keygen", firings=5, replications=2)
        assert isinstance(report, dict)
        assert report["config"]["replications"] == 2

    @pytest.mark.asyncio
    async def test_simulate_needs_hlpn(self, client):
        """CPNs are run with run_cpn, not simulated."""
        with pytest.raises(UnknownModelError):
            client.simulate("ecdsa-keygen/cpn")

    @pytest.mark.asyncio
    async def test_explore(self, client):
        """Calculate Location has no deadlocks."""
        assert client.explore("lps-calc-location").deadlock_free

    @pytest.mark.asyncio
    async def test_run_cpn(self, client):
        """A bare name picks the CPN variant by `timed`; a full id decides itself."""
        result = client.run_cpn("ecdsa-keygen", timed=True, steps=10)
        assert isinstance(result, CpnRunResult)
        assert result.final_clock >= 1
        untimed = client.run_cpn("ecdsa-keygen/cpn/untimed", timed=True, steps=10)
        assert untimed.final_clock == 0
        assert isinstance(client.load("ecdsa-keygen/cpn/timed"), CpnModel)

    @pytest.mark.asyncio
    async def test_emit(self, client):
        """Properties, model aliases and single rules."""
        assert client.emit("lps-gen-proof").name == "generate-location-proof"
        assert client.emit("r3").name == "R3"

    @pytest.mark.asyncio
    async def test_write_script(self, client, tmp_path):
        """Scripts land in data_dir/smt by default."""
        path = client.write_script("key-generation")
        assert path == tmp_path / "smt" / "key-generation.smt2"
        assert path.read_text().rstrip().endswith("(check-sat)")


@pytest.mark.skipif(sys.platform == "win32", reason="shell-script solver stand-in")
class TestVerdictCache:
    """Verdicts are cached per script text and solver."""

    @pytest.mark.asyncio
    async def test_cached_until_forced(self, tmp_path):
        """A second check is served from the cache; force reruns the solver."""
        fake = make_fake_solver(tmp_path, "echo unsat")
        client = PetriProof(data_dir=str(tmp_path / "data"), solver_path=fake)
        first = await client.check_property("key-generation")
        assert first.verdict == "unsat"
        assert list((tmp_path / "data" / "cache" / "smt").glob("*.json"))

        make_fake_solver(tmp_path, "echo sat")
        assert (await client.check_property("key-generation")).verdict == "unsat"
        assert (await client.check_property("key-generation", force=True)).verdict == "sat"

    @pytest.mark.asyncio
    async def test_errors_not_cached(self, tmp_path):
        """A failed run is reported in the row and retried next time."""
        fake = make_fake_solver(tmp_path, "echo garbage")
        client = PetriProof(data_dir=str(tmp_path / "data"), solver_path=fake)
        row = await client.check_property("calculate-location")
        assert row.verdict is None
        assert row.error.startswith("UnparseableOutputError")

        make_fake_solver(tmp_path, "echo unsat")
        assert (await client.check_property("calculate-location")).verdict == "unsat"

    @pytest.mark.asyncio
    async def test_verify_all(self, tmp_path):
        """Every property, in order."""
        fake = make_fake_solver(tmp_path, "echo unsat")
        async with PetriProof(data_dir=str(tmp_path / "data"), solver_path=fake, format='json') as client:
            rows = await client.verify_all()
        assert [row["verdict"] for row in rows] == ["unsat"] * 6
