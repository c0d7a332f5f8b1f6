"""Main petriproof client."""

import hashlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

if sys.version_info >= (3, 10):
    from typing import TypeAlias
else:
    from typing_extensions import TypeAlias

from .catalog import Model, catalog, instantiate, model_source, parse_model_id
from . import incidence as incidence_module
from . import sim, smtgen, solver
from .context import Scenario
from .cpn import engine
from .defaults import RUN_DEFAULTS
from .exceptions import SolverError, UnknownModelError
from .models.cpn import CpnModel, CpnRunResult, MonitorKind
from .models.incidence import IncidenceMatrices
from .models.net import ModelId, Net
from .models.sim import ExplorationResult, SimConfig, SimReport
from .models.smt import SmtScript, VerdictRow

logger = logging.getLogger(__name__)

# Response aliases: pydantic objects or their model_dump() dicts
SimResponse: TypeAlias = Union[SimReport, dict]
ExploreResponse: TypeAlias = Union[ExplorationResult, dict]
IncidenceResponse: TypeAlias = Union[IncidenceMatrices, dict]
CpnRunResponse: TypeAlias = Union[CpnRunResult, dict]
VerdictResponse: TypeAlias = Union[VerdictRow, dict]
VerdictsResponse: TypeAlias = Union[List[VerdictRow], List[dict]]
ModelsResponse: TypeAlias = Union[List[ModelId], List[dict]]


class PetriProof:
    """Facade over the model catalog, the simulators and the SMT pipeline."""

    def __init__(
        self,
        data_dir: Optional[str] = None,
        solver_path: Optional[str] = None,
        smt_timeout: float = 30.0,
        seed: int = 0,
        profile: str = "toy",
        defaults: Optional[Dict[str, Any]] = None,
        format: Literal['pydantic', 'json'] = 'pydantic',
    ):
        """Initialize the client.

        Args:
            data_dir: Directory for SMT scripts and cached verdicts.
                     The default is ~/petriproof.
            solver_path: SMT-LIB2 solver binary. Falls back to the
                        PETRIPROOF_SOLVER environment variable, then to z3 on PATH.
            smt_timeout: Per-script solver timeout in seconds
            seed: Seed for simulations, CPN runs and scheme contexts
            profile: Curve profile of the scheme rules, 'toy' or 'standard'
            defaults: Overrides for RUN_DEFAULTS. Keys must be a subset of
                     the keys of RUN_DEFAULTS.
            format: Output format - 'pydantic' for typed models, 'json' for dicts
        """
        if data_dir is None:
            self.data_dir = Path.home() / "petriproof"
        else:
            self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

        self.solver_path = solver_path or os.getenv(solver.SOLVER_ENV)
        self.smt_timeout = smt_timeout
        self.seed = seed
        self.profile = profile
        self.format = format

        self.defaults = dict(RUN_DEFAULTS)
        if defaults is not None:
            for key, value in defaults.items():
                if key in self.defaults:
                    self.defaults[key] = value
                else:
                    raise ValueError(f"Invalid default key: {key}. Must be one of {list(RUN_DEFAULTS.keys())}")

        self._models: Dict[str, Model] = {}

    async def __aenter__(self):
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        await self.close()

    async def close(self):
        """Drop the compiled models."""
        self._models.clear()

    def _format_response(self, response: Any) -> Any:
        """Return pydantic objects as-is, or as dicts in 'json' format."""
        if self.format == 'json':
            if hasattr(response, 'model_dump'):
                return response.model_dump()
            elif isinstance(response, list):
                return [item.model_dump() if hasattr(item, 'model_dump') else item for item in response]
        return response

    # Models

    def list_models(self, include_composites: bool = False) -> ModelsResponse:
        """List the catalog entries."""
        return self._format_response(catalog(include_composites))

    def load(self, model: Union[str, ModelId], scenario: Scenario = "honest") -> Model:
        """Compile a catalog entry, caching the result per id and scenario.

        Args:
            model: Model id such as 'ecdsa-keygen' or 'lps-gen-proof/cpn/timed'
            scenario: 'clone' for the foreign-key verify-proof variant

        Returns:
            A Net or CpnModel; always the object, never a dict

        Raises:
            UnknownModelError: If the id is not in the catalog
        """
        model_id = parse_model_id(model) if isinstance(model, str) else model
        key = f"{model_id}:{scenario}"
        if key not in self._models:
            self._models[key] = instantiate(model_id, self.profile, self.seed, scenario)
        return self._models[key]

    def source(self, model: Union[str, ModelId]) -> str:
        """The `.pnet` text of a built-in model."""
        model_id = parse_model_id(model) if isinstance(model, str) else model
        return model_source(model_id)

    def _hlpn(self, model: Union[str, ModelId], scenario: Scenario = "honest") -> Net:
        loaded = self.load(model, scenario)
        if not isinstance(loaded, Net):
            raise UnknownModelError(f"{model} is a CPN; this operation needs an HLPN model")
        return loaded

    def _cpn(self, model: str, timed: bool) -> CpnModel:
        model_id = parse_model_id(model)
        if model_id.layer != "cpn":
            model_id = ModelId(name=model_id.name, layer="cpn", timing="timed" if timed else "untimed")
        loaded = self.load(model_id)
        assert isinstance(loaded, CpnModel)
        return loaded

    # Structure

    def incidence(self, model: Union[str, ModelId]) -> IncidenceResponse:
        """Forward, backward, combined and inhibition matrices of a model."""
        return self._format_response(incidence_module.incidence_matrices(self.load(model)))

    def check_incidence(self, model: str) -> List[str]:
        """Compare a built-in HLPN against its golden tables.

        Returns:
            Mismatch descriptions; empty when every cell agrees
        """
        net = self._hlpn(model)
        expected = incidence_module.golden_matrices(parse_model_id(model).name)
        return incidence_module.compare(incidence_module.incidence_matrices(net), expected)

    # Simulation

    def simulate(
        self,
        model: str,
        firings: Optional[int] = None,
        replications: Optional[int] = None,
        alpha: Optional[float] = None,
        source_budget: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> SimResponse:
        """Replicated stochastic runs with per-place confidence intervals.

        Unset arguments come from the client defaults and seed.
        """
        config = SimConfig(
            firings=self.defaults['firings'] if firings is None else firings,
            replications=self.defaults['replications'] if replications is None else replications,
            alpha=self.defaults['alpha'] if alpha is None else alpha,
            seed=self.seed if seed is None else seed,
            source_budget=source_budget,
        )
        return self._format_response(sim.replicate(self._hlpn(model), config))

    def explore(self, model: str, max_states: Optional[int] = None, scenario: Scenario = "honest") -> ExploreResponse:
        """Bounded breadth-first exploration of an HLPN."""
        bound = self.defaults['max_states'] if max_states is None else max_states
        return self._format_response(sim.bounded_explore(self._hlpn(model, scenario), bound))

    def run_cpn(
        self,
        model: str,
        timed: bool = False,
        steps: Optional[int] = None,
        kind: MonitorKind = "discrete",
        seed: Optional[int] = None,
    ) -> CpnRunResponse:
        """Run a CPN with one monitor per place.

        Args:
            model: Model name, or a full CPN id which then decides the timing
            timed: Pick the timed variant when `model` is a bare name
            steps: Firing budget, the 'cpn_steps' default when omitted
            kind: Monitor kind, 'discrete' or 'time'
            seed: Run seed, the client seed when omitted
        """
        result = engine.run(
            self._cpn(model, timed),
            steps=self.defaults['cpn_steps'] if steps is None else steps,
            seed=self.seed if seed is None else seed,
            monitor_kind=kind,
        )
        return self._format_response(result)

    # SMT

    def emit(self, prop: str, with_bindings: bool = True) -> SmtScript:
        """The SMT script of a property, a model name or a single rule (R1..R21)."""
        if prop.upper().startswith("R") and prop[1:].isdigit():
            return smtgen.emit_rule(prop.upper())
        return smtgen.emit_property(prop, with_bindings=with_bindings)

    def write_script(self, prop: str, with_bindings: bool = True, out_dir: Optional[Path] = None) -> Path:
        """Write a script to `<out_dir or data_dir/smt>/<name>.smt2`."""
        script = self.emit(prop, with_bindings)
        directory = Path(out_dir) if out_dir is not None else self.data_dir / "smt"
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{script.name}.smt2"
        path.write_text(smtgen.render_script(script), encoding="utf-8")
        logger.debug("Wrote %s", path)
        return path

    def _get_cache_filename(self, text: str) -> Path:
        """Cache file keyed by the script text and the solver."""
        cache_key = f"{self.solver_path or solver.DEFAULT_SOLVER}\n{text}"
        hash_digest = hashlib.md5(cache_key.encode()).hexdigest()
        cache_dir = self.data_dir / "cache" / "smt"
        cache_dir.mkdir(parents=True, exist_ok=True)
        return cache_dir / f"{hash_digest}.json"

    def _load_from_cache(self, cache_file: Path) -> Optional[Any]:
        """Load a cached verdict if present and readable."""
        if cache_file.exists():
            try:
                with open(cache_file, "r") as f:
                    return json.load(f)
            except (json.JSONDecodeError, IOError):
                pass
        return None

    def _save_to_cache(self, cache_file: Path, data: Any) -> None:
        """Save a verdict; failures to cache are ignored."""
        try:
            with open(cache_file, "w") as f:
                json.dump(data, f, indent=2)
        except (IOError, TypeError):
            pass

    async def check_property(self, prop: str, with_bindings: bool = True, force: bool = False) -> VerdictResponse:
        """Run one property through the solver.

        Verdicts are cached under data_dir/cache/smt; solver errors are
        returned in the row's `error` field and never cached.

        Args:
            prop: Property name or model alias
            with_bindings: Include the binding assertions (unsat expected)
            force: Bypass the verdict cache
        """
        script = self.emit(prop, with_bindings)
        text = smtgen.render_script(script)
        cache_file = self._get_cache_filename(text)
        if not force:
            cached = self._load_from_cache(cache_file)
            if cached is not None:
                logger.debug("Verdict of %s served from cache", script.name)
                return self._format_response(VerdictRow.model_validate(cached))

        try:
            verdict = await solver.run_solver(
                script, self.solver_path, self.smt_timeout, work_dir=self.data_dir / "smt",
            )
        except SolverError as e:
            return self._format_response(VerdictRow(property=script.name, error=f"{type(e).__name__}: {e}"))
        row = VerdictRow(property=script.name, execution_time=verdict.elapsed_seconds, verdict=verdict.result)
        self._save_to_cache(cache_file, row.model_dump())
        return self._format_response(row)

    async def verify_all(self, properties: Optional[List[str]] = None, with_bindings: bool = True) -> VerdictsResponse:
        """Check every property concurrently; see `solver.verify_all`."""
        rows = await solver.verify_all(
            self.solver_path,
            self.smt_timeout,
            properties=properties,
            with_bindings=with_bindings,
            work_dir=self.data_dir / "smt",
        )
        return self._format_response(rows)
