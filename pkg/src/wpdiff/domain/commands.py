from typing import Dict, List, Optional

from pydantic import BaseModel

from src.wpdiff.domain.scenario_model import ScenarioConfig

################################################################################
# Run commands - between the CLI and the handlers
################################################################################


class Command(BaseModel):
    pass


class Simulate(Command):
    """Evolve a schrodinger1d, dirac1d or experiment configuration."""

    config: ScenarioConfig
    out: str
    run_id: str
    nk: Optional[int] = None


class Analytic(Command):
    config: ScenarioConfig
    out: str
    run_id: str
    nk: Optional[int] = None


class Compare(Command):
    path_a: str
    path_b: str
    out: str
    run_id: str
    name: str = "compare"


class RunPreset(Command):
    name: str
    out: str
    run_id: str
    nk: Optional[int] = None


class Experiment(Command):
    config: ScenarioConfig
    out: str
    run_id: str
    nk: Optional[int] = None


class Sweep(Command):
    config: ScenarioConfig
    axes: Dict[str, List[float]]
    out: str
    run_id: str
    threads: int = 1
    nk: Optional[int] = None
