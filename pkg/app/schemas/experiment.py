from pathlib import Path
from typing import Dict, List, Literal, Union

from pydantic import BaseModel, ConfigDict

Subcommand = Literal[
    "pattern", "synthesize", "aoa", "search", "squint",
    "jcas-apg", "jcas-tradeoff", "jcas-secrecy", "bh", "power",
]


class ExperimentSpec(BaseModel):
    """Everything that determines one experiment run"""
    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand
    parameters: Dict[str, Union[int, float, str]] = {}
    seed: int
    out: Path


class ExperimentOutcome(BaseModel):
    files: List[Path] = []
    summary: str = ""
