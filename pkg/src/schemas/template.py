from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class StepSpec(BaseModel):
    """One step of a template: the registered class name and its params."""
    model_config = ConfigDict(populate_by_name=True)

    step_class: str = Field(..., alias="class", description="Registered step class name")
    module: Optional[str] = Field(default=None, description="Module to import the class from")
    params: Dict[str, Any] = Field(default_factory=dict)


class PipelineTemplate(BaseModel):
    """A named, ordered list of steps; one per run mode."""
    name: Optional[str] = None
    description: Optional[str] = None
    steps: List[StepSpec] = Field(..., min_length=1)
