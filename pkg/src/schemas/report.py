import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

REPORT_VERSION = "RPT v1"


class Criterion(BaseModel):
    """One asserted property: the measured value against its threshold."""
    name: str
    module: str
    measured: Optional[float] = None
    threshold: Optional[float] = None
    comparison: Literal["<=", ">=", "<", ">", "=="] = "<="
    passed: bool = False
    detail: Optional[str] = None

    @classmethod
    def check(cls, name: str, module: str, measured: float, threshold: float, comparison: str = "<=",
              detail: Optional[str] = None) -> "Criterion":
        ops = {
            "<=": lambda a, b: a <= b,
            ">=": lambda a, b: a >= b,
            "<": lambda a, b: a < b,
            ">": lambda a, b: a > b,
            "==": lambda a, b: a == b,
        }
        measured = float(measured)
        passed = math.isfinite(measured) and ops[comparison](measured, threshold)
        return cls(name=name, module=module, measured=measured, threshold=float(threshold),
                   comparison=comparison, passed=bool(passed), detail=detail)

    @classmethod
    def failure(cls, name: str, module: str, detail: str) -> "Criterion":
        """A criterion whose battery raised before producing a value."""
        return cls(name=name, module=module, passed=False, detail=detail)


class RunReport(BaseModel):
    """Result of one run; serialized with sorted keys and no timestamps."""
    schema_version: Literal["RPT v1"] = REPORT_VERSION
    mode: str
    config: Dict[str, Any]
    constants: Dict[str, float] = Field(default_factory=dict)
    residuals: Dict[str, float] = Field(default_factory=dict)
    trace_path: Optional[str] = None
    artifacts: List[str] = Field(default_factory=list)
    criteria: List[Criterion] = Field(default_factory=list)
    exit_code: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def failed(self) -> List[Criterion]:
        return [c for c in self.criteria if not c.passed]
