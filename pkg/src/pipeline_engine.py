"""
Step framework of the lab.

Every run mode is a pipeline of steps sharing one context dict (config,
report, intermediate solver objects). Pipelines are described by JSON
templates in `src/templates/`, one file per mode.
"""
import importlib
import inspect
import json
import pkgutil
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from src.schemas.template import PipelineTemplate, StepSpec
from src.tasks.worker import task_context
from src.utils.errors import ConfigError
from src.utils.logging import logger

Context = Dict[str, Any]
TEMPLATES_DIR = Path(__file__).parent / "templates"


class BaseStep(ABC):
    """
    Base class for all pipeline steps.

    A step reads what it needs from the run context, adds its own results
    and returns the context.
    """

    def __init__(self, params: Optional[Dict[str, Any]] = None):
        """
        Args:
            params: Parameters of this step; missing keys take the defaults
        """
        self.params = {**self.get_default_params(), **(params or {})}
        self._validate_params()

    @abstractmethod
    def _validate_params(self) -> None:
        """
        Raises:
            ValueError: If parameters are invalid
        """

    @abstractmethod
    def apply(self, context: Context) -> Context:
        """Run the step on the context and return it."""

    @classmethod
    def get_default_params(cls) -> Dict[str, Any]:
        return {}

    def spec(self) -> StepSpec:
        return StepSpec.model_validate(
            {"class": type(self).__name__, "module": type(self).__module__, "params": self.params})


class Pipeline:
    """Ordered steps applied to one run context."""

    def __init__(self, steps: Optional[List[BaseStep]] = None, name: str = "pipeline"):
        self.steps = list(steps or [])
        self.name = name

    def process(self, context: Context) -> Context:
        total = len(self.steps)
        with task_context(self.name):
            for i, step in enumerate(self.steps, start=1):
                step_name = type(step).__name__
                logger.info(f"Applying step {i}/{total}: {step_name}")
                try:
                    with task_context(f"{self.name}/{step_name}"):
                        context = step.apply(context)
                except Exception as e:
                    logger.error(f"Step {i}/{total} ({step_name}) failed: {type(e).__name__}: {e}")
                    raise
                context.setdefault("completed_steps", []).append(step_name)
        return context

    def to_dict(self) -> Dict[str, Any]:
        template = PipelineTemplate(name=self.name, steps=[step.spec() for step in self.steps])
        return template.model_dump(by_alias=True, exclude_none=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Pipeline":
        """
        Rebuild a pipeline whose steps carry their module path.

        Raises:
            ConfigError: If the data is not a valid template or a step class cannot be imported
        """
        template = _parse_template(data, "pipeline")
        steps = []
        for entry in template.steps:
            if entry.module is None:
                raise ConfigError(f"step {entry.step_class} has no module")
            try:
                step_class = getattr(importlib.import_module(entry.module), entry.step_class)
            except (ImportError, AttributeError) as e:
                raise ConfigError(f"cannot load step {entry.module}.{entry.step_class}: {e}") from e
            steps.append(step_class(entry.params))
        return cls(steps, template.name or "pipeline")


def _parse_template(data: Dict[str, Any], source: str) -> PipelineTemplate:
    try:
        return PipelineTemplate.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid pipeline template {source}: {e}") from e


class PipelineRegistry:
    """Registered step classes and mode templates."""

    def __init__(self):
        self.steps: Dict[str, type] = {}
        self.templates: Dict[str, PipelineTemplate] = {}

    def register_step(self, step_class: type) -> None:
        if not (inspect.isclass(step_class) and issubclass(step_class, BaseStep)):
            raise TypeError(f"{getattr(step_class, '__name__', step_class)} must inherit from BaseStep")
        self.steps[step_class.__name__] = step_class
        logger.debug(f"Registered step: {step_class.__name__}")

    def register_template(self, name: str, template: Union[Dict[str, Any], PipelineTemplate]) -> None:
        if not isinstance(template, PipelineTemplate):
            template = _parse_template(template, name)
        self.templates[name] = template
        logger.debug(f"Registered template: {name} ({len(template.steps)} steps)")

    def build(self, name: str, overrides: Optional[Dict[str, Dict[str, Any]]] = None) -> Pipeline:
        """
        Pipeline from a registered template.

        Args:
            name: Template name (a run mode)
            overrides: Extra params per step class name, applied to every occurrence

        Raises:
            KeyError: If the template or one of its step classes is not registered
        """
        if name not in self.templates:
            raise KeyError(f"Template {name} not registered")
        overrides = overrides or {}
        steps = []
        for entry in self.templates[name].steps:
            if entry.step_class not in self.steps:
                raise KeyError(f"Step class {entry.step_class} not registered")
            params = {**entry.params, **overrides.get(entry.step_class, {})}
            steps.append(self.steps[entry.step_class](params))
        return Pipeline(steps, name)

    def discover_steps(self, package: str = "src.steps") -> None:
        """Register every concrete BaseStep subclass defined in the package's modules."""
        package_module = importlib.import_module(package)
        for info in sorted(pkgutil.iter_modules(package_module.__path__), key=lambda m: m.name):
            module_name = f"{package}.{info.name}"
            try:
                module = importlib.import_module(module_name)
            except ImportError as e:
                logger.error(f"Error loading module {module_name}: {e}")
                raise
            for _, obj in inspect.getmembers(module, inspect.isclass):
                if issubclass(obj, BaseStep) and obj.__module__ == module_name and not inspect.isabstract(obj):
                    self.register_step(obj)

    def discover_templates(self, templates_dir: Optional[Union[str, Path]] = None) -> None:
        """
        Register every `*.json` template of the directory under its file stem.

        Raises:
            ConfigError: If a template file is not valid JSON or not a valid template
        """
        path = Path(templates_dir) if templates_dir else TEMPLATES_DIR
        if not path.exists():
            logger.warning(f"Templates directory {path} does not exist")
            return
        for template_file in sorted(path.glob("*.json")):
            try:
                data = json.loads(template_file.read_text())
            except (json.JSONDecodeError, OSError) as e:
                raise ConfigError(f"cannot read template {template_file}: {e}") from e
            self.register_template(template_file.stem, data)


registry = PipelineRegistry()
