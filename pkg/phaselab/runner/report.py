"""Render a completed run's manifest as text."""
from pathlib import Path
from typing import Union

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from phaselab.runner.outputs import load_manifest

TEMPLATES_DIR = Path(__file__).parent / "templates"

_environment = Environment(
    loader=FileSystemLoader(TEMPLATES_DIR),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    autoescape=False,
)


def render_report(run_dir: Union[str, Path]) -> str:
    """Verify the run and render its headline metrics; raises IncompleteRunError."""
    manifest = load_manifest(run_dir, verify=True)
    template = _environment.get_template("report.txt.j2")
    return template.render(run_dir=str(run_dir), manifest=manifest)
