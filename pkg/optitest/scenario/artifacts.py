import logging
import math
import os
import textwrap

import jinja2
import numpy as np

from .. import __version__


__all__ = ["Table", "ArtifactPlan", "ArtifactBuilder"]


logger = logging.getLogger(__name__)


class Table:
    """Named columns of equal length, emitted as one CSV file.

    Parameters
    ----------
    name : str
        Artifact name, used in the file name.
    columns : dict
        ``{header: values}``; values are sequences of numbers or strings.
    """
    def __init__(self, name, columns):
        lengths = {len(values) for values in columns.values()}
        if len(lengths) > 1:
            raise ValueError("Columns of table {!r} must have the same length, not {}"
                             .format(name, sorted(lengths)))
        self.name    = name
        self.columns = {header: list(values) for header, values in columns.items()}

    @property
    def headers(self):
        return list(self.columns)

    def rows(self):
        return zip(*self.columns.values())

    def __len__(self):
        return len(next(iter(self.columns.values()), []))


class ArtifactPlan:
    """Rendered files, ready to be written."""
    def __init__(self):
        self.files = {}

    def add_file(self, filename, content):
        if filename in self.files:
            raise ValueError("File {!r} is already part of the plan".format(filename))
        self.files[filename] = content

    def write(self, root):
        """Write every file under ``root`` and return their paths, in plan order."""
        os.makedirs(root, exist_ok=True)
        paths = []
        for filename, content in self.files.items():
            path = os.path.join(root, filename)
            with open(path, "w", newline="\n") as f:
                f.write(content)
            paths.append(path)
        logger.info("Wrote %d file(s) to %s", len(paths), root)
        return paths


def format_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


class ArtifactBuilder:
    file_templates = {
        "{{name}}_{{table.name}}.csv": r"""
            # {{autogenerated}}
            # subcommand = {{subcommand}}
            # seed = {{scenario.seed}}
            {% for section, key, value in scenario.resolved() %}
            # [{{section}}] {{key}} = {{value}}
            {% endfor %}
            {{table.headers|join(",")}}
            {% for row in table.rows() %}
            {{fmt_row(row)}}
            {% endfor %}
        """,
    }

    def prepare(self, scenario, subcommand, tables):
        """Render one CSV file per table.

        Each file starts with a ``#`` block holding the tool version, the subcommand,
        the master seed and every resolved configuration entry.
        """
        name = scenario["output"]["name"]
        autogenerated = "Automatically generated by optitest {}. Do not edit.".format(
            __version__)

        def fmt_row(row):
            return ",".join(format_value(value) for value in row)

        def render(source, origin, table):
            try:
                source   = textwrap.dedent(source).strip()
                compiled = jinja2.Template(source, trim_blocks=True, lstrip_blocks=True)
            except jinja2.TemplateSyntaxError as e:
                e.args = ("{} (at {}:{})".format(e.message, origin, e.lineno),)
                raise
            return compiled.render({
                "autogenerated": autogenerated,
                "fmt_row": fmt_row,
                "name": name,
                "scenario": scenario,
                "subcommand": subcommand,
                "table": table,
            })

        plan = ArtifactPlan()
        for table in tables:
            for filename_tpl, content_tpl in self.file_templates.items():
                plan.add_file(render(filename_tpl, filename_tpl, table),
                              render(content_tpl, content_tpl, table))
        return plan
