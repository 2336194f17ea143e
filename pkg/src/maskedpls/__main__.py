"""Module execution hook so ``python -m maskedpls`` runs the CLI."""

from .cli import entrypoint

entrypoint()
