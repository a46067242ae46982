# Make the command-line entry point available at package level
from .cli import run

__all__ = ['run']
