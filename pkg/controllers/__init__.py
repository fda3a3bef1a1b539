from .cliController import CliController

__all__ = ['CliController']
