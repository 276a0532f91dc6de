"""Shared exception root so the CLI can map failures to exit codes."""


class DecentMeterError(Exception):
    pass
