"""Command-line tools: ``python -m tools.vare_cli.{simulate,estimate,experiment}``."""
