"""Configuration, experiment runners and reporting."""
