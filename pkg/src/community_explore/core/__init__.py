"""Exploration model, optimizers, estimators and online learners."""
