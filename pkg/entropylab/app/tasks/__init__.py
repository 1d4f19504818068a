"""Experiment runners, worker pool and acceptance suite."""
