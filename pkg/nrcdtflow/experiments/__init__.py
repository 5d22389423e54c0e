"""Batch experiments: configuration, runner and self-test suites."""
