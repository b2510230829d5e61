"""Exact and approximate distributions of sup-type goodness-of-fit tests."""
