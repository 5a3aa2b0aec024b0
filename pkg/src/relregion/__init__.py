"""Relevant-region sampling planner with adaptive heuristic estimation."""
