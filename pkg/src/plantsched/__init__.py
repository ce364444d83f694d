"""Joint proactive-maintenance planning and RTP-aware production scheduling.

The package couples a day-ahead maintenance planner (Benders decomposition
over a binary master problem) with an hourly convex production scheduler,
and ships a closed-loop simulator plus a CLI for scenario runs.
"""

__version__ = "0.1.0"
