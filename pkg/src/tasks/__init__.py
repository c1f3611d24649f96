"""
Execution helpers: timed task contexts and order-preserving worker pools.
"""

from src.tasks.worker import parallel_map, task_context, thread_count
