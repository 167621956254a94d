from contextvars import ContextVar

ctx_run_id = ContextVar("run_id", default="-")
